from typing import List, Optional, Tuple
import logging

from .core import ABTree, Node
from .counters import WorkCounters
from .exceptions import PreconditionError

logger = logging.getLogger(__name__)

LEFT = 'left'
RIGHT = 'right'


class SpineArray:
    """Rank-indexed references to the nodes of one spine; slot r holds the node of rank r"""
    __slots__ = ('side', 'slots')

    def __init__(self, side: str, slots: Optional[List[Optional[Node]]] = None):
        self.side = side
        self.slots = slots if slots is not None else [None]

    def __getitem__(self, rank: int) -> Node:
        return self.slots[rank]

    def __setitem__(self, rank: int, node: Node):
        while len(self.slots) <= rank:
            self.slots.append(None)
        self.slots[rank] = node

    def __len__(self):
        return len(self.slots) - 1


class StackEntry:
    """A spine array together with the rank interval it is authoritative for"""
    __slots__ = ('array', 'lo', 'hi', 'below')

    def __init__(self, array: SpineArray, lo: int, hi: int, below: Optional['StackEntry'] = None):
        self.array = array
        self.lo = lo
        self.hi = hi
        self.below = below

    def __repr__(self):
        return f"StackEntry([{self.lo}, {self.hi}])"


class SpineStack:
    """
    Stack of spine arrays describing one spine of a tree.

    The top entry covers the lowest ranks. Intervals are disjoint and, read
    from top to bottom, consecutive from ``floor`` up to the tree's rank.
    """

    def __init__(self, side: str):
        self.side = side
        self.top: Optional[StackEntry] = None
        self.bottom: Optional[StackEntry] = None
        self.depth = 0
        self.floor = 1

    @classmethod
    def from_tree(cls, tree: ABTree, side: str) -> 'SpineStack':
        stack = cls(side)
        if tree.root is None:
            return stack
        array = SpineArray(side, [None] * (tree.rank + 1))
        node, rank = tree.root, tree.rank
        while True:
            array.slots[rank] = node
            if node.children is None:
                break
            node = node.children[0] if side == LEFT else node.children[-1]
            rank -= 1
        entry = StackEntry(array, 1, tree.rank)
        stack.top = stack.bottom = entry
        stack.depth = 1
        return stack

    def __len__(self):
        return self.depth

    @property
    def rank(self) -> int:
        return self.bottom.hi if self.bottom is not None else 0

    def intervals(self) -> List[Tuple[int, int]]:
        """Entry intervals from top to bottom"""
        out = []
        entry = self.top
        while entry is not None:
            out.append((entry.lo, entry.hi))
            entry = entry.below
        return out

    def pop_to(self, target: int, counters: Optional[WorkCounters] = None) -> StackEntry:
        """Pop entries until the top one covers target"""
        if self.top is None or target < self.floor or target > self.bottom.hi:
            raise PreconditionError(f"Rank {target} outside the covered range [{self.floor}, {self.rank}]")
        entry = self.top
        pops = 0
        while target > entry.hi:
            entry = entry.below
            pops += 1
        self.top = entry
        self.depth -= pops
        if counters is not None:
            counters.stack_pops += pops
        if target < entry.lo:
            raise PreconditionError(f"Rank {target} is below the top entry [{entry.lo}, {entry.hi}]")
        return entry

    def node_at(self, rank: int, counters: Optional[WorkCounters] = None) -> Node:
        return self.pop_to(rank, counters).array[rank]

    def combine(self, other: 'SpineStack', v_rank: int,
                counters: Optional[WorkCounters] = None) -> 'SpineStack':
        """
        Stack ``other`` on top after a join at rank v_rank.

        The current top must cover v_rank and ``other`` must end at v_rank.
        ``other`` is left empty.
        """
        entry = self.top
        if entry is None or not entry.lo <= v_rank <= entry.hi:
            raise PreconditionError(f"Top entry does not cover rank {v_rank}; pop_to must come first")
        if other.bottom is None or other.bottom.hi != v_rank:
            raise PreconditionError(f"Joined stack does not end at rank {v_rank}")

        entry.lo = v_rank + 1
        if entry.lo > entry.hi:
            self.top = entry.below
            self.depth -= 1
            if self.top is None:
                self.bottom = None
        other.bottom.below = self.top
        if self.bottom is None:
            self.bottom = other.bottom
        self.top = other.top
        self.depth += other.depth
        self.floor = other.floor
        if counters is not None:
            counters.stack_pushes += other.depth
            counters.stack_combines += 1

        other.top = other.bottom = None
        other.depth = 0
        return self

    def truncate_below(self, rank: int, counters: Optional[WorkCounters] = None):
        """Drop coverage of every rank below ``rank``"""
        entry = self.pop_to(rank, counters)
        entry.lo = max(entry.lo, rank)
        self.floor = rank

    def set_root_slot(self, node: Node):
        """Point the highest covered rank at node"""
        self.bottom.array[self.bottom.hi] = node

    def refresh_root(self, root: Node, old_rank: int, new_rank: int):
        """Re-derive the slots from old_rank up to a root that now has new_rank"""
        entry = self.bottom
        node, rank = root, new_rank
        while rank >= old_rank:
            entry.array[rank] = node
            if rank > old_rank:
                node = node.children[0] if self.side == LEFT else node.children[-1]
            rank -= 1
        entry.hi = new_rank

    def check(self, tree: ABTree) -> List[str]:
        """Disagreements between the stack and the tree's actual spine"""
        problems = []
        actual = SpineStack.from_tree(tree, self.side)
        expected = actual.top.array if actual.top is not None else None
        entry = self.top
        next_lo = self.floor
        while entry is not None:
            if entry.lo != next_lo:
                problems.append(f"Entry [{entry.lo}, {entry.hi}] does not start at rank {next_lo}")
            for rank in range(entry.lo, entry.hi + 1):
                if expected is None or rank > tree.rank or entry.array[rank] is not expected[rank]:
                    problems.append(f"Slot {rank} does not hold the {self.side} spine node")
            next_lo = entry.hi + 1
            entry = entry.below
        if tree.root is not None and next_lo != tree.rank + 1:
            problems.append(f"Coverage ends at {next_lo - 1}, tree rank is {tree.rank}")
        return problems


def build_spine_stacks(tree: ABTree) -> Tuple[SpineStack, SpineStack]:
    return SpineStack.from_tree(tree, LEFT), SpineStack.from_tree(tree, RIGHT)


def spine_stack(tree: ABTree, side: str, counters: Optional[WorkCounters] = None) -> SpineStack:
    """The tree's stack for side, rebuilt from the tree when it was never built"""
    attr = 'left_spine' if side == LEFT else 'right_spine'
    stack = getattr(tree, attr)
    if stack is None:
        stack = SpineStack.from_tree(tree, side)
        setattr(tree, attr, stack)
        if counters is not None:
            counters.spine_rebuilds += 1
    return stack


def spine_nodes(tree: ABTree, side: str) -> List[Node]:
    """Spine nodes listed bottom-up"""
    nodes = []
    node = tree.root
    while node is not None:
        nodes.append(node)
        if node.children is None:
            break
        node = node.children[0] if side == LEFT else node.children[-1]
    nodes.reverse()
    return nodes
