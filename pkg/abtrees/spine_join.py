"""
Joins of trees that carry spine stacks.

The joiner's root lands on the receiver's spine at its own rank, found
through the receiver's spine stack in O(1) amortized steps. A parent of
degree b is made room in by splitting the whole chain of degree-b spine
nodes above it top-down.
"""
from dataclasses import dataclass, field
from typing import Any, List, Optional, Tuple
import logging

from .core import ABTree, Node, node_fuse, node_split, refresh_root_paths, require_compatible
from .counters import WorkCounters
from .exceptions import InvariantError, PreconditionError
from .spines import LEFT, RIGHT, SpineStack, spine_stack

logger = logging.getLogger(__name__)


@dataclass
class DegreeBChain:
    """Consecutive degree-b nodes on one spine, listed bottom-up"""
    side: str
    base_rank: int
    nodes: List[Node] = field(default_factory=list)

    @classmethod
    def collect(cls, node: Optional[Node], b: int, side: str, rank: int) -> 'DegreeBChain':
        chain = cls(side, rank)
        while node is not None and node.degree >= b:
            chain.nodes.append(node)
            node = node.parent
        return chain

    def __len__(self):
        return len(self.nodes)


def split_b_chain(tree: ABTree, chain: DegreeBChain, min_rank: int = 1,
                  counters: Optional[WorkCounters] = None) -> int:
    """
    Split every chain node of rank >= min_rank, top-down.

    A right chain node keeps its last ceil(b/2) children, including its
    rightmost child; the new left sibling goes into the parent right before
    it. Left chains mirror this.

    Returns:
        int: number of nodes split
    """
    targets = []
    for offset, node in enumerate(chain.nodes):
        if node.degree != tree.b:
            raise InvariantError(f"Chain node of degree {node.degree}, expected {tree.b}")
        if chain.base_rank + offset >= min_rank:
            targets.append(node)

    for node in reversed(targets):
        first, second, splitter = node_split(node, keep='right' if chain.side == RIGHT else 'left')
        parent = node.parent
        if parent is None:
            tree.root = Node([splitter], [first, second])
            tree.rank += 1
            continue
        idx = parent.children.index(node)
        if chain.side == RIGHT:
            parent.children.insert(idx, first)
            first.parent = parent
        else:
            parent.children.insert(idx + 1, second)
            second.parent = parent
        parent.keys.insert(idx, splitter)
    if counters is not None:
        counters.node_splits += len(targets)
    return len(targets)


@dataclass
class JoinOutcome:
    """
    Result of one spine-stack join.

    Without a steal ``tree`` holds both inputs. With a steal ``tree`` is the
    receiver, which gave up the attach node, and ``stolen`` replaces the joiner.
    """
    tree: ABTree
    stolen: Optional[ABTree] = None
    attach_rank: int = 0
    chain_growth: int = 0


def join_key(tree: ABTree, counters: Optional[WorkCounters] = None) -> Any:
    """A key at least as large as every element of tree"""
    if tree.upper_fence is not None:
        return tree.upper_fence
    return spine_stack(tree, RIGHT, counters).node_at(1).keys[-1]


def join2_preprocessed(u: ABTree, v: ABTree, counters: Optional[WorkCounters] = None,
                       saved: Optional[List[Node]] = None) -> ABTree:
    """
    Join two preprocessed trees, every element of u below every element of v.

    With ``saved`` given, the attach nodes are appended to it and subtree sizes
    on their root paths are left for the caller to repair; otherwise they are
    recounted before returning.
    """
    touched = saved if saved is not None else []
    tree = join_preprocessed(u, v, counters=counters, saved=touched).tree
    if saved is None and tree.augmented:
        refresh_root_paths(tree, touched)
    return tree


def join_preprocessed(u: ABTree, v: ABTree, counters: Optional[WorkCounters] = None,
                      saved: Optional[List[Node]] = None, steal: bool = False) -> JoinOutcome:
    """
    Spine-stack join with optional subtree stealing.

    When ``steal`` is set and the parent of the attach node has degree b, the
    attach node is cut out of the receiver and joined with the joiner into a
    new tree instead of splitting the degree-b chain.
    """
    require_compatible(u, v)
    if v.root is None:
        return JoinOutcome(u)
    if u.root is None:
        return JoinOutcome(v)
    counters = counters if counters is not None else WorkCounters()

    joiner, receiver = (v, u) if u.rank >= v.rank else (u, v)
    if joiner.root.degree >= joiner.b and joiner.rank < receiver.rank:
        _presplit_root(joiner, counters)

    size = u._size + v._size if u._size is not None and v._size is not None else None
    augmented = u.augmented and v.augmented
    if u.rank >= v.rank:
        outcome = _attach_right(u, v, counters, saved, steal)
    else:
        outcome = _attach_left(u, v, counters, saved, steal)
    if outcome.stolen is None:
        outcome.tree._size = size
        outcome.tree.augmented = augmented
    counters.max_chain_growth = max(counters.max_chain_growth, outcome.chain_growth)
    return outcome


def _presplit_root(tree: ABTree, counters: WorkCounters):
    old_rank = tree.rank
    first, second, splitter = node_split(tree.root, keep='right')
    tree.root = Node([splitter], [first, second])
    tree.rank += 1
    counters.node_splits += 1
    for stack in (tree.left_spine, tree.right_spine):
        if stack is not None:
            stack.refresh_root(tree.root, old_rank, tree.rank)


def _new_stolen_tree(template: ABTree, root: Node, rank: int) -> ABTree:
    stolen = ABTree(template.a, template.b, template.augmented)
    stolen.root = root
    stolen.rank = rank
    stolen._size = None
    return stolen


def _attach_right(u: ABTree, v: ABTree, counters: WorkCounters,
                  saved: Optional[List[Node]], steal: bool) -> JoinOutcome:
    """Attach v's root on u's right spine"""
    a, b = u.a, u.b
    u_rank, v_rank = u.rank, v.rank
    u_right = spine_stack(u, RIGHT, counters)
    v_right = spine_stack(v, RIGHT, counters)
    splitter = join_key(u, counters)

    n = u_right.node_at(v_rank, counters)
    counters.visited_nodes += 1
    counters.join_steps += 1
    v_root = v.root
    growth = 0
    if n.degree < a or v_root.degree < a:
        node_fuse(n, v_root, splitter)
        v_right.set_root_slot(n)
        if n.degree > b:
            extra, _, key = node_split(n, keep='right')
            counters.node_splits += 1
            child, before = extra, True
        else:
            child = None
            growth += n.degree == b
    else:
        child, key, before = v_root, splitter, False

    outcome = JoinOutcome(u, attach_rank=v_rank)
    if child is not None:
        parent = n.parent
        if parent is None:
            u.root = Node([key], [child, n] if before else [n, child])
            u.rank += 1
        elif steal and parent.degree >= b:
            return _steal_right(u, v, n, parent, child, key, before, u_right, v_right, counters, saved)
        else:
            if parent.degree >= b:
                chain = DegreeBChain.collect(parent, b, RIGHT, v_rank + 1)
                top = chain.nodes[-1]
                split_b_chain(u, chain, v_rank + 1, counters)
                if top.parent is not None and top.parent.degree == b:
                    growth += 1
            idx = parent.children.index(n)
            parent.children.insert(idx if before else idx + 1, child)
            parent.keys.insert(idx, key)
            child.parent = parent
            growth += parent.degree == b

    u_right.pop_to(v_rank, counters)
    u_right.combine(v_right, v_rank, counters)
    u_right.refresh_root(u.root, u_rank, u.rank)
    if u.left_spine is not None:
        u.left_spine.refresh_root(u.root, u_rank, u.rank)
    u.upper_fence = v.upper_fence
    if saved is not None:
        saved.append(n)
    v.consume()
    outcome.chain_growth = growth
    return outcome


def _steal_right(u: ABTree, v: ABTree, n: Node, parent: Node, child: Node, key: Any, before: bool,
                 u_right: SpineStack, v_right: SpineStack, counters: WorkCounters,
                 saved: Optional[List[Node]]) -> JoinOutcome:
    """Cut n out of u and make it part of a new tree with the joiner's nodes"""
    v_rank = v.rank
    parent.children.pop()
    fence = parent.keys.pop()
    root = Node([key], [child, n] if before else [n, child])

    stolen = _new_stolen_tree(u, root, v_rank + 1)
    v_right.refresh_root(root, v_rank, v_rank + 1)
    stolen.right_spine = v_right
    stolen.upper_fence = v.upper_fence
    v.right_spine = None
    v.consume()

    u_right.truncate_below(v_rank + 1, counters)
    u.upper_fence = fence
    u._size = None
    counters.steals += 1
    if saved is not None:
        saved.extend((n, parent))
    return JoinOutcome(u, stolen=stolen, attach_rank=v_rank)


def _attach_left(u: ABTree, v: ABTree, counters: WorkCounters,
                 saved: Optional[List[Node]], steal: bool) -> JoinOutcome:
    """Attach u's root on v's left spine"""
    a, b = v.a, v.b
    u_rank, v_rank = u.rank, v.rank
    v_left = spine_stack(v, LEFT, counters)
    u_left = spine_stack(u, LEFT, counters)
    splitter = join_key(u, counters)

    n = v_left.node_at(u_rank, counters)
    counters.visited_nodes += 1
    counters.join_steps += 1
    u_root = u.root
    growth = 0
    if n.degree < a or u_root.degree < a:
        node_fuse(u_root, n, splitter, into='right')
        u_left.set_root_slot(n)
        if n.degree > b:
            _, extra, key = node_split(n, keep='left')
            counters.node_splits += 1
            child, before = extra, False
        else:
            child = None
            growth += n.degree == b
    else:
        child, key, before = u_root, splitter, True

    outcome = JoinOutcome(v, attach_rank=u_rank)
    if child is not None:
        parent = n.parent
        if parent is None:
            v.root = Node([key], [child, n] if before else [n, child])
            v.rank += 1
        elif steal and parent.degree >= b:
            return _steal_left(u, v, n, parent, child, key, before, u_left, v_left, counters, saved)
        else:
            if parent.degree >= b:
                chain = DegreeBChain.collect(parent, b, LEFT, u_rank + 1)
                top = chain.nodes[-1]
                split_b_chain(v, chain, u_rank + 1, counters)
                if top.parent is not None and top.parent.degree == b:
                    growth += 1
            idx = parent.children.index(n)
            parent.children.insert(idx if before else idx + 1, child)
            parent.keys.insert(idx, key)
            child.parent = parent
            growth += parent.degree == b

    v_left.pop_to(u_rank, counters)
    v_left.combine(u_left, u_rank, counters)
    v_left.refresh_root(v.root, v_rank, v.rank)
    if v.right_spine is not None:
        v.right_spine.refresh_root(v.root, v_rank, v.rank)
    if saved is not None:
        saved.append(n)
    u.consume()
    outcome.chain_growth = growth
    return outcome


def _steal_left(u: ABTree, v: ABTree, n: Node, parent: Node, child: Node, key: Any, before: bool,
                u_left: SpineStack, v_left: SpineStack, counters: WorkCounters,
                saved: Optional[List[Node]]) -> JoinOutcome:
    u_rank = u.rank
    parent.children.pop(0)
    fence = parent.keys.pop(0)
    root = Node([key], [child, n] if before else [n, child])

    stolen = _new_stolen_tree(v, root, u_rank + 1)
    u_left.refresh_root(root, u_rank, u_rank + 1)
    stolen.left_spine = u_left
    stolen.upper_fence = fence
    u.left_spine = None
    u.consume()

    v_left.truncate_below(u_rank + 1, counters)
    v._size = None
    counters.steals += 1
    if saved is not None:
        saved.extend((n, parent))
    return JoinOutcome(v, stolen=stolen, attach_rank=u_rank)
