"""
Sequential building blocks: finger-guided bulk updates, join and split.
"""
from bisect import bisect_left, bisect_right
from typing import Any, Dict, Iterable, List, Optional, Tuple
import logging

from .core import (
    ABTree,
    Node,
    node_fuse,
    node_split,
    refresh_root_paths,
    refresh_sizes,
    require_ascending,
    require_compatible,
)
from .counters import WorkCounters
from .exceptions import OrderViolationError, PreconditionError
from .spine_join import join2_preprocessed
from .spines import LEFT, RIGHT, build_spine_stacks, spine_nodes

logger = logging.getLogger(__name__)


class FingerStack:
    """Root-to-leaf path kept between consecutive keys of an ascending batch"""

    def __init__(self, tree: ABTree, counters: Optional[WorkCounters] = None, track: bool = False):
        self.tree = tree
        self.counters = counters
        self.path: List[Node] = []
        self.highs: List[Any] = []
        self.touched: Optional[Dict[int, Tuple[int, Node]]] = {} if track else None

    @property
    def leaf(self) -> Node:
        return self.path[-1]

    def clear(self):
        self.path = []
        self.highs = []

    def truncate(self, levels: int):
        """Forget the lowest ``levels`` entries of the path"""
        if levels <= 0:
            return
        if levels >= len(self.path):
            self.clear()
            return
        del self.path[-levels:]
        del self.highs[-levels:]

    def record(self, nodes: Optional[List[Tuple[int, Node]]]):
        if self.touched is None or not nodes:
            return
        for rank, node in nodes:
            self.touched[id(node)] = (rank, node)

    def _push(self, node: Node, high: Any):
        self.path.append(node)
        self.highs.append(high)
        if self.counters is not None:
            self.counters.visited_nodes += 1
        if self.touched is not None:
            self.touched[id(node)] = (self.tree.rank - len(self.path) + 1, node)

    def seek(self, key):
        """Move the finger to the leaf whose range holds key; keys must arrive ascending"""
        if not self.path:
            self._push(self.tree.root, None)
        else:
            while len(self.path) > 1 and self.highs[-1] is not None and key > self.highs[-1]:
                self.path.pop()
                self.highs.pop()
        node, high = self.path[-1], self.highs[-1]
        while node.children is not None:
            j = bisect_left(node.keys, key)
            if j < len(node.keys):
                high = node.keys[j]
            node = node.children[j]
            self._push(node, high)
        return node


def union_sorted(tree: ABTree, keys: Iterable[Any], counters: Optional[WorkCounters] = None) -> ABTree:
    """Insert an ascending batch into tree, walking a finger from key to key"""
    keys = list(keys)
    require_ascending(keys, "insertion batch")
    if not keys:
        return tree
    start = 0
    if tree.root is None:
        tree.insert(keys[0])
        start = 1

    finger = FingerStack(tree, counters, track=tree.augmented)
    for key in keys[start:]:
        leaf = finger.seek(key)
        i = bisect_left(leaf.keys, key)
        if i < len(leaf.keys) and leaf.keys[i] == key:
            continue
        leaf.keys.insert(i, key)
        if tree._size is not None:
            tree._size += 1
        if leaf.degree > tree.b:
            root = tree.root
            created = [] if finger.touched is not None else None
            splits = tree.overflow(leaf, counters, created)
            finger.record(created)
            if tree.root is not root:
                finger.clear()
            else:
                finger.truncate(splits)

    if finger.touched:
        refresh_sizes(finger.touched)
    tree._invalidate()
    return tree


def erase_sorted(tree: ABTree, keys: Iterable[Any], counters: Optional[WorkCounters] = None) -> ABTree:
    """Delete an ascending batch from tree; absent keys are skipped"""
    keys = list(keys)
    require_ascending(keys, "deletion batch")
    finger = FingerStack(tree, counters, track=tree.augmented)
    for key in keys:
        if tree.root is None:
            break
        leaf = finger.seek(key)
        i = bisect_left(leaf.keys, key)
        if i == len(leaf.keys) or leaf.keys[i] != key:
            continue
        del leaf.keys[i]
        if tree._size is not None:
            tree._size -= 1
        if leaf.degree < tree.a:
            root = tree.root
            touched = [] if finger.touched is not None else None
            fuses = tree.underflow(leaf, counters, touched)
            finger.record(touched)
            if tree.root is not root:
                finger.clear()
            else:
                finger.truncate(fuses)

    if finger.touched:
        live = {key: entry for key, entry in finger.touched.items()
                if entry[1].parent is not None or entry[1] is tree.root}
        refresh_sizes(live)
    tree._invalidate()
    return tree


def search_sorted(tree: ABTree, keys: Iterable[Any], counters: Optional[WorkCounters] = None) -> List[Any]:
    """Elements of an ascending batch that are present in tree"""
    keys = list(keys)
    require_ascending(keys, "search batch")
    if tree.root is None:
        return []
    finger = FingerStack(tree, counters)
    found = []
    for key in keys:
        leaf = finger.seek(key)
        i = bisect_left(leaf.keys, key)
        if i < len(leaf.keys) and leaf.keys[i] == key:
            found.append(key)
    return found


def join2(t1: ABTree, t2: ABTree, splitter: Any = None,
          counters: Optional[WorkCounters] = None) -> ABTree:
    """
    Join two trees where every element of t1 is below every element of t2.

    ``splitter`` may be any key between the two ranges; it defaults to max(t1).
    Both inputs are consumed; the returned object is one of them.
    """
    require_compatible(t1, t2)
    if t2.root is None:
        return t1
    if t1.root is None:
        return t2
    if splitter is None:
        splitter = t1.max_key()
        if not splitter < t2.min_key():
            raise OrderViolationError("Left tree reaches into the range of the right tree")

    augmented = t1.augmented and t2.augmented
    size = t1._size + t2._size if t1._size is not None and t2._size is not None else None
    if t1.rank >= t2.rank:
        result, other = _attach_right(t1, t2, splitter, augmented, counters), t2
    else:
        result, other = _attach_left(t1, t2, splitter, augmented, counters), t1
    result.augmented = augmented
    result._size = size
    result._invalidate()
    other.consume()
    return result


def _add_size_upward(node: Optional[Node], delta: int):
    while node is not None:
        node.size += delta
        node = node.parent


def _attach_right(u: ABTree, v: ABTree, splitter, augmented: bool,
                  counters: Optional[WorkCounters]) -> ABTree:
    steps = u.rank - v.rank
    n = u.root
    for _ in range(steps):
        n = n.children[-1]
    if counters is not None:
        counters.join_steps += steps + 1
        counters.visited_nodes += steps + 1

    v_root = v.root
    v_size = v_root.size
    if n.degree < u.a or v_root.degree < u.a:
        node_fuse(n, v_root, splitter)
        if augmented:
            _add_size_upward(n.parent, v_size)
        splits = u.overflow(n, counters)
    elif n.parent is None:
        u.root = Node([splitter], [n, v_root])
        u.rank += 1
        splits = 0
    else:
        parent = n.parent
        parent.keys.append(splitter)
        parent.children.append(v_root)
        v_root.parent = parent
        if augmented:
            _add_size_upward(parent, v_size)
        splits = u.overflow(parent, counters)
    if counters is not None:
        counters.join_steps += splits
    return u


def _attach_left(u: ABTree, v: ABTree, splitter, augmented: bool,
                 counters: Optional[WorkCounters]) -> ABTree:
    steps = v.rank - u.rank
    n = v.root
    for _ in range(steps):
        n = n.children[0]
    if counters is not None:
        counters.join_steps += steps + 1
        counters.visited_nodes += steps + 1

    u_root = u.root
    u_size = u_root.size
    if n.degree < v.a or u_root.degree < v.a:
        node_fuse(u_root, n, splitter, into='right')
        if augmented:
            _add_size_upward(n.parent, u_size)
        splits = v.overflow(n, counters)
    else:
        parent = n.parent
        parent.keys.insert(0, splitter)
        parent.children.insert(0, u_root)
        u_root.parent = parent
        if augmented:
            _add_size_upward(parent, u_size)
        splits = v.overflow(parent, counters)
    if counters is not None:
        counters.join_steps += splits
    return v


def fragment(tree: ABTree, children: List[Node], keys: List[Any], rank: int) -> ABTree:
    """Tree made of consecutive children of a rank-``rank`` node of tree"""
    if not children:
        return tree.empty_like()
    if len(children) == 1:
        return ABTree.from_root(children[0], rank - 1, tree.a, tree.b, tree.augmented)
    return ABTree.from_root(Node(list(keys), list(children)), rank, tree.a, tree.b, tree.augmented)


def leaf_fragment(tree: ABTree, keys: List[Any]) -> ABTree:
    if not keys:
        return tree.empty_like()
    return ABTree.from_root(Node(list(keys)), 1, tree.a, tree.b, tree.augmented)


def split_at(tree: ABTree, x: Any, counters: Optional[WorkCounters] = None) -> Tuple[ABTree, ABTree]:
    """
    Split tree into the elements <= x and the elements > x.

    The input tree is consumed.
    """
    if tree.root is None:
        return tree.empty_like(), tree.empty_like()
    path = []
    node = tree.root
    while node.children is not None:
        j = bisect_left(node.keys, x)
        path.append((node, j))
        node = node.children[j]
    if counters is not None:
        counters.visited_nodes += len(path) + 1
    cut = bisect_right(node.keys, x)

    left = leaf_fragment(tree, node.keys[:cut])
    right = leaf_fragment(tree, node.keys[cut:])
    for depth in range(len(path) - 1, -1, -1):
        parent, j = path[depth]
        rank = tree.rank - depth
        if j > 0:
            piece = fragment(tree, parent.children[:j], parent.keys[:j - 1], rank)
            left = join2(piece, left, splitter=parent.keys[j - 1], counters=counters)
        if j < len(parent.children) - 1:
            piece = fragment(tree, parent.children[j + 1:], parent.keys[j + 1:], rank)
            right = join2(right, piece, splitter=parent.keys[j], counters=counters)
    tree.consume()
    return left, right


def _split_on_spine(tree: ABTree, node: Node, side: str, counters: Optional[WorkCounters]):
    """Split a spine node; the half that stays on the spine keeps the node object"""
    first, second, splitter = node_split(node, keep='right' if side == RIGHT else 'left')
    parent = node.parent
    if parent is None:
        tree.root = Node([splitter], [first, second])
        tree.rank += 1
    else:
        idx = parent.children.index(node)
        if side == RIGHT:
            parent.children.insert(idx, first)
            first.parent = parent
        else:
            parent.children.insert(idx + 1, second)
            second.parent = parent
        parent.keys.insert(idx, splitter)
    if counters is not None:
        counters.preprocess_splits += 1
        counters.node_splits += 1


def preprocess_spines(tree: ABTree, counters: Optional[WorkCounters] = None) -> ABTree:
    """
    Split every spine node of degree >= b, then build both spine stacks.

    Afterwards every spine node has degree at most b-1, apart from a root
    created by the last split.
    """
    for side in (RIGHT, LEFT):
        for node in spine_nodes(tree, side):
            if node.degree >= tree.b:
                _split_on_spine(tree, node, side, counters)
    tree.left_spine, tree.right_spine = build_spine_stacks(tree)
    tree.upper_fence = None
    return tree


def join_many_seq(trees: List[ABTree], counters: Optional[WorkCounters] = None,
                  saved: Optional[List[Node]] = None) -> ABTree:
    """
    Join preprocessed trees left to right with spine-stack joins.

    Subtree sizes are repaired once at the end unless ``saved`` is given, in
    which case the stale attach nodes are handed back through it.
    """
    live = [t for t in trees if t.root is not None]
    if not live:
        return trees[0] if trees else ABTree()
    for t in live:
        if not t.is_preprocessed():
            raise PreconditionError("join_many_seq needs preprocessed trees")
    touched = saved if saved is not None else []
    result = live[0]
    for t in live[1:]:
        result = join2_preprocessed(result, t, counters=counters, saved=touched)
    if saved is None and result.augmented:
        refresh_root_paths(result, touched)
    return result
