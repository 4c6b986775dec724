from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple
from django.conf import settings
import logging

from .counters import WorkCounters
from .exceptions import (
    AugmentationRequiredError,
    IndexOutOfRangeError,
    InvalidNodeError,
    OrderViolationError,
    PreconditionError,
)

logger = logging.getLogger(__name__)


class Node:
    """(a,b)-tree node. A leaf stores its elements in ``keys`` and has no children."""
    __slots__ = ('keys', 'children', 'parent', 'size')

    def __init__(self, keys: Optional[List[Any]] = None, children: Optional[List['Node']] = None,
                 parent: Optional['Node'] = None):
        self.keys = keys if keys is not None else []
        self.children = children
        self.parent = parent
        self.size = 0
        if children is not None:
            for child in children:
                child.parent = self
        self.recount()

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def degree(self) -> int:
        return len(self.keys) if self.children is None else len(self.children)

    def recount(self) -> int:
        """Recompute the subtree size from the children"""
        if self.children is None:
            self.size = len(self.keys)
        else:
            self.size = sum(child.size for child in self.children)
        return self.size

    def __repr__(self):
        kind = 'Leaf' if self.is_leaf else 'Node'
        return f"{kind}({self.keys})"


def node_split(n: Node, keep: str = 'left') -> Tuple[Node, Node, Any]:
    """
    Split n into two nodes: the first one takes the first floor(d/2) children.

    ``keep`` names the half that stays in the object ``n``; the other half is a
    fresh node without a parent.

    Returns:
        tuple: (n1, n2, splitter)
    """
    d = n.degree
    if d < 2:
        raise InvalidNodeError(f"Cannot split a node of degree {d}")
    h = d // 2
    if n.children is None:
        left_keys, right_keys = n.keys[:h], n.keys[h:]
        left_children = right_children = None
        splitter = left_keys[-1]
    else:
        splitter = n.keys[h - 1]
        left_keys, right_keys = n.keys[:h - 1], n.keys[h:]
        left_children, right_children = n.children[:h], n.children[h:]

    if keep == 'left':
        n.keys, n.children = left_keys, left_children
        n.recount()
        return n, Node(right_keys, right_children), splitter
    n.keys, n.children = right_keys, right_children
    n.recount()
    return Node(left_keys, left_children), n, splitter


def node_fuse(n1: Node, n2: Node, splitter: Any, into: str = 'left') -> Node:
    """
    Fuse two sibling nodes around a splitter key.

    The result lives in ``n1`` (into='left') or ``n2`` (into='right'); the other
    object is emptied.
    """
    if n1.is_leaf != n2.is_leaf:
        raise InvalidNodeError("Cannot fuse a leaf with an internal node")
    if (n1.keys and splitter < n1.keys[-1]) or (n2.keys and not splitter < n2.keys[0]):
        raise OrderViolationError(f"Splitter {splitter!r} does not separate the fused nodes")

    target, other = (n1, n2) if into == 'left' else (n2, n1)
    if n1.children is None:
        keys, children = n1.keys + n2.keys, None
    else:
        keys = n1.keys + [splitter] + n2.keys
        children = n1.children + n2.children
        for child in other.children:
            child.parent = target
    target.keys, target.children = keys, children
    target.recount()

    other.keys = []
    other.children = None if children is None else []
    other.parent = None
    return target


def iter_keys(node: Optional[Node]) -> Iterator[Any]:
    """In-order elements below node"""
    if node is None:
        return
    if node.children is None:
        yield from node.keys
        return
    for child in node.children:
        yield from iter_keys(child)


def refresh_sizes(marked: Dict[int, Tuple[int, Node]]) -> None:
    """Recount marked nodes bottom-up; ``marked`` maps id(node) to (rank, node)"""
    for _, node in sorted(marked.values(), key=lambda item: item[0]):
        node.recount()


def refresh_root_paths(tree: 'ABTree', nodes: Iterable[Node]) -> int:
    """Recount every node on the root paths of ``nodes``; nodes cut off from root are skipped"""
    marked: Dict[int, Tuple[int, Node]] = {}
    for node in nodes:
        path = [node]
        while path[-1].parent is not None:
            path.append(path[-1].parent)
        if path[-1] is not tree.root:
            continue
        for offset, member in enumerate(reversed(path)):
            marked[id(member)] = (tree.rank - offset, member)
    refresh_sizes(marked)
    return len(marked)


def even_chunks(n: int, a: int, b: int) -> List[Tuple[int, int]]:
    """Split n consecutive items into groups whose sizes all lie in [a, b]"""
    if n <= b:
        return [(0, n)]
    target = (a + b) // 2
    count = max(-(-n // b), min(max(1, round(n / target)), n // a))
    base, extra = divmod(n, count)
    bounds, start = [], 0
    for i in range(count):
        end = start + base + (1 if i < extra else 0)
        bounds.append((start, end))
        start = end
    return bounds


def pack_sorted(keys: List[Any], a: int, b: int,
                leaf_map: Callable = map) -> Tuple[Optional[Node], int]:
    """
    Build a tree bottom-up from strictly ascending keys.

    Returns:
        tuple: (root, rank)
    """
    if not keys:
        return None, 0
    bounds = even_chunks(len(keys), a, b)
    level = list(leaf_map(lambda se: Node(keys[se[0]:se[1]]), bounds))
    maxima = [keys[end - 1] for _, end in bounds]
    rank = 1
    while len(level) > 1:
        next_level, next_maxima = [], []
        for start, end in even_chunks(len(level), a, b):
            next_level.append(Node(maxima[start:end - 1], level[start:end]))
            next_maxima.append(maxima[end - 1])
        level, maxima = next_level, next_maxima
        rank += 1
    return level[0], rank


@dataclass
class ValidationReport:
    """Outcome of a full structural check"""
    violations: List[Tuple[str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, locator: str, rule: str, message: str):
        self.violations.append((locator, rule, message))

    def rules(self) -> List[str]:
        return [rule for _, rule, _ in self.violations]


class ABTree:
    """Weak (a,b)-tree with elements in the leaves and optional subtree sizes"""

    def __init__(self, a: Optional[int] = None, b: Optional[int] = None, augmented: bool = True):
        self.a = a or settings.ABTREE_DEFAULT_A
        self.b = b or settings.ABTREE_DEFAULT_B
        if self.a < 2 or self.b < 2 * self.a:
            raise PreconditionError(f"Need a >= 2 and b >= 2a, got ({self.a}, {self.b})")
        self.augmented = augmented
        self.root: Optional[Node] = None
        self.rank = 0
        self._size: Optional[int] = 0
        self.left_spine = None
        self.right_spine = None
        self.upper_fence = None

    @classmethod
    def from_root(cls, root: Optional[Node], rank: int, a: int, b: int,
                  augmented: bool = True, size: Optional[int] = None) -> 'ABTree':
        tree = cls(a, b, augmented)
        if root is None:
            return tree
        root.parent = None
        tree.root = root
        tree.rank = rank
        if size is not None:
            tree._size = size
        else:
            tree._size = root.size if augmented else None
        return tree

    @classmethod
    def from_keys(cls, keys: Iterable[Any], a: Optional[int] = None, b: Optional[int] = None,
                  augmented: bool = True) -> 'ABTree':
        ordered = sorted(set(keys))
        tree = cls(a, b, augmented)
        tree.root, tree.rank = pack_sorted(ordered, tree.a, tree.b)
        tree._size = len(ordered)
        return tree

    def empty_like(self) -> 'ABTree':
        return ABTree(self.a, self.b, self.augmented)

    @property
    def size(self) -> int:
        if self._size is None:
            self._size = sum(1 for _ in iter_keys(self.root))
        return self._size

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[Any]:
        return iter_keys(self.root)

    def __contains__(self, key) -> bool:
        return self.search(key) is not None

    def __repr__(self):
        return f"ABTree(a={self.a}, b={self.b}, size={self._size}, rank={self.rank})"

    def is_empty(self) -> bool:
        return self.root is None

    def is_preprocessed(self) -> bool:
        return self.left_spine is not None and self.right_spine is not None

    def _invalidate(self):
        self.left_spine = None
        self.right_spine = None
        self.upper_fence = None

    def consume(self):
        """Hand every node over to another tree and leave this handle empty"""
        self.root = None
        self.rank = 0
        self._size = 0
        self._invalidate()

    def min_key(self) -> Any:
        if self.root is None:
            raise PreconditionError("Empty tree has no minimum")
        node = self.root
        while node.children is not None:
            node = node.children[0]
        return node.keys[0]

    def max_key(self) -> Any:
        if self.root is None:
            raise PreconditionError("Empty tree has no maximum")
        node = self.root
        while node.children is not None:
            node = node.children[-1]
        return node.keys[-1]

    def descend(self, key, counters: Optional[WorkCounters] = None) -> List[Node]:
        """Root-to-leaf path towards key"""
        path = [self.root]
        node = self.root
        while node.children is not None:
            node = node.children[bisect_left(node.keys, key)]
            path.append(node)
        if counters is not None:
            counters.visited_nodes += len(path)
        return path

    def search(self, key, counters: Optional[WorkCounters] = None) -> Optional[Any]:
        if self.root is None:
            return None
        leaf = self.descend(key, counters)[-1]
        i = bisect_left(leaf.keys, key)
        if i < len(leaf.keys) and leaf.keys[i] == key:
            return leaf.keys[i]
        return None

    def insert(self, key) -> bool:
        """Insert key; returns False when it is already present"""
        if self.root is None:
            self.root = Node([key])
            self.rank = 1
            self._size = 1
            self._invalidate()
            return True
        path = self.descend(key)
        leaf = path[-1]
        i = bisect_left(leaf.keys, key)
        if i < len(leaf.keys) and leaf.keys[i] == key:
            return False
        leaf.keys.insert(i, key)
        for node in path:
            node.size += 1
        if self._size is not None:
            self._size += 1
        self.overflow(leaf)
        self._invalidate()
        return True

    def delete(self, key) -> bool:
        """Delete key; returns False when it is absent"""
        if self.root is None:
            return False
        path = self.descend(key)
        leaf = path[-1]
        i = bisect_left(leaf.keys, key)
        if i == len(leaf.keys) or leaf.keys[i] != key:
            return False
        del leaf.keys[i]
        for node in path:
            node.size -= 1
        if self._size is not None:
            self._size -= 1
        self.underflow(leaf)
        self._invalidate()
        return True

    def overflow(self, node: Node, counters: Optional[WorkCounters] = None,
                 created: Optional[List[Tuple[int, Node]]] = None, rank: int = 1) -> int:
        """
        Split node and its ancestors while they exceed degree b.

        ``rank`` is the rank of node; every node created is appended to
        ``created`` with its rank.

        Returns:
            int: number of node splits
        """
        splits = 0
        while node.degree > self.b:
            left, right, splitter = node_split(node)
            splits += 1
            if created is not None:
                created.append((rank, right))
            parent = node.parent
            if parent is None:
                self.root = Node([splitter], [left, right])
                self.rank += 1
                if created is not None:
                    created.append((rank + 1, self.root))
                break
            idx = parent.children.index(left)
            parent.keys.insert(idx, splitter)
            parent.children.insert(idx + 1, right)
            right.parent = parent
            node = parent
            rank += 1
        if counters is not None:
            counters.node_splits += splits
        return splits

    def underflow(self, node: Node, counters: Optional[WorkCounters] = None,
                  touched: Optional[List[Tuple[int, Node]]] = None, rank: int = 1) -> int:
        """
        Restore degree >= a above a shrunken node by borrowing or fusing.

        Returns:
            int: number of fuses, each one removing a level of the caller's path
        """
        fuses = 0
        while node.parent is not None and node.degree < self.a:
            parent = node.parent
            idx = parent.children.index(node)
            j = idx - 1 if idx > 0 else idx
            left, right = parent.children[j], parent.children[j + 1]
            sibling = left if idx > 0 else right
            if sibling.degree > self.a:
                _borrow(parent, j, from_left=sibling is left)
                if touched is not None:
                    touched.append((rank, sibling))
                    touched.append((rank, node))
                break
            merged = node_fuse(left, right, parent.keys[j])
            del parent.keys[j]
            del parent.children[j + 1]
            if touched is not None:
                touched.append((rank, merged))
            fuses += 1
            node = parent
            rank += 1

        root = self.root
        if root.children is not None and len(root.children) == 1:
            self.root = root.children[0]
            self.root.parent = None
            self.rank -= 1
        elif root.children is None and not root.keys:
            self.root = None
            self.rank = 0
        return fuses

    def select_ith(self, i: int) -> Any:
        """i-th smallest element, 1-based"""
        if not self.augmented:
            raise AugmentationRequiredError("select_ith needs subtree sizes")
        if not 1 <= i <= self.size:
            raise IndexOutOfRangeError(f"Index {i} outside 1..{self.size}")
        node = self.root
        i -= 1
        while node.children is not None:
            for child in node.children:
                if i < child.size:
                    node = child
                    break
                i -= child.size
        return node.keys[i]

    def clone(self) -> 'ABTree':
        copy = ABTree(self.a, self.b, self.augmented)
        copy.root = _copy_node(self.root)
        copy.rank = self.rank
        copy._size = self._size
        return copy

    def validate(self) -> ValidationReport:
        """Check every structural invariant; violations are reported, never raised"""
        report = ValidationReport()
        if self.root is None:
            if self.rank != 0:
                report.add('root', 'rank', f"Empty tree with rank {self.rank}")
            if self._size not in (0, None):
                report.add('root', 'size', f"Empty tree with size {self._size}")
            return report
        if self.root.parent is not None:
            report.add('root', 'parent', "Root has a parent")

        depths = set()
        count = self._check(self.root, 'root', 1, True, depths, report)[0]
        if len(depths) > 1:
            report.add('root', 'leaf-depth', f"Leaves at depths {sorted(depths)}")
        elif depths and depths.pop() != self.rank:
            report.add('root', 'rank', f"Rank {self.rank} does not match the leaf depth")
        if self._size is not None and self._size != count:
            report.add('root', 'size', f"Tree size {self._size} but {count} elements stored")
        if self.root.children is not None and self.root.degree < min(2, count):
            report.add('root', 'root-degree', f"Root degree {self.root.degree}")
        return report

    def _check(self, node: Node, locator: str, depth: int, is_root: bool,
               depths: set, report: ValidationReport) -> Tuple[int, Any, Any]:
        keys = node.keys
        if any(not keys[i] < keys[i + 1] for i in range(len(keys) - 1)):
            report.add(locator, 'key-order', f"Keys not strictly ascending: {keys}")
        degree = node.degree
        if degree > self.b:
            report.add(locator, 'degree-max', f"Degree {degree} above b={self.b}")
        if not is_root and degree < self.a:
            report.add(locator, 'degree-min', f"Degree {degree} below a={self.a}")

        if node.children is None:
            depths.add(depth)
            if not keys:
                report.add(locator, 'degree-min', "Empty leaf")
            count, low, high = len(keys), keys[0] if keys else None, keys[-1] if keys else None
        else:
            if len(keys) != len(node.children) - 1:
                report.add(locator, 'key-count', f"{len(keys)} keys for {len(node.children)} children")
            count, low, high = 0, None, None
            previous_high = None
            for i, child in enumerate(node.children):
                child_locator = f"{locator}/{i}"
                if child.parent is not node:
                    report.add(child_locator, 'parent', "Parent pointer does not point to the parent")
                child_count, child_low, child_high = self._check(
                    child, child_locator, depth + 1, False, depths, report
                )
                count += child_count
                if child_low is None:
                    continue
                low = child_low if low is None else low
                high = child_high
                if i < len(keys) and not child_high <= keys[i]:
                    report.add(child_locator, 'key-order', f"Element {child_high!r} above router {keys[i]!r}")
                if 0 < i <= len(keys) and not keys[i - 1] < child_low:
                    report.add(child_locator, 'key-order', f"Element {child_low!r} not above router {keys[i - 1]!r}")
                if previous_high is not None and not previous_high < child_low:
                    report.add(child_locator, 'key-order', "Sibling ranges overlap")
                previous_high = child_high
        if self.augmented and node.size != count:
            report.add(locator, 'subtree-size', f"Stored size {node.size}, actual {count}")
        return count, low, high


def _borrow(parent: Node, j: int, from_left: bool):
    """Move one child or element between siblings j and j+1 of parent"""
    left, right = parent.children[j], parent.children[j + 1]
    if left.children is None:
        if from_left:
            right.keys.insert(0, left.keys.pop())
        else:
            left.keys.append(right.keys.pop(0))
        parent.keys[j] = left.keys[-1]
    elif from_left:
        child = left.children.pop()
        router = left.keys.pop()
        right.children.insert(0, child)
        right.keys.insert(0, parent.keys[j])
        parent.keys[j] = router
        child.parent = right
    else:
        child = right.children.pop(0)
        router = right.keys.pop(0)
        left.children.append(child)
        left.keys.append(parent.keys[j])
        parent.keys[j] = router
        child.parent = left
    left.recount()
    right.recount()


def _copy_node(node: Optional[Node]) -> Optional[Node]:
    if node is None:
        return None
    if node.children is None:
        return Node(list(node.keys))
    return Node(list(node.keys), [_copy_node(child) for child in node.children])


def require_ascending(keys: List[Any], what: str = "sequence"):
    for i in range(len(keys) - 1):
        if not keys[i] < keys[i + 1]:
            raise PreconditionError(f"The {what} is not strictly ascending at position {i + 1}")


def require_compatible(t1: ABTree, t2: ABTree):
    if (t1.a, t1.b) != (t2.a, t2.b):
        raise PreconditionError(f"Trees have different parameters ({t1.a}, {t1.b}) and ({t2.a}, {t2.b})")
