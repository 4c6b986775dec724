from concurrent.futures import ThreadPoolExecutor
from itertools import accumulate
from typing import Any, Iterable, List, Optional
from django.conf import settings
import logging

from .bulk import UpdateBatch, bulk_search, bulk_update
from .core import ABTree, iter_keys, pack_sorted, require_ascending, require_compatible
from .counters import WorkCounters

logger = logging.getLogger(__name__)


def to_sorted(tree: ABTree, workers: Optional[int] = None) -> List[Any]:
    """All elements in ascending order; subtrees of the root are read in parallel"""
    workers = workers or settings.ABTREE_WORKERS
    root = tree.root
    if root is None:
        return []
    if root.children is None:
        return list(root.keys)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda child: list(iter_keys(child)), root.children))
    if not tree.augmented:
        return [key for part in parts for key in part]

    out: List[Any] = [None] * root.size
    offsets = [0] + list(accumulate(child.size for child in root.children))
    for start, part in zip(offsets, parts):
        out[start:start + len(part)] = part
    return out


def build_from_sorted(keys: Iterable[Any], workers: Optional[int] = None, a: Optional[int] = None,
                      b: Optional[int] = None, augmented: bool = True) -> ABTree:
    """Pack an ascending sequence into a fresh tree, leaves created in parallel"""
    keys = list(keys)
    require_ascending(keys)
    workers = workers or settings.ABTREE_WORKERS
    tree = ABTree(a, b, augmented)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        tree.root, tree.rank = pack_sorted(keys, tree.a, tree.b, leaf_map=pool.map)
    tree._size = len(keys)
    return tree


def _ordered(u: ABTree, t: ABTree):
    """(smaller, larger); ties keep the argument order"""
    return (u, t) if len(u) <= len(t) else (t, u)


def set_union(u: ABTree, t: ABTree, workers: Optional[int] = None,
              counters: Optional[WorkCounters] = None) -> ABTree:
    """Elements of either tree; the smaller one is inserted into the larger one"""
    require_compatible(u, t)
    smaller, larger = _ordered(u, t)
    keys = to_sorted(smaller, workers)
    return bulk_update(larger, UpdateBatch.inserts(keys), workers, counters=counters)


def set_intersection(u: ABTree, t: ABTree, workers: Optional[int] = None,
                     counters: Optional[WorkCounters] = None) -> ABTree:
    """Elements in both trees, as a new tree"""
    require_compatible(u, t)
    smaller, larger = _ordered(u, t)
    found = bulk_search(larger, to_sorted(smaller, workers), workers, counters)
    return build_from_sorted(found, workers, u.a, u.b, u.augmented and t.augmented)


def set_difference(t: ABTree, u: ABTree, workers: Optional[int] = None,
                   counters: Optional[WorkCounters] = None) -> ABTree:
    """Elements of t that are not in u; t is consumed"""
    require_compatible(t, u)
    if len(t) >= len(u):
        doomed = to_sorted(u, workers)
    else:
        doomed = bulk_search(u, to_sorted(t, workers), workers, counters)
    return bulk_update(t, UpdateBatch.deletes(doomed), workers, counters=counters)


def set_symmetric_difference(u: ABTree, t: ABTree, workers: Optional[int] = None,
                             counters: Optional[WorkCounters] = None) -> ABTree:
    """Elements in exactly one of the trees; both inputs are left intact"""
    left = set_difference(u.clone(), t, workers, counters)
    right = set_difference(t.clone(), u, workers, counters)
    return set_union(left, right, workers, counters)
