"""
Split a tree at many separators at once.

Workers first locate the leaf of their separator, then each worker builds
the piece between two consecutive separators from the two root-to-leaf
paths, and finally the path nodes are released.
"""
from bisect import bisect_left, bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil
from typing import Any, List, Optional, Tuple
from django.conf import settings
import logging

from .core import ABTree, Node, require_ascending
from .counters import WorkCounters
from .exceptions import PreconditionError
from .sequential import fragment, join2, leaf_fragment, split_at

logger = logging.getLogger(__name__)


@dataclass
class SplitTask:
    """One separator's root-to-leaf path and where its leaf is cut"""
    worker: int
    separator: Any
    path: List[Tuple[Node, int]] = field(default_factory=list)
    leaf: Optional[Node] = None
    cut: int = 0
    below_min: bool = False
    counters: WorkCounters = field(default_factory=WorkCounters)


def edge_task(tree: ABTree, worker: int, leftmost: bool) -> SplitTask:
    """Path along the left spine (nothing kept) or the right spine (everything kept)"""
    task = SplitTask(worker, None, below_min=leftmost)
    node = tree.root
    while node.children is not None:
        j = 0 if leftmost else len(node.children) - 1
        task.path.append((node, j))
        node = node.children[j]
    task.leaf = node
    task.cut = 0 if leftmost else len(node.keys)
    return task


def locate_leaf_le(tree: ABTree, separator: Any, worker: int = 0) -> SplitTask:
    """Path to the leaf holding the largest element <= separator"""
    if tree.root is None:
        raise PreconditionError("Cannot locate a leaf in an empty tree")
    task = SplitTask(worker, separator)
    path = task.path
    node = tree.root
    while node.children is not None:
        j = bisect_left(node.keys, separator)
        path.append((node, j))
        node = node.children[j]
    task.counters.visited_nodes += len(path) + 1
    cut = bisect_right(node.keys, separator)
    if cut > 0:
        task.leaf, task.cut = node, cut
        return task

    # everything in this leaf is larger; back up to the previous leaf
    while path and path[-1][1] == 0:
        path.pop()
    if not path:
        leftmost = edge_task(tree, worker, leftmost=True)
        leftmost.separator = separator
        return leftmost
    node, j = path.pop()
    path.append((node, j - 1))
    child = node.children[j - 1]
    while child.children is not None:
        path.append((child, len(child.children) - 1))
        child = child.children[-1]
        task.counters.visited_nodes += 1
    task.leaf, task.cut = child, len(child.keys)
    return task


def _elements_above(tree: ABTree, task: SplitTask, fork_depth: int, counters: WorkCounters) -> ABTree:
    """Elements right of the task's path below the fork"""
    result = leaf_fragment(tree, task.leaf.keys[task.cut:])
    for depth in range(len(task.path) - 1, fork_depth, -1):
        node, j = task.path[depth]
        if j == len(node.children) - 1:
            continue
        piece = fragment(tree, node.children[j + 1:], node.keys[j + 1:], tree.rank - depth)
        result = join2(result, piece, splitter=node.keys[j], counters=counters)
    return result


def _elements_below(tree: ABTree, task: SplitTask, fork_depth: int, counters: WorkCounters) -> ABTree:
    """Elements left of the task's path (and at most its separator) below the fork"""
    result = leaf_fragment(tree, task.leaf.keys[:task.cut])
    for depth in range(len(task.path) - 1, fork_depth, -1):
        node, j = task.path[depth]
        if j == 0:
            continue
        piece = fragment(tree, node.children[:j], node.keys[:j - 1], tree.rank - depth)
        result = join2(piece, result, splitter=node.keys[j - 1], counters=counters)
    return result


def build_piece(tree: ABTree, low: SplitTask, high: SplitTask,
                counters: Optional[WorkCounters] = None) -> ABTree:
    """Elements in (low.separator, high.separator] as a tree of their own"""
    counters = counters if counters is not None else WorkCounters()
    fork_depth = next(
        (d for d in range(len(low.path)) if low.path[d][1] != high.path[d][1]),
        None,
    )
    if fork_depth is None:
        return leaf_fragment(tree, low.leaf.keys[low.cut:high.cut])

    fork, j_low = low.path[fork_depth]
    j_high = high.path[fork_depth][1]
    parts = [
        (_elements_above(tree, low, fork_depth, counters), None),
        (fragment(tree, fork.children[j_low + 1:j_high], fork.keys[j_low + 1:j_high - 1],
                  tree.rank - fork_depth), fork.keys[j_low]),
        (_elements_below(tree, high, fork_depth, counters), fork.keys[j_high - 1]),
    ]
    result = tree.empty_like()
    for part, splitter in parts:
        if part.root is None:
            continue
        if result.root is None:
            result = part
        else:
            result = join2(result, part, splitter=splitter, counters=counters)
    return result


def _release(tasks: List[SplitTask]):
    for task in tasks:
        for node, _ in task.path:
            node.keys = []
            node.children = []
            node.parent = None
        task.leaf.keys = []


def _split_once(tree: ABTree, separators: List[Any], workers: int,
                counters: Optional[WorkCounters]) -> List[ABTree]:
    with ThreadPoolExecutor(max_workers=workers) as pool:
        located = list(pool.map(
            lambda item: locate_leaf_le(tree, item[1], worker=item[0] + 1),
            enumerate(separators),
        ))
        bounds = [edge_task(tree, 0, leftmost=True)] + located + [
            edge_task(tree, len(separators) + 1, leftmost=False)
        ]
        piece_counters = [WorkCounters() for _ in range(len(bounds) - 1)]
        pieces = list(pool.map(
            lambda i: build_piece(tree, bounds[i], bounds[i + 1], piece_counters[i]),
            range(len(bounds) - 1),
        ))
    _release(bounds)
    if counters is not None:
        counters.merge_all(task.counters for task in bounds)
        counters.merge_all(piece_counters)
    tree.consume()
    return pieces


def _split_sequentially(job: Tuple[ABTree, List[Any]]) -> Tuple[List[ABTree], WorkCounters]:
    tree, separators = job
    counters = WorkCounters()
    pieces = []
    for separator in separators:
        left, tree = split_at(tree, separator, counters)
        pieces.append(left)
    pieces.append(tree)
    return pieces, counters


def par_split(tree: ABTree, separators: List[Any], workers: Optional[int] = None,
              counters: Optional[WorkCounters] = None) -> List[ABTree]:
    """
    Split tree at ascending separators into len(separators)+1 pieces.

    Piece i holds the elements in (s_{i-1}, s_i]. With more pieces than
    workers, every ceil(k/p)-th separator is split in parallel and each part
    is then split sequentially at the separators it contains.
    The input tree is consumed.
    """
    separators = list(separators)
    require_ascending(separators, "separator sequence")
    workers = workers or settings.ABTREE_WORKERS
    if not separators:
        return [tree]
    if tree.root is None:
        return [tree.empty_like() for _ in range(len(separators) + 1)]

    parts = len(separators) + 1
    if parts <= workers:
        return _split_once(tree, separators, workers, counters)

    group = ceil(parts / workers)
    coarse_idx = list(range(group - 1, len(separators), group))
    if coarse_idx:
        coarse = _split_once(tree, [separators[i] for i in coarse_idx], workers, counters)
    else:
        coarse = [tree]
    limits = [-1] + coarse_idx + [len(separators)]
    jobs = [(coarse[i], separators[limits[i] + 1:limits[i + 1]]) for i in range(len(coarse))]
    pieces = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for group_pieces, task_counters in pool.map(_split_sequentially, jobs):
            pieces.extend(group_pieces)
            if counters is not None:
                counters.merge(task_counters)
    logger.debug(f"Split into {len(pieces)} pieces with {len(coarse)} parallel parts")
    return pieces
