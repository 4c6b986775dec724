from bisect import bisect_left, bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil
from time import perf_counter
from typing import Any, Dict, List, Optional, Tuple
from django.conf import settings
import logging

from .core import ABTree, require_ascending
from .counters import WorkCounters
from .exceptions import AugmentationRequiredError, ExperimentConfigError, PreconditionError
from .parallel_join import lightweight_par_join, pairwise_par_join
from .parallel_split import par_split
from .sequential import erase_sorted, preprocess_spines, search_sorted, union_sorted

logger = logging.getLogger(__name__)

INSERT = 'insert'
DELETE = 'delete'

UNIFORM = 'uniform'
DOUBLE_BINARY = 'double_binary'
STRATEGY_CHOICES = [UNIFORM, DOUBLE_BINARY]
JOIN_PHASE_CHOICES = ['ppj', 'pj']


@dataclass
class UpdateBatch:
    """Ascending (key, kind) operations; kind is 'insert' or 'delete'"""
    ops: List[Tuple[Any, str]] = field(default_factory=list)

    def __post_init__(self):
        self.ops = list(self.ops)
        for _, kind in self.ops:
            if kind not in (INSERT, DELETE):
                raise PreconditionError(f"Unknown operation kind: {kind}")
        self._keys = [key for key, _ in self.ops]
        require_ascending(self._keys, "update batch")

    @classmethod
    def inserts(cls, keys) -> 'UpdateBatch':
        return cls([(key, INSERT) for key in keys])

    @classmethod
    def deletes(cls, keys) -> 'UpdateBatch':
        return cls([(key, DELETE) for key in keys])

    @property
    def keys(self) -> List[Any]:
        return self._keys

    def __len__(self):
        return len(self.ops)

    def slice(self, low: Any, high: Any) -> 'UpdateBatch':
        """Operations with low < key <= high; None leaves a side open"""
        start = 0 if low is None else bisect_right(self._keys, low)
        end = len(self._keys) if high is None else bisect_right(self._keys, high)
        return UpdateBatch(self.ops[start:end])

    def split_kinds(self) -> Tuple[List[Any], List[Any]]:
        inserts = [key for key, kind in self.ops if kind == INSERT]
        deletes = [key for key, kind in self.ops if kind == DELETE]
        return inserts, deletes


@dataclass
class SeparatorPartition:
    """Separators and the (low, high] ranges they cut; None is unbounded"""
    separators: List[Any]
    pieces: List[Tuple[Optional[Any], Optional[Any]]]

    @classmethod
    def from_separators(cls, separators: List[Any]) -> 'SeparatorPartition':
        lows = [None] + separators
        highs = separators + [None]
        return cls(list(separators), list(zip(lows, highs)))


def select_uniform(batch: UpdateBatch, workers: int) -> SeparatorPartition:
    """Cut the batch into ceil(|I|/p)-sized chunks"""
    keys = batch.keys
    n = len(keys)
    if workers <= 1 or n == 0:
        return SeparatorPartition.from_separators([])
    chunk = ceil(n / workers)
    separators = [keys[i * chunk - 1] for i in range(1, workers) if i * chunk < n]
    return SeparatorPartition.from_separators(separators)


def _lower_neighbour(x: Any, own: List[Any], idx: int, other: List[Any]) -> Optional[Any]:
    candidates = []
    if idx > 0:
        candidates.append(own[idx - 1])
    j = bisect_left(other, x)
    if j > 0:
        candidates.append(other[j - 1])
    return max(candidates) if candidates else None


def select_double_binary(batch: UpdateBatch, tree: ABTree, workers: int) -> SeparatorPartition:
    """
    Merge batch quantiles with tree quantiles so that no piece holds more than
    ceil(|I|/p) operations or ceil(|T|/p) tree elements.
    """
    if not tree.augmented:
        raise AugmentationRequiredError("Double-binary separators need subtree sizes")
    from_batch = select_uniform(batch, workers).separators
    m = tree.size
    from_tree = []
    if m > 0 and workers > 1:
        for j in range(1, workers):
            key = tree.select_ith(ceil(j * m / workers))
            if not from_tree or from_tree[-1] < key:
                from_tree.append(key)

    # each separator's lower bound is its predecessor across both lists
    ranges = {}
    for own, other in ((from_batch, from_tree), (from_tree, from_batch)):
        for idx, x in enumerate(own):
            ranges[x] = _lower_neighbour(x, own, idx, other)
    separators = sorted(ranges)
    pieces = [(ranges[x], x) for x in separators]
    pieces.append((separators[-1] if separators else None, None))
    return SeparatorPartition(separators, pieces)


def _apply(job: List[Tuple[ABTree, UpdateBatch]]) -> Tuple[List[ABTree], WorkCounters]:
    counters = WorkCounters()
    out = []
    for piece, ops in job:
        inserts, deletes = ops.split_kinds()
        piece = union_sorted(piece, inserts, counters)
        piece = erase_sorted(piece, deletes, counters)
        out.append(piece)
    return out, counters


def _preprocess(tree: ABTree) -> WorkCounters:
    counters = WorkCounters()
    preprocess_spines(tree, counters)
    return counters


def bulk_update(tree: ABTree, batch: UpdateBatch, workers: Optional[int] = None,
                strategy: Optional[str] = None, join_phase: Optional[str] = None,
                seed: int = 0, counters: Optional[WorkCounters] = None,
                timings: Optional[Dict[str, float]] = None) -> ABTree:
    """
    Apply a sorted batch of inserts and deletes: split the tree at separators,
    update every piece on its own and join the pieces back.

    The input tree is consumed.
    """
    workers = workers or settings.ABTREE_WORKERS
    join_phase = join_phase or settings.ABTREE_JOIN_PHASE
    if join_phase not in JOIN_PHASE_CHOICES:
        raise ExperimentConfigError(f"Unknown join phase: {join_phase}")
    counters = counters if counters is not None else WorkCounters()
    if not len(batch):
        return tree
    if strategy is None:
        strategy = DOUBLE_BINARY if tree.augmented and len(batch) < tree.size else UNIFORM
    active = max(1, min(workers, len(batch)))

    started = perf_counter()
    if strategy == DOUBLE_BINARY:
        partition = select_double_binary(batch, tree, active)
    elif strategy == UNIFORM:
        partition = select_uniform(batch, active)
    else:
        raise ExperimentConfigError(f"Unknown separator strategy: {strategy}")
    pieces = par_split(tree, partition.separators, workers, counters)
    split_done = perf_counter()

    jobs = [(piece, batch.slice(low, high)) for piece, (low, high) in zip(pieces, partition.pieces)]
    per_worker = 2 if strategy == DOUBLE_BINARY else 1
    grouped = [jobs[i:i + per_worker] for i in range(0, len(jobs), per_worker)]
    updated = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for trees, task_counters in pool.map(_apply, grouped):
            updated.extend(trees)
            counters.merge(task_counters)
        update_done = perf_counter()
        if join_phase == 'pj':
            live = [t for t in updated if t.root is not None]
            for task_counters in pool.map(_preprocess, live):
                counters.merge(task_counters)
    if join_phase == 'pj':
        result = lightweight_par_join(updated, workers, seed, counters)
    else:
        result = pairwise_par_join(updated, workers, counters)
    finished = perf_counter()

    if timings is not None:
        timings['split_time'] = split_done - started
        timings['update_time'] = update_done - split_done
        timings['join_time'] = finished - update_done
    logger.debug(f"Bulk update of {len(batch)} operations over {len(pieces)} pieces ({strategy}, {join_phase})")
    return result


def bulk_search(tree: ABTree, keys: List[Any], workers: Optional[int] = None,
                counters: Optional[WorkCounters] = None) -> List[Any]:
    """Elements of an ascending key list that are present in tree"""
    keys = list(keys)
    require_ascending(keys, "search batch")
    workers = workers or settings.ABTREE_WORKERS
    if not keys or tree.root is None:
        return []
    chunk = ceil(len(keys) / min(workers, len(keys)))
    slices = [keys[i:i + chunk] for i in range(0, len(keys), chunk)]

    def search(part):
        part_counters = WorkCounters()
        return search_sorted(tree, part, part_counters), part_counters

    found = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for part_found, part_counters in pool.map(search, slices):
            found.extend(part_found)
            if counters is not None:
                counters.merge(part_counters)
    return found
