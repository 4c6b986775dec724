"""
Joins of many trees: pairwise rounds, the lightweight randomized join and
the grouped join built on top of it.
"""
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import ceil, log2
from typing import Dict, List, Optional, Tuple
from django.conf import settings
import numpy as np
import logging

from .core import ABTree, Node
from .counters import WorkCounters
from .exceptions import InvariantError, PreconditionError
from .sequential import join2, join_many_seq, preprocess_spines
from .spine_join import join_preprocessed

logger = logging.getLogger(__name__)

INFINITE_RANK = float('inf')


def coin_flips(seed: int, iteration: int, count: int) -> List[int]:
    """Fair coins for one iteration, reproducible from (seed, iteration)"""
    key = np.array([seed, iteration], dtype=np.uint64)
    generator = np.random.Generator(np.random.Philox(key=key))
    return generator.integers(0, 2, size=count).tolist()


def initiates_join(position: int, ranks: List[int], coins: List[int]) -> bool:
    """
    Whether the tree at position joins its left neighbour this iteration.

    Position 0 has no left neighbour; when it initiates it joins to the right.
    """
    rank = ranks[position]
    left = ranks[position - 1] if position > 0 else INFINITE_RANK
    right = ranks[position + 1] if position + 1 < len(ranks) else INFINITE_RANK
    coin = coins[position]
    previous = coins[position - 1] if position > 0 else 0
    if left > rank and rank < right:
        return True
    if left > rank and rank == right:
        return coin == 1
    if left == rank and rank <= right:
        return previous == 0 and coin == 1
    return False


def plain_members(ranks: List[int]) -> List[int]:
    """Positions inside maximal runs of at least two equal adjacent ranks"""
    members = []
    start = 0
    for i in range(1, len(ranks) + 1):
        if i == len(ranks) or ranks[i] != ranks[start]:
            if i - start >= 2:
                members.extend(range(start, i))
            start = i
    return members


@dataclass
class JoinRoundState:
    """Bookkeeping for a lightweight parallel join"""
    seed: int
    trees: List[ABTree]
    labels: List[int]
    iteration: int = 0
    attach_log: Dict[int, List[int]] = field(default_factory=lambda: defaultdict(list))
    rounds: List[Dict] = field(default_factory=list)

    @property
    def ranks(self) -> List[int]:
        return [t.rank for t in self.trees]

    def plain_shrinkage(self) -> float:
        """Mean share of plain members that initiated a join, over rounds with a plain"""
        shares = [r['plain_joins'] / r['plain_size'] for r in self.rounds if r['plain_size']]
        return sum(shares) / len(shares) if shares else 1.0


def _run_receiver(job) -> Tuple[int, Dict[int, Optional[ABTree]], ABTree, WorkCounters, List[Node], List[int]]:
    """
    Perform the joins aimed at one receiver: first from its right neighbour,
    then from position 0 on its left.
    """
    receiver_pos, receiver, right_pos, right, left_pos, left = job
    counters = WorkCounters()
    saved: List[Node] = []
    attach_ranks = []
    replaced: Dict[int, Optional[ABTree]] = {}
    current = receiver

    if right is not None:
        outcome = join_preprocessed(current, right, counters=counters, saved=saved, steal=True)
        current = outcome.tree
        replaced[right_pos] = outcome.stolen
        if outcome.stolen is None:
            attach_ranks.append(outcome.attach_rank)
    if left is not None:
        outcome = join_preprocessed(left, current, counters=counters, saved=saved, steal=True)
        current = outcome.tree
        replaced[left_pos] = outcome.stolen
    return receiver_pos, replaced, current, counters, saved, attach_ranks


def lightweight_par_join(trees: List[ABTree], workers: Optional[int] = None, seed: int = 0,
                         counters: Optional[WorkCounters] = None,
                         state: Optional[JoinRoundState] = None) -> ABTree:
    """
    Join an ordered sequence of preprocessed trees with random local joins.

    Each iteration, every tree decides from its neighbours' ranks and two coin
    flips whether to join its left neighbour. Joins aimed at different
    receivers run concurrently. Subtree sizes are repaired once at the end
    when every input was augmented.
    """
    workers = workers or settings.ABTREE_WORKERS
    counters = counters if counters is not None else WorkCounters()
    live = [t for t in trees if t.root is not None]
    if not live:
        return trees[0] if trees else ABTree()
    for t in live:
        if not t.is_preprocessed():
            raise PreconditionError("lightweight_par_join needs preprocessed trees")

    total = sum(t.size for t in live)
    augmented = all(t.augmented for t in live)
    if state is None:
        state = JoinRoundState(seed, live, list(range(len(live))))
    else:
        state.seed, state.trees, state.labels = seed, live, list(range(len(live)))
    saved: List[Node] = []
    limit = 64 * (len(live).bit_length() + max(t.rank for t in live) + 4)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        while len(state.trees) > 1:
            state.iteration += 1
            if state.iteration > limit:
                raise InvariantError(f"Parallel join did not finish within {limit} iterations")
            ranks = state.ranks
            coins = coin_flips(seed, state.iteration, len(ranks))
            initiators = [i for i in range(len(ranks)) if initiates_join(i, ranks, coins)]
            for i, j in zip(initiators, initiators[1:]):
                if j == i + 1:
                    raise InvariantError(f"Adjacent trees {i} and {j} both initiated a join")

            plain = set(plain_members(ranks))
            jobs = _receiver_jobs(state.trees, initiators)
            results = list(pool.map(_run_receiver, jobs))

            next_trees = list(state.trees)
            for receiver_pos, replaced, merged, task_counters, task_saved, attach_ranks in results:
                next_trees[receiver_pos] = merged
                for pos, stolen in replaced.items():
                    next_trees[pos] = stolen
                counters.merge(task_counters)
                saved.extend(task_saved)
                state.attach_log[state.labels[receiver_pos]].extend(attach_ranks)

            keep = [i for i, t in enumerate(next_trees) if t is not None]
            state.rounds.append({
                'iteration': state.iteration,
                'trees': len(ranks),
                'joins': len(initiators),
                'plain_size': len(plain),
                'plain_joins': len(plain.intersection(initiators)),
            })
            state.trees = [next_trees[i] for i in keep]
            state.labels = [state.labels[i] for i in keep]
            logger.debug(f"Join iteration {state.iteration}: {len(ranks)} -> {len(state.trees)} trees")

    counters.iterations += state.iteration
    result = state.trees[0]
    result._size = total
    result.augmented = augmented
    if augmented:
        repair_subtree_sizes(result, saved, workers)
    logger.info(f"Joined {len(live)} trees in {state.iteration} iterations")
    return result


def _receiver_jobs(trees: List[ABTree], initiators: List[int]) -> List[Tuple]:
    by_receiver: Dict[int, Dict[str, int]] = defaultdict(dict)
    for i in initiators:
        if i == 0:
            by_receiver[1]['left'] = 0
        else:
            by_receiver[i - 1]['right'] = i
    jobs = []
    for receiver, joiners in sorted(by_receiver.items()):
        right_pos = joiners.get('right')
        left_pos = joiners.get('left')
        jobs.append((
            receiver, trees[receiver],
            right_pos, trees[right_pos] if right_pos is not None else None,
            left_pos, trees[left_pos] if left_pos is not None else None,
        ))
    return jobs


def repair_subtree_sizes(tree: ABTree, saved: List[Node], workers: Optional[int] = None) -> int:
    """
    Recompute subtree sizes on every root path of the saved nodes.

    Nodes no longer reachable from the root are ignored. Levels are refreshed
    bottom-up, each level in parallel.

    Returns:
        int: number of nodes recounted
    """
    if tree.root is None or not saved:
        return 0
    workers = workers or settings.ABTREE_WORKERS

    def root_path(node: Node) -> List[Node]:
        path = [node]
        while path[-1].parent is not None:
            path.append(path[-1].parent)
        return path if path[-1] is tree.root else []

    levels: Dict[int, Dict[int, Node]] = defaultdict(dict)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for path in pool.map(root_path, saved):
            for offset, node in enumerate(reversed(path)):
                levels[tree.rank - offset][id(node)] = node
        for rank in sorted(levels):
            list(pool.map(Node.recount, levels[rank].values()))
    return sum(len(level) for level in levels.values())


def _join_pair(pair: Tuple[ABTree, ABTree]) -> Tuple[ABTree, WorkCounters]:
    counters = WorkCounters()
    return join2(pair[0], pair[1], counters=counters), counters


def pairwise_par_join(trees: List[ABTree], workers: Optional[int] = None,
                      counters: Optional[WorkCounters] = None) -> ABTree:
    """Join neighbours pairwise in rounds until one tree is left"""
    workers = workers or settings.ABTREE_WORKERS
    if not trees:
        return ABTree()
    current = list(trees)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while len(current) > 1:
            pairs = [(current[i], current[i + 1]) for i in range(0, len(current) - 1, 2)]
            joined = []
            for tree, task_counters in pool.map(_join_pair, pairs):
                joined.append(tree)
                if counters is not None:
                    counters.merge(task_counters)
            if len(current) % 2:
                joined.append(current[-1])
            current = joined
            if counters is not None:
                counters.rounds += 1
    return current[0]


def _preprocess(tree: ABTree) -> WorkCounters:
    counters = WorkCounters()
    preprocess_spines(tree, counters)
    return counters


def _join_group(group: List[ABTree]) -> Tuple[ABTree, WorkCounters]:
    counters = WorkCounters()
    return join_many_seq(group, counters), counters


def optimal_par_join(trees: List[ABTree], workers: Optional[int] = None, seed: int = 0,
                     counters: Optional[WorkCounters] = None) -> ABTree:
    """
    Grouped join: groups of ceil(log2 k) trees are joined sequentially in
    parallel, the group results are joined with lightweight_par_join.

    Subtree sizes are not maintained.
    """
    workers = workers or settings.ABTREE_WORKERS
    counters = counters if counters is not None else WorkCounters()
    live = [t for t in trees if t.root is not None]
    if not live:
        return trees[0] if trees else ABTree()
    total = sum(t.size for t in live)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for task_counters in pool.map(_preprocess, live):
            counters.merge(task_counters)
        group_size = max(1, ceil(log2(len(live)))) if len(live) > 1 else 1
        groups = [live[i:i + group_size] for i in range(0, len(live), group_size)]
        partial = []
        for tree, task_counters in pool.map(_join_group, groups):
            tree.augmented = False
            partial.append(tree)
            counters.merge(task_counters)
        for task_counters in pool.map(_preprocess, partial):
            counters.merge(task_counters)

    result = partial[0] if len(partial) == 1 else lightweight_par_join(partial, workers, seed, counters)
    result.augmented = False
    result._size = total
    return result
