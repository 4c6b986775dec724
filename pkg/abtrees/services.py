from math import ceil
from pathlib import Path
from time import perf_counter
from typing import Any, Dict, List, Optional, Tuple
from django.conf import settings
from django.utils import timezone
import pandas as pd
import logging

from .bulk import DOUBLE_BINARY, UNIFORM, UpdateBatch, bulk_update
from .core import ABTree
from .counters import WorkCounters
from .exceptions import ExperimentConfigError
from .keygen import KeyState, gen_keys
from .parallel_join import lightweight_par_join, optimal_par_join, pairwise_par_join
from .parallel_split import par_split
from .sequential import join2, preprocess_spines, split_at, union_sorted
from .set_ops import build_from_sorted, set_difference, set_intersection, set_symmetric_difference, set_union
from .validators import (
    BULK_ALGORITHMS,
    JOIN_ALGORITHMS,
    SET_ALGORITHMS,
    ExperimentConfigValidator,
)

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [
    'iteration', 'algo', 'dist', 'tree_size', 'bulk_size', 'workers', 'seed',
    'wall_time', 'split_time', 'update_time', 'join_time',
    'visited_nodes', 'node_splits', 'stack_pops', 'stack_combines', 'pj_iterations',
    'peak_rank', 'result_size', 'valid', 'speedup',
]
TIME_COLUMNS = ['wall_time', 'split_time', 'update_time', 'join_time', 'speedup']
COUNTER_COLUMNS = ['visited_nodes', 'node_splits', 'stack_pops', 'stack_combines', 'pj_iterations']

BULK_PIPELINES = {
    'ps_ppj': (UNIFORM, 'ppj'),
    'ps_pj': (UNIFORM, 'pj'),
    'ps_ppj_db': (DOUBLE_BINARY, 'ppj'),
}


def quantile_separators(keys: List[Any], parts: int) -> List[Any]:
    """parts-1 separators cutting ascending keys into near-equal runs"""
    n = len(keys)
    separators = []
    for j in range(1, parts):
        idx = ceil(j * n / parts) - 1
        if idx >= 0 and (not separators or separators[-1] < keys[idx]):
            separators.append(keys[idx])
    return separators


class ExperimentRunner:
    """Run one experiment configuration and collect a metrics row per iteration"""

    def __init__(self, config: Dict[str, Any]):
        is_valid, error = ExperimentConfigValidator.validate_config(config)
        if not is_valid:
            raise ExperimentConfigError(error)
        self.config = ExperimentConfigValidator.with_defaults(config)
        self.algo = self.config['algo']
        self.workers = self.config['workers']
        self.parts = settings.ABTREE_SPLIT_PARTS
        self.state = KeyState(seed=self.config['seed'])
        self.initial_keys: List[int] = []

    def _keys(self, n: int) -> List[int]:
        return gen_keys(self.config['dist'], n, self.state, self.config['skew_factor'])

    def _tree(self, keys: List[Any]) -> ABTree:
        return build_from_sorted(keys, self.workers, self.config['a'], self.config['b'])

    def run(self) -> pd.DataFrame:
        """Run every iteration; returns one row per iteration in METRIC_COLUMNS order"""
        logger.info(f"Starting {self.algo} experiment: {self.config}")
        self.initial_keys = self._keys(self.config['tree_size'])
        tree = self._tree(self.initial_keys)
        rows = []
        for iteration in range(1, self.config['iterations'] + 1):
            counters = WorkCounters()
            timings = {'split_time': 0.0, 'update_time': 0.0, 'join_time': 0.0}
            started = perf_counter()
            tree, result, valid, speedup = self._run_iteration(tree, counters, timings)
            wall_time = perf_counter() - started - timings.pop('baseline_time', 0.0)
            rows.append(self._row(iteration, wall_time, timings, counters, result, valid, speedup))
        frame = pd.DataFrame(rows, columns=METRIC_COLUMNS)
        if not self.config['timing']:
            frame[TIME_COLUMNS] = 0.0
        if not self.config['counters']:
            frame[COUNTER_COLUMNS] = 0
        logger.info(f"Finished {self.algo} experiment with {len(frame)} rows")
        return frame

    def _row(self, iteration: int, wall_time: float, timings: Dict[str, float], counters: WorkCounters,
             result: ABTree, valid: bool, speedup: Optional[float]) -> Dict[str, Any]:
        config = self.config
        return {
            'iteration': iteration,
            'algo': self.algo,
            'dist': config['dist'],
            'tree_size': len(self.initial_keys),
            'bulk_size': config['bulk_size'],
            'workers': self.workers,
            'seed': config['seed'],
            'wall_time': wall_time,
            'split_time': timings['split_time'],
            'update_time': timings['update_time'],
            'join_time': timings['join_time'],
            'visited_nodes': counters.visited_nodes,
            'node_splits': counters.node_splits + counters.preprocess_splits,
            'stack_pops': counters.stack_pops,
            'stack_combines': counters.stack_combines,
            'pj_iterations': counters.iterations,
            'peak_rank': result.rank,
            'result_size': len(result),
            'valid': valid,
            'speedup': speedup,
        }

    def _run_iteration(self, tree: ABTree, counters: WorkCounters,
                       timings: Dict[str, float]) -> Tuple[ABTree, ABTree, bool, Optional[float]]:
        if self.algo in JOIN_ALGORITHMS:
            result = self._join_experiment(counters)
            return tree, result, self._valid(result, len(self.initial_keys)), None
        if self.algo in ('seq_split', 'par_split'):
            pieces = self._split_experiment(counters)
            expected = len(self.initial_keys)
            valid = all(p.validate().ok for p in pieces) and sum(len(p) for p in pieces) == expected
            tallest = max(pieces, key=lambda p: p.rank)
            return tree, tallest, valid, None
        if self.algo in BULK_ALGORITHMS:
            return self._bulk_experiment(tree, counters, timings)
        if self.algo in SET_ALGORITHMS:
            result = self._set_experiment(tree, counters)
            return tree, result, result.validate().ok, None
        raise ExperimentConfigError(f"Unknown algorithm: {self.algo}")

    @staticmethod
    def _valid(tree: ABTree, expected_size: int) -> bool:
        return tree.validate().ok and len(tree) == expected_size

    def _parts(self) -> List[ABTree]:
        """The initial tree split into ABTREE_SPLIT_PARTS trees, work not counted"""
        tree = self._tree(self.initial_keys)
        return par_split(tree, quantile_separators(self.initial_keys, self.parts), self.workers)

    def _join_experiment(self, counters: WorkCounters) -> ABTree:
        parts = self._parts()
        seed = self.config['seed']
        if self.algo == 'SJ':
            result = parts[0]
            for part in parts[1:]:
                result = join2(result, part, counters=counters)
            return result
        if self.algo == 'PPJ':
            return pairwise_par_join(parts, self.workers, counters)
        if self.algo == 'PJ':
            for part in parts:
                preprocess_spines(part, counters)
            return lightweight_par_join(parts, self.workers, seed, counters)
        return optimal_par_join(parts, self.workers, seed, counters)

    def _split_experiment(self, counters: WorkCounters) -> List[ABTree]:
        tree = self._tree(self.initial_keys)
        separators = quantile_separators(self.initial_keys, self.parts)
        if self.algo == 'par_split':
            return par_split(tree, separators, self.workers, counters)
        pieces = []
        for separator in separators:
            left, tree = split_at(tree, separator, counters)
            pieces.append(left)
        pieces.append(tree)
        return pieces

    def _bulk_experiment(self, tree: ABTree, counters: WorkCounters,
                         timings: Dict[str, float]) -> Tuple[ABTree, ABTree, bool, Optional[float]]:
        batch = self._keys(self.config['bulk_size'])
        expected = len(set(tree).union(batch))
        sequential_time = None
        if self.config['compare_sequential']:
            started = perf_counter()
            baseline = tree.clone()
            cloned = perf_counter()
            if self.algo == 'seq_bulk':
                union_sorted(baseline, batch)
            else:
                strategy, join_phase = BULK_PIPELINES[self.algo]
                bulk_update(baseline, UpdateBatch.inserts(batch), workers=1, strategy=strategy,
                            join_phase=join_phase, seed=self.config['seed'])
            sequential_time = perf_counter() - cloned
            timings['baseline_time'] = perf_counter() - started

        started = perf_counter()
        if self.algo == 'seq_bulk':
            result = union_sorted(tree, batch, counters)
            timings['update_time'] = perf_counter() - started
        else:
            strategy, join_phase = BULK_PIPELINES[self.algo]
            result = bulk_update(
                tree, UpdateBatch.inserts(batch), self.workers, strategy=strategy,
                join_phase=join_phase, seed=self.config['seed'], counters=counters, timings=timings,
            )
        elapsed = perf_counter() - started
        valid = result.validate().ok and len(result) == expected
        speedup = None
        if sequential_time is not None:
            speedup = sequential_time / elapsed if elapsed > 0 else 0.0
        return result, result, valid, speedup

    def _set_experiment(self, tree: ABTree, counters: WorkCounters) -> ABTree:
        other = self._tree(self._keys(self.config['bulk_size']))
        if self.algo == 'union':
            return set_union(tree.clone(), other, self.workers, counters)
        if self.algo == 'intersection':
            return set_intersection(tree, other, self.workers, counters)
        if self.algo == 'difference':
            return set_difference(tree.clone(), other, self.workers, counters)
        return set_symmetric_difference(tree, other, self.workers, counters)


def write_metrics(frame: pd.DataFrame, path: str):
    """Write metrics as CSV, or as a workbook when the path ends in .xlsx"""
    if Path(path).suffix.lower() == '.xlsx':
        frame.to_excel(path, index=False, engine='openpyxl')
    else:
        frame.to_csv(path, index=False)


class ExperimentService:
    """Execute persisted experiment runs"""

    @staticmethod
    def execute(run) -> Optional[pd.DataFrame]:
        """Run the experiment of an ExperimentRun and store its metrics"""
        from .models import MetricsRecord

        run.status = 'processing'
        run.started_at = timezone.now()
        run.save(update_fields=['status', 'started_at'])
        try:
            frame = ExperimentRunner(run.build_config()).run()
            records = [
                MetricsRecord(run=run, **{column: row[column] for column in METRIC_COLUMNS})
                for row in frame.astype(object).where(frame.notna(), None).to_dict('records')
            ]
            run.metrics.all().delete()
            MetricsRecord.objects.bulk_create(records)

            run.summary = {
                'rows': len(frame),
                'all_valid': bool(frame['valid'].all()) if len(frame) else True,
                'mean_wall_time': float(frame['wall_time'].mean()) if len(frame) else 0.0,
                'mean_visited_nodes': float(frame['visited_nodes'].mean()) if len(frame) else 0.0,
            }
            run.status = 'completed'
            run.completed_at = timezone.now()
            run.save()
            return frame
        except Exception as e:
            logger.error(f"Experiment run {run.job_id} failed: {str(e)}")
            run.status = 'failed'
            run.error_message = str(e)
            run.completed_at = timezone.now()
            run.save()
            return None
