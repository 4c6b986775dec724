from dataclasses import dataclass, fields
from typing import Dict, Iterable


@dataclass
class WorkCounters:
    """Work tallies collected by tree operations.

    Parallel phases give every task its own instance and merge them after
    the barrier, so a single instance is never shared between threads.
    """
    visited_nodes: int = 0
    join_steps: int = 0
    node_splits: int = 0
    preprocess_splits: int = 0
    stack_pops: int = 0
    stack_pushes: int = 0
    stack_combines: int = 0
    spine_rebuilds: int = 0
    max_chain_growth: int = 0
    steals: int = 0
    iterations: int = 0
    rounds: int = 0

    def merge(self, other: 'WorkCounters') -> 'WorkCounters':
        for f in fields(self):
            if f.name == 'max_chain_growth':
                self.max_chain_growth = max(self.max_chain_growth, other.max_chain_growth)
            else:
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        return self

    def merge_all(self, others: Iterable['WorkCounters']) -> 'WorkCounters':
        for other in others:
            self.merge(other)
        return self

    def as_dict(self) -> Dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}
