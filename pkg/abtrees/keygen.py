from dataclasses import dataclass
from typing import List, Optional
from django.conf import settings
import numpy as np
import logging

from .exceptions import ExperimentConfigError

logger = logging.getLogger(__name__)

KEY_RANGE = 2 ** 32

DISTRIBUTION_CHOICES = [
    ('uniform', 'Uniform'),
    ('skewed_uniform', 'Skewed uniform'),
    ('normal', 'Normal'),
    ('increasing_uniform', 'Increasing uniform'),
]
DISTRIBUTIONS = [choice for choice, _ in DISTRIBUTION_CHOICES]


@dataclass
class KeyState:
    """Generator state carried across the batches of one run"""
    seed: int = 0
    batch_index: int = 0
    high_water: int = -1


def _rng(state: KeyState) -> np.random.Generator:
    return np.random.default_rng([state.seed, state.batch_index])


def gen_keys(dist: str, n: int, state: KeyState, skew_factor: Optional[int] = None) -> List[int]:
    """
    Draw about n distinct keys, sorted ascending.

    Duplicates drawn by the distribution are dropped, so the batch can be
    slightly shorter than n. The state advances by one batch per call.
    """
    if n < 0:
        raise ExperimentConfigError(f"Cannot generate {n} keys")
    if dist not in DISTRIBUTIONS:
        raise ExperimentConfigError(f"Unknown distribution: {dist}")
    rng = _rng(state)
    state.batch_index += 1
    if n == 0:
        return []

    if dist == 'uniform':
        raw = rng.integers(0, KEY_RANGE, size=n, dtype=np.int64)
    elif dist == 'skewed_uniform':
        factor = skew_factor or settings.ABTREE_SKEW_FACTOR
        if not 1 <= factor <= KEY_RANGE:
            raise ExperimentConfigError(f"Skew factor must lie in [1, {KEY_RANGE}], got {factor}")
        width = KEY_RANGE // factor
        start = int(rng.integers(0, KEY_RANGE - width + 1))
        raw = rng.integers(start, start + width, size=n, dtype=np.int64)
    elif dist == 'normal':
        raw = rng.normal(settings.ABTREE_NORMAL_MEAN, settings.ABTREE_NORMAL_STDDEV, size=n)
        raw = np.clip(np.rint(raw), 0, KEY_RANGE - 1).astype(np.int64)
    else:
        low = state.high_water + 1
        raw = rng.integers(low, low + settings.ABTREE_INCREASING_WIDTH * n, size=n, dtype=np.int64)

    keys = np.unique(raw)
    if dist == 'increasing_uniform' and keys.size:
        state.high_water = int(keys[-1])
    logger.debug(f"Generated {keys.size} {dist} keys (batch {state.batch_index})")
    return keys.tolist()
