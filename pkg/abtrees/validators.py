from jsonschema import validate, ValidationError
from django.conf import settings
import logging

from .keygen import DISTRIBUTIONS

logger = logging.getLogger(__name__)


ALGORITHMS = [
    'SJ', 'PPJ', 'PJ', 'OPJ',
    'seq_split', 'par_split',
    'seq_bulk', 'ps_ppj', 'ps_pj', 'ps_ppj_db',
    'union', 'intersection', 'difference', 'symmetric_difference',
]

# JSON Schema for an experiment configuration
EXPERIMENT_CONFIG_SCHEMA = {
    "type": "object",
    "required": ["algo", "tree_size"],
    "properties": {
        "algo": {"type": "string", "enum": ALGORITHMS},
        "dist": {"type": "string", "enum": DISTRIBUTIONS},
        "tree_size": {"type": "integer", "minimum": 0},
        "bulk_size": {"type": "integer", "minimum": 0},
        "iterations": {"type": ["integer", "null"], "minimum": 1},
        "workers": {"type": ["integer", "null"], "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "skew_factor": {"type": ["integer", "null"], "minimum": 1, "maximum": 2 ** 32},
        "a": {"type": ["integer", "null"], "minimum": 2},
        "b": {"type": ["integer", "null"], "minimum": 4},
        "counters": {"type": "boolean"},
        "timing": {"type": "boolean"},
        "compare_sequential": {"type": "boolean"},
    },
    "additionalProperties": False,
}

JOIN_ALGORITHMS = {'SJ', 'PPJ', 'PJ', 'OPJ'}
SPLIT_ALGORITHMS = {'seq_split', 'par_split'}
BULK_ALGORITHMS = {'seq_bulk', 'ps_ppj', 'ps_pj', 'ps_ppj_db'}
SET_ALGORITHMS = {'union', 'intersection', 'difference', 'symmetric_difference'}


class ExperimentConfigValidator:
    """Validate experiment configurations"""

    @staticmethod
    def validate_config(config: dict) -> tuple[bool, str]:
        """
        Validate an experiment configuration against the schema

        Returns:
            tuple: (is_valid, error_message)
        """
        try:
            validate(instance=config, schema=EXPERIMENT_CONFIG_SCHEMA)

            a = config.get('a') or settings.ABTREE_DEFAULT_A
            b = config.get('b') or settings.ABTREE_DEFAULT_B
            if b < 2 * a:
                return False, f"Tree parameters need b >= 2a, got a={a}, b={b}"

            algo = config['algo']
            if algo in BULK_ALGORITHMS | SET_ALGORITHMS and not config.get('bulk_size'):
                return False, f"Algorithm '{algo}' needs a positive bulk_size"
            if algo in JOIN_ALGORITHMS | SPLIT_ALGORITHMS and config['tree_size'] < settings.ABTREE_SPLIT_PARTS:
                return False, f"Algorithm '{algo}' needs at least {settings.ABTREE_SPLIT_PARTS} elements"

            return True, ""

        except ValidationError as e:
            logger.error(f"Validation error: {str(e)}")
            return False, e.message
        except Exception as e:
            logger.error(f"Unexpected validation error: {str(e)}")
            return False, str(e)

    @staticmethod
    def with_defaults(config: dict) -> dict:
        """Fill in the optional fields"""
        resolved = {
            'dist': 'uniform',
            'bulk_size': 0,
            'iterations': None,
            'workers': None,
            'seed': 0,
            'skew_factor': None,
            'a': None,
            'b': None,
            'counters': True,
            'timing': True,
            'compare_sequential': False,
        }
        resolved.update({key: value for key, value in config.items() if value is not None})
        resolved['workers'] = resolved['workers'] or settings.ABTREE_WORKERS
        resolved['a'] = resolved['a'] or settings.ABTREE_DEFAULT_A
        resolved['b'] = resolved['b'] or settings.ABTREE_DEFAULT_B
        resolved['skew_factor'] = resolved['skew_factor'] or settings.ABTREE_SKEW_FACTOR
        if resolved['iterations'] is None:
            resolved['iterations'] = default_iterations(resolved['bulk_size'])
        return resolved


def default_iterations(bulk_size: int) -> int:
    """Iteration count for a bulk size, capped for desk-scale runs"""
    if bulk_size <= 100000:
        iterations = 10000
    else:
        iterations = (4 * 2 ** 30) // bulk_size
    return max(1, min(iterations, settings.ABTREE_MAX_ITERATIONS))
