class ABTreeError(Exception):
    """Base error for (a,b)-tree operations"""


class InvalidNodeError(ABTreeError):
    """Node cannot take part in the requested node operation"""


class OrderViolationError(ABTreeError, ValueError):
    """Keys of the operands are not in the required order"""


class PreconditionError(ABTreeError, ValueError):
    """Input does not satisfy the operation's precondition"""


class AugmentationRequiredError(PreconditionError):
    """Operation needs per-node subtree sizes"""


class IndexOutOfRangeError(ABTreeError, IndexError):
    """Order-statistic index outside 1..size"""


class InvariantError(ABTreeError):
    """An internal structural invariant does not hold"""


class ExperimentConfigError(ABTreeError, ValueError):
    """Experiment configuration rejected"""
