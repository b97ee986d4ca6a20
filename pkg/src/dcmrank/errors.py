"""Error taxonomy shared by all modules.

Every class name doubles as the structured error name the CLI prints on stderr.
"""


class ModelError(Exception):
    """Base class for runtime model errors (CLI exit code 3)."""


class ConfigError(ValueError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class ResampleLimitExceeded(ModelError):
    pass


class NoRoot(ModelError):
    pass


class DegreeMismatch(ModelError, ValueError):
    pass


class EmptyGraph(ModelError):
    pass


class DepthExceeded(ModelError, ValueError):
    pass


class DimensionMismatch(ModelError, ValueError):
    pass


class TooLarge(ModelError):
    pass


class NotConverged(RuntimeWarning):
    """Power iteration hit max_iters; the last iterate is still returned."""
