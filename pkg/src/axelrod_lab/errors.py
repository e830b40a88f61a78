"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid model parameters or an argument outside its domain."""


class UnsupportedConfigurationError(ValueError):
    """Operation requires a configuration (typically F = 2) the caller did not provide."""


class ConsistencyError(RuntimeError):
    """Internal state disagreement: stale event, or incremental and derived
    bookkeeping diverged.  Always indicates a bug, never a statistical fluke."""
