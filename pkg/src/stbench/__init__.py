"""Average-computation benchmarking for 1D brickwork circuits."""

from .errors import ConfigError, InputError, PreconditionError, ResourceError, SolverError

__all__ = ["ConfigError", "InputError", "PreconditionError", "ResourceError", "SolverError"]
__version__ = "0.1.0"
