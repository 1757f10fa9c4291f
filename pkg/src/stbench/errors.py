"""Exception types shared across the package.

Each maps onto one CLI exit code (see ``stbench.cli``).
"""


class InputError(ValueError):
    """Malformed or out-of-domain input (dimensions, probabilities, ranges)."""


class ConfigError(InputError):
    """Run configuration failed schema validation."""


class PreconditionError(RuntimeError):
    """A scheme was asked to evaluate a circuit outside its validity domain."""


class SolverError(RuntimeError):
    """The linear-programming solver failed or reported infeasibility."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ResourceError(RuntimeError):
    """Requested system size exceeds a dense-simulation cap."""
