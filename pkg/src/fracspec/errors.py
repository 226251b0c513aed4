"""Exception hierarchy shared by every module."""


class FracspecError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(FracspecError, ValueError):
    """An input violates a documented precondition or type invariant."""


class NotExpansiveError(ValidationError):
    pass


class EnumerationOverflowError(ValidationError):
    """Requested word enumeration would exceed the configured cap."""


class NonUniformWeightsError(ValidationError):
    pass


class NonIntegerSeedError(ValidationError):
    """An extreme cycle has non-integer points, so it cannot seed a spectrum."""

    def __init__(self, message, cycle=None):
        super().__init__(message)
        self.cycle = cycle


class ComputationError(FracspecError, RuntimeError):
    """A numerical routine could not meet its contract."""


class UnattainableErrorBound(ComputationError):
    pass


class DivergenceError(ComputationError):
    pass
