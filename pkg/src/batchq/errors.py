"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an argument is outside the mathematical domain of an operation.

    Examples: exponential-integral arguments at or below zero, degenerate
    denominators in the routing matrix, correlation at a degenerate time point.
    """


class SimConfigError(RuntimeError):
    """Raised when a simulation configuration is internally inconsistent."""
