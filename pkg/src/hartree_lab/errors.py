"""Exception types shared across the package."""


class HartreeLabError(Exception):
    """Base class for all package errors."""


class DomainError(HartreeLabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ConfigurationError(HartreeLabError, ValueError):
    """Inconsistent or incomplete run configuration."""


class NumericalError(HartreeLabError, ArithmeticError):
    """A numerical procedure failed; ``achieved`` holds the last residual or tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class IterationError(NumericalError):
    """Iteration did not converge within its budget."""


class AssemblyError(NumericalError):
    """A discretized form lost a structural property it must have."""
