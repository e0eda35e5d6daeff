"""Exception types shared across the package."""


class DiracWidthError(Exception):
    """Base class for all package errors."""


class DomainError(DiracWidthError, ValueError):
    """An argument lies outside the domain of the function."""


class QuadratureError(DiracWidthError, ArithmeticError):
    """An integral did not reach the requested tolerance within its budget.

    The partially converged result is kept on ``result`` so callers can report
    the achieved error.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class EnvelopeError(DiracWidthError, ValueError):
    """An envelope violates its construction invariants (normalization, finiteness)."""


class PreconditionError(DiracWidthError, ValueError):
    """A documented precondition of an operation does not hold."""


class ConfigError(DiracWidthError, ValueError):
    """Invalid command-line or run configuration."""
