"""Positive-energy Dirac wave packets of vanishing width, the projection kernel,
and delta sequences with divergent variance.

Natural units (hbar = c = 1); lengths in ``1/m``.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError, DiracWidthError, DomainError, EnvelopeError, PreconditionError, QuadratureError,
)

__all__ = [
    "__version__",
    "ConfigError", "DiracWidthError", "DomainError", "EnvelopeError", "PreconditionError",
    "QuadratureError",
]
