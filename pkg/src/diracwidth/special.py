"""Modified Bessel functions K0, K1 and spherical Bessel j0, j1.

K0 and K1 are evaluated by the ascending series for ``x <= 2`` and by the
exponentially prefactored continued fraction (Temme/Steed) above. Two
independent oracles are provided for validation only: the Basset integral
for K0 and the trapezoidal rule on ``K_nu(x) = int_0^inf exp(-x cosh t)
cosh(nu t) dt``, which converges geometrically in the step size.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DomainError
from .quadrature import integrate_oscillatory

SERIES_CUT = kernels._SERIES_CUT
_REL_ERR = 4e-15


@dataclass(frozen=True)
class BesselEvalReport:
    argument: float
    value: float
    method: str  # "series" or "continued-fraction"
    est_error: float


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("modified Bessel functions K0, K1 need x > 0")
    return x


def _k01(x):
    x = _check_positive(x)
    with np.errstate(under="ignore"):
        k0, k1 = kernels.k01(x)
    return k0.reshape(x.shape), k1.reshape(x.shape)


def bessel_k0(x):
    """K0(x) for x > 0 (scalar or array). Underflows to 0 for x beyond ~745."""
    k0 = _k01(x)[0]
    return float(k0) if k0.ndim == 0 else k0


def bessel_k1(x):
    """K1(x) for x > 0 (scalar or array)."""
    k1 = _k01(x)[1]
    return float(k1) if k1.ndim == 0 else k1


def bessel_k01(x):
    """Both K0(x) and K1(x) from a single pass."""
    k0, k1 = _k01(x)
    if k0.ndim == 0:
        return float(k0), float(k1)
    return k0, k1


def bessel_k2(x):
    """K2 by upward recurrence from K0, K1."""
    k0, k1 = _k01(x)
    x = np.asarray(x, dtype=float)
    k2 = k0 + 2.0 * k1 / x
    return float(k2) if k2.ndim == 0 else k2


def evaluate_k(nu, x):
    """Evaluate K0 or K1 at a single point and report which branch was used."""
    if nu not in (0, 1):
        raise DomainError("only orders 0 and 1 are supported")
    x = float(x)
    value = _k01(x)[nu].item()
    method = "series" if x <= SERIES_CUT else "continued-fraction"
    return BesselEvalReport(x, value, method, _REL_ERR * abs(value))


def bessel_k_asymptotic(nu, x, terms=None):
    """Hankel asymptotic expansion ``sqrt(pi/2x) e^{-x} sum_k a_k(nu)/x^k``.

    Truncated at ``terms`` or at the smallest term. Only accurate for large x;
    used as an oracle in tests.
    """
    x = float(x)
    mu = 4.0 * nu * nu
    total = 1.0
    term = 1.0
    k = 1
    while terms is None or k < terms:
        nxt = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if terms is None and abs(nxt) >= abs(term):
            break
        term = nxt
        total += term
        if terms is None and abs(term) < 1e-17 * abs(total):
            break
        k += 1
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * total


def bessel_k_integral(nu, x, step=0.05):
    """Oracle: trapezoidal rule on ``int_0^inf exp(-x cosh t) cosh(nu t) dt``.

    The integrand is entire and doubly-exponentially decaying, so the
    trapezoidal rule converges like ``exp(-pi^2/step)``.
    """
    x = float(_check_positive(x))
    tmax = math.acosh(1.0 + 760.0 / x)
    t = np.arange(0.0, tmax + step, step)
    w = np.full(t.shape, step)
    w[0] = 0.5 * step
    with np.errstate(under="ignore"):
        f = np.exp(-x * (np.cosh(t) - 1.0)) * np.cosh(nu * t)
    return math.exp(-x) * math.fsum(w * f)


def basset_integral(x, m=1.0, tol=1e-12):
    """Oracle: ``int_0^inf cos(x p)/sqrt(p^2 + m^2) dp`` (= K0(m x)).

    Returns the full :class:`~diracwidth.quadrature.QuadratureResult`.
    """
    return integrate_oscillatory(lambda p: 1.0 / np.sqrt(p * p + m * m), x, "cos", tol)


def spherical_j(l, x):
    """Spherical Bessel function j_l for l in {0, 1}, regular at x = 0."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    small = ax < 1e-3
    xs = np.where(small, 1.0, x)
    x2 = x * x
    if l == 0:
        out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(xs) / xs)
    elif l == 1:
        out = np.where(small, x / 3.0 - x * x2 / 30.0 + x * x2 * x2 / 840.0,
                       (np.sin(xs) - xs * np.cos(xs)) / (xs * xs))
    else:
        raise DomainError("only l = 0 and l = 1 are supported")
    return float(out) if out.ndim == 0 else out


def _central_diff(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


@dataclass
class BesselIdentityReport:
    grid: list
    deviations: dict = field(default_factory=dict)

    def max_deviation(self, name):
        return self.deviations[name]

    def passed(self, derivative_tol=1e-6, exact_tol=1e-8):
        exact = ("K2_recurrence", "basset")
        return all(v <= (exact_tol if k in exact else derivative_tol) for k, v in self.deviations.items())


def verify_bessel_identities(grid):
    """Check the identities used to derive the projection kernel on ``grid``.

    Reported maxima; the derivative identities are relative to the size of
    the derivative, the others absolute:

    ``K0_derivative``      K0' + K1 (central differences)
    ``K1_derivative``      K1' + K0 + K1/x
    ``K1_half_sum``        K1' + (K0 + K2)/2 with K2 from the integral oracle
    ``K2_recurrence``      K2 - K0 - 2 K1/x with K2 from the integral oracle
    ``basset``             Basset integral minus K0
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise DomainError("grid must be nonempty")
    _check_positive(grid)
    dev = {k: 0.0 for k in ("K0_derivative", "K1_derivative", "K1_half_sum", "K2_recurrence", "basset")}
    for x in grid:
        # Step proportional to x: the derivatives blow up like x^-k near 0.
        h = 1e-5 * x
        k0, k1 = bessel_k01(x)
        k2 = bessel_k_integral(2, x)
        dk0 = _central_diff(bessel_k0, x, h)
        dk1 = _central_diff(bessel_k1, x, h)
        dev["K0_derivative"] = max(dev["K0_derivative"], abs(dk0 + k1) / k1)
        dev["K1_derivative"] = max(dev["K1_derivative"], abs(dk1 + k0 + k1 / x) / (k0 + k1 / x))
        dev["K1_half_sum"] = max(dev["K1_half_sum"], abs(dk1 + 0.5 * (k0 + k2)) / (k0 + k1 / x))
        dev["K2_recurrence"] = max(dev["K2_recurrence"], abs(k2 - k0 - 2.0 * k1 / x))
        dev["basset"] = max(dev["basset"], abs(basset_integral(x).value - k0))
    return BesselIdentityReport(grid, dev)
