"""Delta sequences with and without vanishing variance.

``spread_delta_density(n, d)`` is the mixture

    rho_n = (n - 2) n^{d-1} g(n x) + g(x - n e_1)/n + g(x + n e_1)/n,
    g(x)  = pi^{-d/2} exp(-|x|^2),

which tends to delta weakly, has mean 0, and second moment >= n/2. The
converse (vanishing second moment implies weak convergence) is checked on
scaled Gaussians, and variance additivity under convolution is checked in
1D and for 3D heat evolution.

Gaussian mixtures are stored as separable terms, so every integral against
a separable test function factorizes into 1D integrals. Those are evaluated
by adaptive quadrature of the actual profiles; closed forms are kept
separately (``analytic_moments``) as the reference.
"""
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError, QuadratureError
from .quadrature import composite_legendre, integrate_adaptive

_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
# g(y) < 1e-35 beyond |y| = 9 in units of the term scale.
_SPAN = 9.0


@dataclass(frozen=True)
class GaussianTerm:
    """``weight * prod_a g1((x_a - center_a) / scale_a) / scale_a`` with ``g1 = pi^{-1/2} e^{-y^2}``."""
    weight: float
    center: tuple
    scale: tuple


@dataclass(frozen=True)
class DensitySpec:
    """A probability density on R^d.

    Mixture kinds (``spread_delta``, ``gaussian_scaled``) carry ``terms``; other
    kinds supply ``evaluator`` and, where known, ``radial`` (3D isotropic
    densities as a function of r).
    """
    d: int
    kind: str
    params: dict = field(default_factory=dict)
    terms: tuple = ()
    evaluator: object = None
    radial: object = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError("dimension must be a positive integer")
        if self.terms:
            w = sum(t.weight for t in self.terms)
            if abs(w - 1.0) > 1e-14 or any(t.weight < 0 for t in self.terms):
                raise DomainError("mixture weights must be nonnegative and sum to 1")

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.terms:
            out = np.zeros(X.shape[0])
            for t in self.terms:
                c = np.asarray(t.center)
                s = np.asarray(t.scale)
                y = (X - c) / s
                out += t.weight * np.prod(_INV_SQRT_PI / s) * np.exp(-np.sum(y * y, axis=1))
            return out
        if self.evaluator is None:
            raise DomainError(f"density kind {self.kind!r} has no evaluator")
        return np.asarray(self.evaluator(X), dtype=float)


def _axis_vec(d, value, axis=0):
    v = [0.0] * d
    v[axis] = float(value)
    return tuple(v)


def spread_delta_density(n, d=1):
    """The divergent-variance delta sequence; central weight (n-2)/n, bumps 1/n each at +-n e_1."""
    if int(n) != n or n < 2:
        raise DomainError("spread delta density needs an integer n >= 2")
    n = int(n)
    unit = (1.0,) * d
    terms = (
        GaussianTerm((n - 2) / n, (0.0,) * d, (1.0 / n,) * d),
        GaussianTerm(1.0 / n, _axis_vec(d, n), unit),
        GaussianTerm(1.0 / n, _axis_vec(d, -n), unit),
    )
    return DensitySpec(d, "spread_delta", {"n": n}, terms)


def gaussian_scaled(s, d=1, center=None):
    """Centred Gaussian with standard deviation ``s`` along every axis."""
    if not s > 0:
        raise DomainError("scale must be positive")
    center = (0.0,) * d if center is None else tuple(float(c) for c in center)
    return DensitySpec(d, "gaussian_scaled", {"s": float(s)},
                       (GaussianTerm(1.0, center, (math.sqrt(2.0) * s,) * d),))


def exponential_3d():
    """u0(x) = exp(-|x|) / (8 pi) on R^3: norm 1, second moment 12."""
    def radial(r):
        return np.exp(-np.asarray(r, dtype=float)) / (8.0 * math.pi)

    return DensitySpec(3, "custom", {"label": "exp(-r)/(8 pi)"},
                       evaluator=lambda X: radial(np.linalg.norm(X, axis=1)), radial=radial)


def heat_kernel_3d(t):
    """g_t(x) = (4 pi t)^{-3/2} exp(-|x|^2 / 4t)."""
    if not t > 0:
        raise DomainError("time must be positive")

    def radial(r):
        r = np.asarray(r, dtype=float)
        return (4.0 * math.pi * t) ** -1.5 * np.exp(-r * r / (4.0 * t))

    return DensitySpec(3, "custom", {"label": f"heat kernel t={t}", "t": float(t)},
                       evaluator=lambda X: radial(np.linalg.norm(X, axis=1)), radial=radial)


def heat_evolved(t, initial=None, r_max=60.0, panels=240, order=12):
    """g_t * u0 for a radial initial density (default :func:`exponential_3d`).

    Uses the radial convolution formula
    ``(f * g)(R) = (2 pi / R) int r f(r) int_{|R-r|}^{R+r} s g(s) ds dr``,
    with the inner integral in closed form for the heat kernel.
    """
    initial = exponential_3d() if initial is None else initial
    if initial.radial is None:
        raise DomainError("heat evolution needs a radial initial density")
    pre = (4.0 * math.pi * t) ** -1.5 * 2.0 * t
    rn, rw = composite_legendre(np.linspace(0.0, r_max, panels + 1), order)
    f = initial.radial(rn)

    def radial(R):
        R = np.atleast_1d(np.asarray(R, dtype=float))
        lo = (R[:, None] - rn[None, :]) ** 2
        hi = (R[:, None] + rn[None, :]) ** 2
        inner = pre * (np.exp(-lo / (4.0 * t)) - np.exp(-hi / (4.0 * t)))
        return 2.0 * math.pi / R * ((rn * f * rw)[None, :] * inner).sum(axis=1)

    return DensitySpec(3, "heat_evolved", {"t": float(t), "initial": initial.params.get("label")},
                       evaluator=lambda X: radial(np.linalg.norm(X, axis=1)), radial=radial)


# ---------------------------------------------------------------------------
# test functions

@dataclass(frozen=True)
class TestFunction:
    """``h(x) = sum_k coef_k prod_a factor_k(x_a)``, with the bounds the rate estimates need.

    ``sup_abs`` bounds ``|h|`` (``inf`` when unbounded) and ``sup_second``
    bounds the Hessian operator norm. ``breakpoints`` are 1D points where a
    factor is not analytic.
    """
    name: str
    products: tuple
    value_at_zero: float
    sup_abs: float
    sup_second: float
    breakpoints: tuple = ()

    __test__ = False

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.zeros(X.shape[0])
        for coef, factors in self._expand(X.shape[1]):
            term = np.full(X.shape[0], coef)
            for a, fac in enumerate(factors):
                term = term * fac(X[:, a])
            out += term
        return out

    def _expand(self, d):
        if d > 3:
            raise DomainError("test functions are defined for d <= 3")
        prods = [(coef, build(d)) for coef, build in self.products]
        return [(coef, factors) for coef, factors in prods if factors is not None]


def _ones(x):
    return np.ones_like(x)


def _bump1(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def gauss_test():
    f = lambda x: np.exp(-x * x)
    return TestFunction("exp(-x^2)", ((1.0, lambda d: [f] * d),), 1.0, 1.0, 2.0)


def cos_test(k=1.0):
    f = lambda x: np.cos(k * x)
    return TestFunction(f"cos({k}x)", ((1.0, lambda d: [f] + [_ones] * (d - 1)),), 1.0, 1.0, k * k)


def bump_test():
    # psi(t) = exp(1 - 1/(1 - t^2)): sup|psi''| = 21.0659 at |t| = 0.8951 and
    # sup|psi'| = 2.1704 at |t| = 0.7598. Gershgorin on the product Hessian gives
    # sup|psi''| + (d - 1) sup|psi'|^2, which is <= 30.49 for d <= 3.
    return TestFunction("bump", ((1.0, lambda d: [_bump1] * d),), 1.0, 1.0, 30.5, (-1.0, 1.0))


def constant_test():
    return TestFunction("1", ((1.0, lambda d: [_ones] * d),), 1.0, 1.0, 0.0)


def square_test():
    sq = lambda x: x * x

    def axis(a):
        # no factor list for axes beyond the dimension
        return lambda d: [sq if b == a else _ones for b in range(d)] if a < d else None

    return TestFunction("|x|^2", tuple((1.0, axis(a)) for a in range(3)), 0.0, math.inf, 2.0)


TEST_FUNCTIONS = {
    "gauss": gauss_test,
    "cos": cos_test,
    "bump": bump_test,
    "one": constant_test,
    "square": square_test,
}


def _products_for(h, d):
    return h._expand(d)


# ---------------------------------------------------------------------------
# integrals of mixtures against separable functions

@functools.lru_cache(maxsize=65536)
def _factor_integral(center, scale, factor, breakpoints, tol):
    lo, hi = center - _SPAN * scale, center + _SPAN * scale
    # Factors grow at most like x^2 over the support.
    tol = tol * max(1.0, abs(lo), abs(hi)) ** 2
    pts = [center] + [b for b in breakpoints if lo < b < hi]
    res = integrate_adaptive(
        lambda x: _INV_SQRT_PI / scale * np.exp(-((x - center) / scale) ** 2) * factor(x),
        (lo, hi), tol, points=sorted(set(pts)), strict=False)
    if not res.converged:
        raise QuadratureError(f"1D mixture integral at center {center} did not converge", res)
    return res.value


def integrate_against(spec, h, tol=1e-13):
    """int rho h d^dx for a mixture ``spec`` and separable ``h``."""
    if not spec.terms:
        raise DomainError("separable integration needs a Gaussian mixture")
    total = 0.0
    for coef, factors in _products_for(h, spec.d):
        for t in spec.terms:
            val = t.weight * coef
            for a in range(spec.d):
                val *= _factor_integral(t.center[a], t.scale[a], factors[a], h.breakpoints, tol)
            total += val
    return total


_X1 = lambda x: x
_X2 = lambda x: x * x


def moments(spec, tol=1e-13):
    """L1 norm, mean vector and ``int |x|^2 rho`` by quadrature of the profiles."""
    if spec.terms:
        d = spec.d
        norm = 0.0
        mean = np.zeros(d)
        second = 0.0
        for t in spec.terms:
            z = [_factor_integral(t.center[a], t.scale[a], _ones, (), tol) for a in range(d)]
            f1 = [_factor_integral(t.center[a], t.scale[a], _X1, (), tol) for a in range(d)]
            f2 = [_factor_integral(t.center[a], t.scale[a], _X2, (), tol) for a in range(d)]
            base = t.weight * math.prod(z)
            norm += base
            for a in range(d):
                others = t.weight * math.prod(z[b] for b in range(d) if b != a)
                mean[a] += others * f1[a]
                second += others * f2[a]
        return {"norm": norm, "mean": mean, "second_moment": second}
    if spec.radial is not None and spec.d == 3:
        return _radial_moments(spec.radial, tol)
    raise DomainError(f"no moment rule for density kind {spec.kind!r}")


def _radial_moments(radial, tol, r_max=80.0):
    def integrand(r):
        w = 4.0 * math.pi * r * r * radial(r)
        return np.stack([w, w * r * r], axis=-1)

    res = integrate_adaptive(integrand, (0.0, r_max), tol, points=[1.0, 5.0, 20.0], strict=False)
    if not res.converged:
        raise QuadratureError("radial moment integral did not converge", res)
    norm, second = res.value
    return {"norm": float(norm), "mean": np.zeros(3), "second_moment": float(second)}


def analytic_moments(spec):
    """Closed forms for mixtures: mean sum w c, second moment sum w (|c|^2 + sum s^2/2)."""
    if not spec.terms:
        raise DomainError("closed-form moments need a Gaussian mixture")
    mean = sum(t.weight * np.asarray(t.center) for t in spec.terms)
    second = sum(t.weight * (sum(c * c for c in t.center) + sum(s * s for s in t.scale) / 2.0)
                 for t in spec.terms)
    return {"norm": sum(t.weight for t in spec.terms), "mean": mean, "second_moment": second}


def spread_delta_second_moment(n, d):
    """((n - 2)/n) d/(2 n^2) + (2/n)(n^2 + d/2)."""
    return (n - 2) / n * d / (2.0 * n * n) + 2.0 / n * (n * n + d / 2.0)


# ---------------------------------------------------------------------------
# weak convergence and the converse

def _resolve(h):
    if isinstance(h, str):
        try:
            return TEST_FUNCTIONS[h]()
        except KeyError:
            raise DomainError(f"unknown test function {h!r}") from None
    return h


def weak_convergence_error(family, h, n_list, d=1):
    """|int rho_n h - h(0)| for ``rho_n = family(n, d)``."""
    h = _resolve(h)
    return np.array([abs(integrate_against(family(int(n), d), h) - h.value_at_zero) for n in n_list])


@dataclass(frozen=True)
class ConverseReport:
    n_list: tuple
    second_moments: np.ndarray
    errors: np.ndarray
    bounds: np.ndarray

    @property
    def within_bound(self):
        return bool(np.all(self.errors <= self.bounds + 1e-15))


def converse_check(family, h, n_list, d=1, threshold=1e-2):
    """Weak errors for a family whose second moments must decrease to below ``threshold``.

    The Taylor bound ``|int rho (h - h(0))| <= (1/2) sup|h''| int |x|^2 rho`` holds
    for centred densities and is returned alongside.
    """
    h = _resolve(h)
    specs = [family(int(n), d) for n in n_list]
    m2 = np.array([moments(s)["second_moment"] for s in specs])
    if len(m2) > 1 and (np.any(np.diff(m2) >= 0) or m2[-1] > threshold):
        raise PreconditionError("second moments of the family do not decrease to zero")
    if len(m2) == 1 and m2[0] > threshold:
        raise PreconditionError("second moment above threshold")
    errors = np.array([abs(integrate_against(s, h) - h.value_at_zero) for s in specs])
    return ConverseReport(tuple(int(n) for n in n_list), m2, errors, 0.5 * h.sup_second * m2)


def scaled_gaussian_family(n, d=1):
    """Family used for the converse: standard deviation 1/n."""
    return gaussian_scaled(1.0 / n, d)


@dataclass(frozen=True)
class ConvergenceReport:
    n_list: tuple
    l1_norms: np.ndarray
    means: np.ndarray
    second_moments: np.ndarray
    weak_errors: dict


def convergence_report(n_list, d=1, test_functions=("gauss", "cos", "bump", "square"),
                       family=spread_delta_density):
    specs = [family(int(n), d) for n in n_list]
    mom = [moments(s) for s in specs]
    weak = {}
    for name in test_functions:
        h = _resolve(name)
        weak[name] = np.array([abs(integrate_against(s, h) - h.value_at_zero) for s in specs])
    return ConvergenceReport(
        tuple(int(n) for n in n_list),
        np.array([m["norm"] for m in mom]),
        np.array([m["mean"] for m in mom]),
        np.array([m["second_moment"] for m in mom]),
        weak,
    )


# ---------------------------------------------------------------------------
# variance additivity

def _variance_1d(values, x, w):
    norm = float(np.sum(w * values))
    mean = float(np.sum(w * values * x)) / norm
    return norm, float(np.sum(w * values * (x - mean) ** 2)) / norm


def _support_1d(spec):
    lo = min(t.center[0] - _SPAN * t.scale[0] for t in spec.terms)
    hi = max(t.center[0] + _SPAN * t.scale[0] for t in spec.terms)
    width = min(t.scale[0] for t in spec.terms)
    return lo, hi, width


def convolution_variance_check(f_spec, g_spec, order=16):
    """Variance additivity for 1D Gaussian mixtures by direct double quadrature.

    ``(f * g)(y) = int f(x) g(y - x) dx`` is evaluated on a composite
    Gauss-Legendre grid in ``y`` with the inner integral on a grid fitted to
    ``f``; each panel is no wider than the narrower density's scale.
    """
    if f_spec.d != 1 or g_spec.d != 1 or not (f_spec.terms and g_spec.terms):
        raise DomainError("convolution check works on 1D Gaussian mixtures")
    flo, fhi, fw = _support_1d(f_spec)
    glo, ghi, gw = _support_1d(g_spec)
    step = min(fw, gw)

    def rule(lo, hi):
        panels = max(1, int(math.ceil((hi - lo) / step)))
        return composite_legendre(np.linspace(lo, hi, panels + 1), order)

    xf, wf = rule(flo, fhi)
    xg, wg = rule(glo, ghi)
    y, wy = rule(flo + glo, fhi + ghi)
    fv = f_spec(xf[:, None])
    gv = g_spec(xg[:, None])
    conv = np.array([np.sum(wf * fv * g_spec((yy - xf)[:, None])) for yy in y])
    _, var_f = _variance_1d(fv, xf, wf)
    _, var_g = _variance_1d(gv, xg, wg)
    norm, var_c = _variance_1d(conv, y, wy)
    return {
        "sigma2_f": var_f,
        "sigma2_g": var_g,
        "sigma2_conv": var_c,
        "conv_norm": norm,
        "defect": abs(var_c - var_f - var_g),
    }


def heat_variance_check(t=0.5, initial=None):
    """sigma^2 of g_t * u0 against sigma^2(u0) + sigma^2(g_t), all by quadrature.

    ``sigma^2(g_t)`` is integrated, not assumed; it comes out as 6t. The
    increment ``t/2`` is reported for comparison only.
    """
    initial = exponential_3d() if initial is None else initial
    u0 = moments(initial, tol=1e-13)
    gt = moments(heat_kernel_3d(t), tol=1e-13)
    evolved = moments(heat_evolved(t, initial), tol=1e-12)
    return {
        "t": t,
        "sigma2_u0": u0["second_moment"],
        "sigma2_gt": gt["second_moment"],
        "sigma2_evolved": evolved["second_moment"],
        "evolved_norm": evolved["norm"],
        "defect": abs(evolved["second_moment"] - u0["second_moment"] - gt["second_moment"]),
        "increment_t_over_2": t / 2.0,
        "increment_defect_t_over_2": abs(evolved["second_moment"] - u0["second_moment"] - t / 2.0),
    }
