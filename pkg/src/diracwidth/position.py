"""Position-space wave functions psi_n(x) for isotropic envelopes.

With ``F(p) = n^{-3/2} phi(|p|/n)`` real and isotropic, the upper spinor
component is a j0 transform and the lower two share one j1 transform:

    S(r) = (2 pi)^{-3/2} 4 pi int p^2 F(p) a(p) j0(p r) dp
    T(r) = (2 pi)^{-3/2} 4 pi int p^3 F(p) c(p) j1(p r) dp

with ``a = (E + m) c``, ``c = 1 / sqrt(2 E (E + m))``; then
``|psi_n(x)|^2 = S(r)^2 + T(r)^2``. Lengths are in units of ``1/m``; the
Compton wavelength is ``2 pi / m`` in these units.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, QuadratureError
from .kernels import fourier_sum
from .quadrature import composite_legendre, integrate_oscillatory, radial_panels, spherical_rule
from .wavepacket import momentum_amplitude

_PREFACTOR = 4.0 * math.pi * (2.0 * math.pi) ** -1.5
TAIL_TOL = 1e-6


@dataclass(frozen=True)
class RadialGrid:
    """Radii (units 1/m) with weights for ``int_0^inf 4 pi r^2 (.) dr``."""
    r_values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.r_values, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if r.ndim != 1 or r.shape != w.shape:
            raise ValueError("r_values and weights must be 1-D of equal length")
        if np.any(np.diff(r) <= 0) or np.any(r < 0):
            raise ValueError("radii must be nonnegative and strictly increasing")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "r_values", r)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.r_values)

    @classmethod
    def geometric(cls, r_min=1e-3, r_max=40.0, points=400, order=10):
        """Gauss-Legendre panels that are uniform in ``ln r`` on ``[r_min, r_max]``.

        One extra panel covers ``[0, r_min]``, so ``points + order`` nodes in total.
        """
        if not 0 < r_min < r_max:
            raise ValueError("need 0 < r_min < r_max")
        panels = max(1, points // order)
        edges = np.geomspace(r_min, r_max, panels + 1)
        r, w = composite_legendre(np.concatenate([[0.0], edges]), order)
        return cls(r, 4.0 * math.pi * r * r * w)

    @classmethod
    def from_points(cls, r_values):
        """Grid for evaluation only; weights are trapezoid-like and not meant for moments."""
        r = np.asarray(r_values, dtype=float)
        w = np.gradient(r) if len(r) > 1 else np.ones(1)
        return cls(r, 4.0 * math.pi * np.maximum(r * r, 1e-300) * np.abs(w))


@dataclass(frozen=True)
class RadialDensityProfile:
    grid: RadialGrid
    scalar_part: np.ndarray
    vector_part: np.ndarray
    density: np.ndarray
    shell_density: np.ndarray
    n: int
    est_error: float

    @property
    def modal_radius(self):
        return float(self.grid.r_values[int(np.argmax(self.shell_density))])


def _radial_profile(wp):
    env = wp.envelope
    if not env.isotropic_modulus or any(env.center):
        raise PreconditionError("radial reduction needs an isotropic envelope")
    probe = np.array([0.3, 1.1, 2.7])
    dirs = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [0.48, -0.6, 0.64]])
    vals = np.array([env.profile(np.outer(probe, d)) for d in dirs])
    if np.max(np.abs(vals - vals[0])) > 1e-12 * np.max(np.abs(vals)) or np.max(np.abs(np.imag(vals))) > 0:
        raise PreconditionError("radial reduction needs a real, rotation-invariant profile")
    n, m = wp.n, wp.m

    def F(p):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        q = np.zeros((len(p), 3))
        q[:, 2] = p / n
        return n**-1.5 * np.real(env.profile(q))

    def scalar_amp(p):
        E = np.sqrt(p * p + m * m)
        c = 1.0 / np.sqrt(2.0 * E * (E + m))
        return _PREFACTOR * p * p * F(p) * (E + m) * c

    def vector_amp(p):
        E = np.sqrt(p * p + m * m)
        c = 1.0 / np.sqrt(2.0 * E * (E + m))
        return _PREFACTOR * p**3 * F(p) * c

    return scalar_amp, vector_amp


def _transform(amp, r, kind, pmax, tol):
    if r == 0.0:
        if kind == "j1":
            return 0.0, 0.0
        res = _integrate_plain(amp, pmax, tol)
    else:
        res = integrate_oscillatory(amp, r, kind, tol, upper=pmax, strict=False)
    if not res.converged:
        raise QuadratureError(f"{kind} transform at r={r} did not converge", res)
    return res.value, res.est_error


def _integrate_plain(amp, pmax, tol):
    from .quadrature import integrate_adaptive
    return integrate_adaptive(amp, (0.0, pmax), tol, strict=False)


def radial_components(wp, grid=None, tol=1e-10):
    """S(r), T(r) and the density on ``grid`` (default :meth:`RadialGrid.geometric`)."""
    grid = RadialGrid.geometric() if grid is None else grid
    scalar_amp, vector_amp = _radial_profile(wp)
    pmax = wp.momentum_cutoff
    S = np.empty(len(grid))
    T = np.empty(len(grid))
    err = 0.0
    for i, r in enumerate(grid.r_values):
        S[i], e1 = _transform(scalar_amp, float(r), "j0", pmax, tol)
        T[i], e2 = _transform(vector_amp, float(r), "j1", pmax, tol)
        err = max(err, e1, e2)
    density = S * S + T * T
    shell = 4.0 * math.pi * grid.r_values**2 * density
    return RadialDensityProfile(grid, S, T, density, shell, wp.n, err)


def density_3d_rule(wp, x_max, angular_order=None, radial_order=16):
    """Spherical product rule in momentum space resolving ``exp(i p.x)`` up to ``|x| = x_max``."""
    pmax = wp.momentum_cutoff
    if angular_order is None:
        angular_order = int(min(160, max(32, math.ceil(pmax * x_max / 2.0) + 24)))
    width = min(max(1.0, wp.n / 4.0), math.pi / max(x_max, 1e-12))
    rn, rw, dirs, dw = spherical_rule(pmax, radial_order, angular_order, core=min(wp.m, wp.n),
                                      width=width)
    P = (rn[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    W = (rw[:, None] * dw[None, :]).ravel()
    return P, W


def oracle_density_3d(wp, x, angular_order=None, radial_order=16, budget=3_000_000):
    """|psi_n(x)|^2 by brute-force 3D Fourier quadrature (test oracle).

    Returns ``(density, est_error)``; the error estimate comes from a rule
    with three quarters of the angular order.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xmax = float(np.max(np.linalg.norm(x, axis=1)))
    P, W = density_3d_rule(wp, xmax, angular_order, radial_order)
    if len(W) > budget:
        raise QuadratureError(f"3D oracle needs {len(W)} nodes, budget is {budget}")
    A = momentum_amplitude(wp, P)
    psi = fourier_sum(P, W, A, x) * (2.0 * math.pi) ** -1.5
    rho = np.sum(np.abs(psi) ** 2, axis=1)
    order = angular_order or int(min(160, max(32, math.ceil(wp.momentum_cutoff * xmax / 2.0) + 24)))
    P2, W2 = density_3d_rule(wp, xmax, max(16, (3 * order) // 4), radial_order)
    psi2 = fourier_sum(P2, W2, momentum_amplitude(wp, P2), x) * (2.0 * math.pi) ** -1.5
    err = np.abs(rho - np.sum(np.abs(psi2) ** 2, axis=1))
    if len(rho) == 1:
        return float(rho[0]), float(err[0])
    return rho, err


def position_moments(profile, check_tail=True):
    """Norm and ``<|x|^2>`` from the radial density.

    ``<x> = 0`` here because the density is rotation invariant by construction.
    """
    w = profile.grid.weights
    norm = float(np.sum(w * profile.density))
    second = float(np.sum(w * profile.density * profile.grid.r_values**2))
    if check_tail and norm < 1.0 - TAIL_TOL:
        raise PreconditionError(f"grid misses probability mass: norm={norm:.10f}")
    return {"norm": norm, "second_moment": second}


def density_scan(n_list, template, grid=None, tol=1e-10):
    """One :class:`RadialDensityProfile` per ``n``, in the given order."""
    grid = RadialGrid.geometric() if grid is None else grid
    return [radial_components(template.with_n(int(n)), grid, tol) for n in n_list]


__all__ = [
    "RadialGrid", "RadialDensityProfile", "radial_components", "oracle_density_3d",
    "position_moments", "density_scan", "density_3d_rule", "radial_panels",
]
