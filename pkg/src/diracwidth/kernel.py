"""Position-space kernel of the positive-energy projector.

With the convention ``(P psi)(x) = (2 pi)^{-3/2} int K(x - y) psi(y) d^3y`` the
kernel of ``P_+(p) = 1/2 + (beta m + alpha.p) / (2E)`` is

    K(x) = (1/2) (2 pi)^{3/2} delta^3(x) + M(x),
    M(x) = (1/2) beta m F(|x|) + (1/2) alpha.G(x),

    F(r)   = 2 m K1(m r) / (sqrt(2 pi) r),
    G_j(x) = -i dF/dx_j = i x_j (2 m^2 K0 / r^2 + 4 m K1 / r^3) / sqrt(2 pi).

Only ``M`` is evaluated; the delta term is carried as ``delta_coefficient``.
``M`` is not Hermitian: the alpha part is anti-Hermitian and odd, so the
symmetry is ``M(x)^dagger = M(-x)``, which is what a Hermitian ``P_+(p)``
implies for its kernel.
"""
import math
import os
from dataclasses import dataclass

import numpy as np

from .dirac import ALPHA, BETA, IDENTITY4, projector_momentum
from .errors import DomainError, QuadratureError
from .kernels import fourier_sum
from .quadrature import integrate_oscillatory, spherical_rule
from .special import bessel_k01

SQRT_2PI = math.sqrt(2.0 * math.pi)
DELTA_COEFFICIENT = 0.5
FAULT_ENV = "DIRACWIDTH_INJECT_FAULT"


def _fault(name):
    return os.environ.get(FAULT_ENV, "") == name


def _radius(x):
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError("position must be a 3-vector")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise DomainError("kernel is singular at x = 0")
    return x, r


def _check_mass(m):
    if not m > 0:
        raise DomainError("mass must be positive")


def kernel_F(r, m=1.0):
    """F(r) = 2 m K1(m r) / (sqrt(2 pi) r); accepts scalars or arrays."""
    _check_mass(m)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("F needs r > 0")
    _, k1 = bessel_k01(m * r)
    out = 2.0 * m * np.asarray(k1) / (SQRT_2PI * r)
    return float(out) if out.ndim == 0 else out


def kernel_G(x, m=1.0):
    """G(x) = -i grad F(|x|), a purely imaginary 3-vector."""
    _check_mass(m)
    x, r = _radius(x)
    k0, k1 = bessel_k01(m * r)
    radial = (2.0 * m * m * k0 / r**2 + 4.0 * m * k1 / r**3) / SQRT_2PI
    g = 1j * x * radial
    return -g if _fault("kernel_G_sign") else g


def kernel_regular_part(x, m=1.0):
    """M(x) = beta m^2 K1/(sqrt(2 pi) r) + i alpha.x (m^2 K0/r^2 + 2 m K1/r^3)/sqrt(2 pi)."""
    _check_mass(m)
    x, r = _radius(x)
    k0, k1 = bessel_k01(m * r)
    scalar = m * m * k1 / (SQRT_2PI * r)
    radial = (m * m * k0 / r**2 + 2.0 * m * k1 / r**3) / SQRT_2PI
    return scalar * BETA + 1j * radial * np.einsum("j,jab->ab", x, ALPHA)


def kernel_from_profiles(x, m=1.0):
    """(1/2) beta m F + (1/2) alpha.G assembled from :func:`kernel_F` and :func:`kernel_G`."""
    x, r = _radius(x)
    return 0.5 * m * kernel_F(r, m) * BETA + 0.5 * np.einsum("j,jab->ab", kernel_G(x, m), ALPHA)


@dataclass(frozen=True)
class KernelSample:
    x: tuple
    regular_part: np.ndarray
    F_value: float
    G_values: tuple
    delta_coefficient: float = DELTA_COEFFICIENT

    @property
    def reflection_defect(self):
        """max |M(x)^dagger - M(-x)|."""
        other = kernel_regular_part(-np.asarray(self.x), self._mass)
        return float(np.max(np.abs(self.regular_part.conj().T - other)))

    @property
    def hermiticity_defect(self):
        """max |M - M^dagger|; nonzero because the alpha part is anti-Hermitian."""
        return float(np.max(np.abs(self.regular_part - self.regular_part.conj().T)))

    _mass: float = 1.0


def kernel_sample(x, m=1.0):
    x, r = _radius(x)
    return KernelSample(tuple(x), kernel_regular_part(x, m), kernel_F(r, m),
                        tuple(kernel_G(x, m)), _mass=float(m))


def projected_delta_column(s, x, m=1.0):
    """(2 pi)^{-3/2} M(x) e_s for spinor index ``s`` in 1..4 (regular part only).

    The delta contribution ``(1/2) delta^3(x) e_s`` is not included.
    """
    if s not in (1, 2, 3, 4):
        raise ValueError("spinor index s must be 1, 2, 3 or 4")
    return kernel_regular_part(x, m)[:, s - 1] * (2.0 * math.pi) ** -1.5


def kernel_F_numeric(r, m=1.0, tol=1e-12):
    """F(r) from its Fourier integral, for validating :func:`kernel_F`.

    ``int_0^inf 2 p sin(p r) / sqrt(p^2 + m^2) dp`` does not converge absolutely;
    one integration by parts gives the equivalent
    ``(2 / r) int_0^inf m^2 cos(p r) / (p^2 + m^2)^{3/2} dp``, which does.
    Returns a :class:`~diracwidth.quadrature.QuadratureResult`.
    """
    _check_mass(m)
    if not r > 0:
        raise DomainError("F needs r > 0")
    res = integrate_oscillatory(lambda p: m * m / (p * p + m * m) ** 1.5, r, "cos", tol, strict=False)
    scale = 2.0 / (SQRT_2PI * r * r)
    out = type(res)(res.value * scale, res.est_error * scale, res.evaluations, res.converged)
    if not out.converged:
        raise QuadratureError(f"F integral at r={r} did not converge", out)
    return out


def kernel_profile(r_grid, m=1.0, numeric=False):
    """Columns of the kernel profile table, keyed by name."""
    r = np.asarray(r_grid, dtype=float)
    if np.any(r <= 0):
        raise DomainError("profile radii must be positive")
    z = m * r
    k0, k1 = bessel_k01(z)
    k0, k1 = np.atleast_1d(k0), np.atleast_1d(k1)
    F = np.atleast_1d(kernel_F(r, m))
    col = np.array([np.linalg.norm(kernel_regular_part((ri, 0.0, 0.0), m)[:, 0]) for ri in r])
    table = {
        "r": r,
        "k0_over_r": k0 / z,
        "k1_over_r": k1 / z,
        "k1_over_r2": k1 / z**2,
        "F": F,
        "column_norm": col,
    }
    if numeric:
        Fn = np.array([kernel_F_numeric(ri, m).value for ri in r])
        table["F_numeric"] = Fn
        table["rel_diff"] = np.abs(F - Fn) / np.abs(F)
    return table


# ---------------------------------------------------------------------------
# 3D quadrature oracles

def _spherical_fourier(amplitude, x, pmax, *, sign=1.0, angular_order=None, radial_order=16,
                       core=1.0, chunk=64):
    """(2 pi)^{-3/2} int_{|p| < pmax} amplitude(P) exp(sign i p.x) d^3p, shells in chunks."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    xmax = float(np.max(np.linalg.norm(x, axis=1)))
    if angular_order is None:
        angular_order = int(min(200, math.ceil(pmax * xmax / 2.0) + 24))
    width = min(1.0, math.pi / max(xmax, 1e-12))
    rn, rw, dirs, dw = spherical_rule(pmax, radial_order, angular_order, core=core, width=width)
    total = None
    for start in range(0, len(rn), chunk):
        sl = slice(start, start + chunk)
        P = (rn[sl, None, None] * dirs[None, :, :]).reshape(-1, 3)
        W = (rw[sl, None] * dw[None, :]).ravel()
        A = amplitude(P)
        part = fourier_sum(P, W, A, sign * x)
        total = part if total is None else total + part
    return total * (2.0 * math.pi) ** -1.5


def _damping(t, order):
    """exp(-t) * sum_{k < order} t^k / k!, equal to 1 - O(t^order) near t = 0."""
    term = np.ones_like(t)
    acc = np.ones_like(t)
    for k in range(1, order):
        term = term * t / k
        acc = acc + term
    return np.exp(-t) * acc


def kernel_G_oracle(x, m=1.0, eps=None, order=4, angular_order=None):
    """G(x) from 3D quadrature of ``(2 pi)^{-3/2} int p exp(i p.x) / E d^3p``.

    The integral only exists as a distribution, so the integrand is damped by
    ``exp(-t) sum_{k<order} t^k/k!`` with ``t = eps p^2``. The damping equals
    ``1 - O(t^order)``, so for ``x != 0`` the bias is ``O(eps^order)`` plus
    terms of size ``exp(-r^2 / 4 eps)``; two values of ``eps`` are combined by
    one Richardson step. Returns ``(G, est_error)``.
    """
    x, r = _radius(x)
    if eps is None:
        e0 = r * r / 160.0
        eps = (e0, e0 / 2.0)
    vals = []
    for e in eps:
        pmax = math.sqrt((45.0 + 4.0 * order) / e)

        def amp(P, e=e):
            p2 = np.sum(P * P, axis=1)
            return P * (_damping(e * p2, order) / np.sqrt(p2 + m * m))[:, None]

        vals.append(_spherical_fourier(amp, x, pmax, angular_order=angular_order, core=min(1.0, m))[0])
    k = 2.0**order
    best = (k * vals[1] - vals[0]) / (k - 1.0)
    err = float(np.max(np.abs(best - vals[1])))
    return best, err


def regular_part_fourier(p, m=1.0, radius=40.0, angular_order=24, radial_order=16):
    """(2 pi)^{-3/2} int M(x) exp(-i p.x) d^3x by a spherical rule in x.

    Should reproduce ``P_+(p) - Id/2``. The odd ``1/r^3`` part of ``M`` cancels
    shell by shell because the angular rule is symmetric under ``x -> -x``.
    """
    p = np.asarray(p, dtype=float)
    rn, rw, dirs, dw = spherical_rule(radius, radial_order, angular_order, core=1.0 / m, width=1.0 / m)
    total = np.zeros((4, 4), dtype=complex)
    for r, w in zip(rn, rw):
        X = r * dirs
        k0, k1 = bessel_k01(m * r)
        scalar = m * m * k1 / (SQRT_2PI * r)
        radial = (m * m * k0 / r**2 + 2.0 * m * k1 / r**3) / SQRT_2PI
        phase = np.exp(-1j * (X @ p)) * dw
        total += w * (scalar * np.sum(phase) * BETA
                      + 1j * radial * np.einsum("k,kj,jab->ab", phase, X, ALPHA))
    return total * (2.0 * math.pi) ** -1.5


def representation_defect(p, m=1.0, **kw):
    """max |FT[M](p) - (P_+(p) - Id/2)|."""
    target = projector_momentum(np.asarray(p, dtype=float), m) - 0.5 * IDENTITY4
    return float(np.max(np.abs(regular_part_fourier(p, m, **kw) - target)))
