"""Positive-energy wave packets psi_n(p) = n^{-3/2} f(p/n) u(p) and their moments.

Position moments are evaluated in momentum space:

    <x_j>   = int psi^dagger (i d/dp_j) psi d^3p
    <x^2>   = sum_j int |d psi / d p_j|^2 d^3p

and each ``int |d_j psi|^2`` is split into the four pieces

    I   = int |d_j F|^2 |u|^2             II  = int (d_j F)^* F  u^dagger d_j u
    III = int F^* d_j F (d_j u)^dagger u   IV  = int |F|^2 |d_j u|^2

with ``F(p) = n^{-3/2} f(p/n)``. All integrals are taken over R^3 by product
rules in spherical coordinates. For envelopes whose modulus is isotropic the
angular dependence of every integrand is a polynomial of degree <= 4 in the
direction, so a small exact angular rule is combined with adaptive
Gauss-Kronrod in ``|p|`` ("radial" route). Other envelopes use a full
spherical product rule ("tensor" route).
"""
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .dirac import spinors
from .errors import EnvelopeError, QuadratureError
from .quadrature import integrate_adaptive, integrate_tensor3, radial_panels, spherical_rule

NORM_TOL = 1e-8
CONSTANT_RTOL = 1e-3  # divergence test; c2 with an off-centre kink is good to ~1e-5
GAUSS_NORM = math.pi**-0.75
# Gaussian decays below 1e-14 of its peak beyond this radius.
GAUSS_EXTENT = 8.0

# Exact for polynomials of degree <= 7 on the sphere.
_EXACT_DIRS = spherical_rule(1.0, 1, 4, azimuthal_order=8)[2:]

_N_TERMS = 16  # norm, mean(3), I(3), II(3), III(3), IV(3)


@dataclass(frozen=True)
class ConditionConstants:
    """Envelope constants bounding the terms I, II/III and IV.

    ``c1[j] = int |d_j f|^2``, ``c2[j] = 2 sqrt(3) int |d_j f f| / |p|`` and
    ``c3 = 12 int |f|^2 / p^2``.
    """
    c1: tuple
    c2: tuple
    c3: float

    def axis_bound(self, j):
        return self.c1[j] + 2.0 * self.c2[j] + self.c3

    def second_moment_bound(self, n):
        return sum(self.axis_bound(j) for j in range(3)) / n**2


@dataclass(frozen=True, eq=False)
class Envelope:
    """Momentum profile ``f`` with its gradient.

    ``profile`` maps an ``(K, 3)`` array of momenta to ``(K,)`` amplitudes,
    ``gradient`` to ``(K, 3)``. ``extent`` is the radius around ``center``
    beyond which ``|f| < 1e-14``. Set ``isotropic_modulus`` when
    ``f(q) = phi(|q|) exp(-i q.a)``; this enables the radial route.
    Normalization and finiteness of the condition integrals are verified on
    construction.
    """
    profile: object
    gradient: object
    label: str
    extent: float = GAUSS_EXTENT
    center: tuple = (0.0, 0.0, 0.0)
    isotropic_modulus: bool = False
    norm: float = field(init=False, default=float("nan"))
    condition_constants: ConditionConstants = field(init=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        norm, consts = _envelope_integrals(self)
        if not abs(norm - 1.0) <= NORM_TOL:
            raise EnvelopeError(f"envelope {self.label!r} has L2 norm^2 {norm:.12g}, expected 1")
        values = np.array(list(consts.c1) + list(consts.c2) + [consts.c3])
        # A divergent integral shows up as a large change under radial refinement.
        _, coarse = _envelope_integrals(self, radial_order=12)
        coarse = np.array(list(coarse.c1) + list(coarse.c2) + [coarse.c3])
        if not np.all(np.isfinite(values)) or np.any(np.abs(values - coarse) > CONSTANT_RTOL * np.abs(values)):
            raise EnvelopeError(f"envelope {self.label!r} has divergent condition integrals")
        object.__setattr__(self, "norm", norm)
        object.__setattr__(self, "condition_constants", consts)

    @property
    def radius(self):
        return self.extent + math.sqrt(sum(c * c for c in self.center))

    def scaled(self, factor):
        """A copy multiplied by ``factor`` (fails validation unless |factor| = 1)."""
        return Envelope(lambda q: factor * self.profile(q), lambda q: factor * self.gradient(q),
                        f"{factor}*{self.label}", self.extent, self.center, self.isotropic_modulus)


def _envelope_integrals(env, angular_order=48, radial_order=24):
    radius = env.radius
    rn, rw, dirs, dw = spherical_rule(radius, radial_order, angular_order, core=1.0, width=0.5)
    q = (rn[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    f = np.asarray(env.profile(q)).reshape(len(rn), len(dw))
    g = np.asarray(env.gradient(q)).reshape(len(rn), len(dw), 3)
    w = rw[:, None] * dw[None, :]
    af2 = np.abs(f) ** 2
    norm = float(np.sum(w * af2))
    c1 = tuple(float(np.sum(w * np.abs(g[..., j]) ** 2)) for j in range(3))
    c3 = float(12.0 * np.sum(w * af2 / rn[:, None] ** 2))
    # |d_j f f| has a kink where d_j f vanishes; split the polar integral at the
    # equator of a frame whose polar axis is e_j.
    c2 = []
    ct, wt = np.polynomial.legendre.leggauss(angular_order // 2)
    ct = np.concatenate([0.5 * (ct - 1.0), 0.5 * (ct + 1.0)])
    wt = np.concatenate([0.5 * wt, 0.5 * wt])
    nphi = 2 * angular_order
    phi = 2.0 * np.pi * (np.arange(nphi) + 0.5) / nphi
    st = np.sqrt(1.0 - ct**2)
    local = np.stack([(st[:, None] * np.cos(phi)).ravel(), (st[:, None] * np.sin(phi)).ravel(),
                      np.repeat(ct, nphi)], axis=1)
    lw = np.repeat(wt, nphi) * 2.0 * np.pi / nphi
    for j in range(3):
        perm = [(j + 1) % 3, (j + 2) % 3, j]
        d = np.empty_like(local)
        d[:, perm] = local
        qj = (rn[:, None, None] * d[None, :, :]).reshape(-1, 3)
        fj = np.asarray(env.profile(qj)).reshape(len(rn), len(lw))
        gj = np.asarray(env.gradient(qj))[:, j].reshape(len(rn), len(lw))
        wj = rw[:, None] * lw[None, :]
        c2.append(float(2.0 * math.sqrt(3.0) * np.sum(wj * np.abs(gj * fj) / rn[:, None])))
    return norm, ConditionConstants(c1, tuple(c2), c3)


def gaussian_envelope():
    """Isotropic Gaussian ``f(p) = pi^{-3/4} exp(-|p|^2/2)``."""
    def profile(q):
        q = np.asarray(q, dtype=float)
        return GAUSS_NORM * np.exp(-0.5 * np.sum(q * q, axis=-1))

    def gradient(q):
        q = np.asarray(q, dtype=float)
        return -q * profile(q)[..., None]

    return Envelope(profile, gradient, "gaussian", isotropic_modulus=True)


def shifted_gaussian_envelope(shift):
    """Gaussian centred at momentum ``shift`` (not isotropic)."""
    b = np.asarray(shift, dtype=float)

    def profile(q):
        d = np.asarray(q, dtype=float) - b
        return GAUSS_NORM * np.exp(-0.5 * np.sum(d * d, axis=-1))

    def gradient(q):
        d = np.asarray(q, dtype=float) - b
        return -d * profile(q)[..., None]

    return Envelope(profile, gradient, f"gaussian shifted by {tuple(b)}", center=tuple(b))


def phase_gaussian_envelope(offset):
    """Gaussian times ``exp(-i q.a)``: the packet is translated by ``a/n`` in position."""
    a = np.asarray(offset, dtype=float)

    def profile(q):
        q = np.asarray(q, dtype=float)
        return GAUSS_NORM * np.exp(-0.5 * np.sum(q * q, axis=-1) - 1j * (q @ a))

    def gradient(q):
        q = np.asarray(q, dtype=float)
        return (-q - 1j * a) * profile(q)[..., None]

    return Envelope(profile, gradient, f"gaussian with phase offset {tuple(a)}", isotropic_modulus=True)


@dataclass(frozen=True, eq=False)
class WavePacket:
    envelope: Envelope
    n: int = 1
    m: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("scale index n must be a positive integer")
        if not self.m > 0:
            raise ValueError("mass must be positive")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "m", float(self.m))

    def with_n(self, n):
        return WavePacket(self.envelope, n, self.m)

    @property
    def momentum_cutoff(self):
        return self.n * self.envelope.radius


@dataclass(frozen=True)
class TermBreakdown:
    axis: int
    I: complex
    II: complex
    III: complex
    IV: complex
    total: float
    quadrature_error: float


@dataclass(frozen=True)
class MomentReport:
    n: int
    mean_x: tuple
    second_moment: float
    sigma: float
    quadrature_error: float
    mean_imag_residue: float = 0.0
    error: str = None


def momentum_amplitude(wp, p):
    """psi_n(p) = n^{-3/2} f(p/n) u(p) for one momentum (shape (4,)) or many ((K, 4))."""
    P = np.asarray(p, dtype=float)
    single = P.ndim == 1
    P = P.reshape(-1, 3)
    f = np.asarray(wp.envelope.profile(P / wp.n))
    u, _ = spinors(P, wp.m)
    out = wp.n**-1.5 * f[:, None] * u
    return out[0] if single else out


def _local_terms(wp, P):
    n = wp.n
    q = P / n
    F = n**-1.5 * np.asarray(wp.envelope.profile(q), dtype=complex)
    dF = n**-2.5 * np.asarray(wp.envelope.gradient(q), dtype=complex)
    u, du = spinors(P, wp.m)
    uu = np.sum(np.abs(u) ** 2, axis=1)
    udu = np.einsum("ki,kji->kj", u.conj(), du)
    out = np.empty((len(P), _N_TERMS), dtype=complex)
    out[:, 0] = np.abs(F) ** 2 * uu
    out[:, 1:4] = 1j * F.conj()[:, None] * (dF * uu[:, None] + F[:, None] * udu)
    out[:, 4:7] = np.abs(dF) ** 2 * uu[:, None]
    out[:, 7:10] = dF.conj() * F[:, None] * udu
    out[:, 10:13] = F.conj()[:, None] * dF * udu.conj()
    out[:, 13:16] = (np.abs(F) ** 2)[:, None] * np.sum(np.abs(du) ** 2, axis=2)
    return out


def _radial_breakpoints(wp, pmax):
    pts = [wp.m * 2.0**k for k in range(-3, 4)] + [wp.n * 2.0**k for k in range(-2, 3)]
    return sorted({p for p in pts if 0 < p < pmax})


def _moments_radial(wp, tol):
    dirs, dw = _EXACT_DIRS

    def integrand(p):
        P = (p[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
        vals = _local_terms(wp, P).reshape(len(p), len(dw), _N_TERMS)
        return np.einsum("kdt,d->kt", vals, dw) * (p * p)[:, None]

    pmax = wp.momentum_cutoff
    res = integrate_adaptive(integrand, (0.0, pmax), tol, points=_radial_breakpoints(wp, pmax),
                             strict=False)
    if not res.converged:
        raise QuadratureError(f"moment integrals for n={wp.n} did not converge", res)
    return np.asarray(res.value), res.est_error


def _tensor_layout(wp):
    core = min(wp.m, float(wp.n))
    width = max(core, wp.n / 4.0)
    return dict(radius=wp.momentum_cutoff, core=core, panel_width=width)


def _moments_tensor(wp, order):
    res = integrate_tensor3(lambda P: _local_terms(wp, P), order, radial_order=16, **_tensor_layout(wp))
    return np.asarray(res.value), res.est_error


@functools.lru_cache(maxsize=256)
def _moments(wp, method, tol, order):
    if method == "auto":
        method = "radial" if wp.envelope.isotropic_modulus else "tensor"
    if method == "radial":
        if not wp.envelope.isotropic_modulus:
            raise ValueError("radial route needs an envelope with isotropic modulus")
        return _moments_radial(wp, tol)
    if method == "tensor":
        return _moments_tensor(wp, order)
    raise ValueError(f"unknown method {method!r}")


def moment_integrals(wp, method="auto", tol=1e-13, order=32):
    """All momentum-space integrals in one pass.

    Returns ``(values, est_error)`` with ``values`` a dict holding ``norm``,
    ``mean`` (3 complex), and ``I``, ``II``, ``III``, ``IV`` (3 complex each).
    """
    v, err = _moments(wp, method, tol, order)
    return {
        "norm": v[0].real,
        "mean": v[1:4],
        "I": v[4:7],
        "II": v[7:10],
        "III": v[10:13],
        "IV": v[13:16],
    }, err


def norm_momentum(wp, **kw):
    """int |psi_n(p)|^2 d^3p (the spinor norm is evaluated, not assumed)."""
    vals, _ = moment_integrals(wp, **kw)
    return float(vals["norm"])


def mean_position(wp, **kw):
    """<x> as a real 3-vector; the imaginary residue is available via :func:`sigma`."""
    vals, _ = moment_integrals(wp, **kw)
    return vals["mean"].real.copy()


def term_decomposition(wp, j, **kw):
    """Terms I-IV of ``int |d psi / d p_j|^2`` for axis ``j`` in {0, 1, 2}."""
    vals, err = moment_integrals(wp, **kw)
    I, II, III, IV = (complex(vals[k][j]) for k in ("I", "II", "III", "IV"))
    return TermBreakdown(j, I, II, III, IV, (I + II + III + IV).real, err)


def second_moment_position(wp, **kw):
    """<x^2> = sum_j (I + II + III + IV)_j."""
    vals, _ = moment_integrals(wp, **kw)
    return float(sum((vals["I"] + vals["II"] + vals["III"] + vals["IV"]).real))


def second_moment_tensor(wp, order=32, radial_order=16):
    """Independent check: sum_j int |d_j psi|^2 from the full product rule."""
    def integrand(P):
        n = wp.n
        F = n**-1.5 * np.asarray(wp.envelope.profile(P / n), dtype=complex)
        dF = n**-2.5 * np.asarray(wp.envelope.gradient(P / n), dtype=complex)
        u, du = spinors(P, wp.m)
        dpsi = dF[:, :, None] * u[:, None, :] + F[:, None, None] * du
        return np.sum(np.abs(dpsi) ** 2, axis=(1, 2))

    return integrate_tensor3(integrand, order, radial_order=radial_order, **_tensor_layout(wp))


def sigma(wp, **kw):
    """Position uncertainty sqrt(<x^2> - |<x>|^2) with its ingredients."""
    vals, err = moment_integrals(wp, **kw)
    mean = vals["mean"]
    second = float(sum((vals["I"] + vals["II"] + vals["III"] + vals["IV"]).real))
    var = second - float(np.sum(mean.real**2))
    return MomentReport(
        n=wp.n,
        mean_x=tuple(float(v) for v in mean.real),
        second_moment=second,
        sigma=math.sqrt(max(var, 0.0)),
        quadrature_error=float(err),
        mean_imag_residue=float(np.max(np.abs(mean.imag))),
    )


def sigma_scan(n_list, template, **kw):
    """One :class:`MomentReport` per ``n``; failures are recorded and the scan continues."""
    n_list = list(n_list)
    if not n_list or any(int(n) != n or n < 1 for n in n_list):
        raise ValueError("n_list must be a nonempty list of positive integers")
    out = []
    for n in n_list:
        try:
            out.append(sigma(template.with_n(int(n)), **kw))
        except QuadratureError as exc:
            nan = float("nan")
            out.append(MomentReport(int(n), (nan, nan, nan), nan, nan, nan, nan, str(exc)))
    return out


def sample_radial_panels(wp):
    """Radial panel edges used by the tensor route (exposed for diagnostics)."""
    lay = _tensor_layout(wp)
    return radial_panels(lay["radius"], core=lay["core"], width=lay["panel_width"])


@dataclass(frozen=True)
class TermScaling:
    """How the terms I-IV shrink with ``n``.

    ``magnitudes[name]`` holds ``sum_j |term_j|`` per ``n``. ``fit_slopes`` are
    least-squares log-log slopes over the whole ``n_list``; ``terminal_slopes``
    use only the last two entries, i.e. the local exponent at the largest ``n``.
    """
    n_list: tuple
    magnitudes: dict
    I_times_n2: np.ndarray
    fit_slopes: dict
    terminal_slopes: dict
    conjugacy_defect: float


def term_scaling(envelope, n_list, m=1.0, **kw):
    n_list = tuple(int(n) for n in n_list)
    mags = {k: [] for k in ("I", "II", "III", "IV")}
    i_n2 = []
    conj = 0.0
    for n in n_list:
        vals, _ = moment_integrals(WavePacket(envelope, n, m), **kw)
        for k in mags:
            mags[k].append(float(np.sum(np.abs(vals[k]))))
        i_n2.append(vals["I"].real * n * n)
        conj = max(conj, float(np.max(np.abs(vals["III"] - vals["II"].conj()))))
    logn = np.log(np.asarray(n_list, dtype=float))
    mags = {k: np.asarray(v) for k, v in mags.items()}
    fit = {k: float(np.polyfit(logn, np.log(v), 1)[0]) for k, v in mags.items()}
    term = {k: float((math.log(v[-1]) - math.log(v[-2])) / (logn[-1] - logn[-2])) for k, v in mags.items()}
    return TermScaling(n_list, mags, np.asarray(i_n2), fit, term, conj)
