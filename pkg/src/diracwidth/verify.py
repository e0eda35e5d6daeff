"""The invariant suite behind ``diracwidth verify``.

Each check returns a :class:`Check`; :func:`run_verification` runs them in a
fixed order and assembles a JSON-ready report with no timings, so the same
seed gives byte-identical output.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from ._accel import backend_name
from .delta import (
    convergence_report, convolution_variance_check, converse_check, gaussian_scaled,
    heat_variance_check, moments, scaled_gaussian_family, spread_delta_density, spread_delta_second_moment,
)
from .dirac import algebra_defects, check_spinor_bound, clifford_defects, gradient_fd_defect
from .kernel import (
    kernel_F, kernel_F_numeric, kernel_G, kernel_from_profiles, kernel_regular_part,
    representation_defect,
)
from .position import position_moments, radial_components
from .special import verify_bessel_identities
from .wavepacket import (
    WavePacket, gaussian_envelope, norm_momentum, second_moment_position, second_moment_tensor,
    shifted_gaussian_envelope, sigma_scan, term_scaling,
)

GAUSS_CONSTANTS = (0.5, math.sqrt(3.0), 24.0)
SHIFT = (0.5, 0.5, 0.0)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


def _check(name, value, tol, detail="", passed=None):
    value = float(value)
    ok = (value <= tol) if passed is None else bool(passed)
    return Check(name, bool(ok and math.isfinite(value)), value, float(tol), detail)


def _rng(seed, stream):
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


# ---------------------------------------------------------------------------
# individual checks

def check_dirac(seed):
    cl = max(clifford_defects().values())
    alg = algebra_defects(1000, seed=seed)
    bound = check_spinor_bound(100_000, seed=seed)
    comp = max(v - b for v, b in zip(bound.per_component, bound.component_bounds))
    return [
        _check("dirac.clifford", cl, 1e-14),
        _check("dirac.algebra", max(alg.values()), 1e-12, ", ".join(f"{k}={v:.2e}" for k, v in alg.items())),
        _check("dirac.gradient_bound", bound.overall, 2.0 * math.sqrt(3.0),
               f"per_component={tuple(round(v, 6) for v in bound.per_component)}"),
        _check("dirac.component_bounds", comp, 1e-15, "max excess over per-component bounds"),
        _check("dirac.gradient_fd", gradient_fd_defect(1000, seed=seed + 1), 1e-6),
    ]


def check_special():
    rep = verify_bessel_identities([0.1, 0.5, 0.7, 1.0, 2.0, 5.0, 10.0])
    deriv = max(rep.deviations[k] for k in ("K0_derivative", "K1_derivative", "K1_half_sum"))
    exact = max(rep.deviations[k] for k in ("K2_recurrence", "basset"))
    return [
        _check("special.bessel_derivatives", deriv, 1e-6),
        _check("special.bessel_exact_identities", exact, 1e-8),
    ]


def _fd_gradient_F(x, m, h=1e-5):
    g = np.empty(3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        g[j] = (kernel_F(np.linalg.norm(x + e), m) - kernel_F(np.linalg.norm(x - e), m)) / (2.0 * h)
    return g


def check_kernel(seed, m=1.0):
    radii = (0.1, 0.5, 1.0, 2.0, 5.0)
    rel = max(abs(kernel_F_numeric(r, m).value / kernel_F(r, m) - 1.0) for r in radii)
    rng = _rng(seed, 11)
    grad = 0.0
    refl = 0.0
    cons = 0.0
    for _ in range(20):
        d = rng.normal(size=3)
        x = d / np.linalg.norm(d) * rng.uniform(0.3, 3.0)
        G = kernel_G(x, m)
        grad = max(grad, float(np.max(np.abs(G - (-1j) * _fd_gradient_F(x, m))) / np.max(np.abs(G))))
        M = kernel_regular_part(x, m)
        refl = max(refl, float(np.max(np.abs(M.conj().T - kernel_regular_part(-x, m)))))
        cons = max(cons, float(np.max(np.abs(M - kernel_from_profiles(x, m)))))
    decay = float(np.max(np.abs(kernel_regular_part(np.array([30.0 / m, 0.0, 0.0]), m))))
    rep = max(representation_defect(p, m) for p in ([0.0, 0.0, 0.0], [0.3, -0.2, 0.5]))
    return [
        _check("kernel.F_vs_quadrature", rel, 1e-6, f"r in {radii}"),
        _check("kernel.gradient_identity", grad, 1e-6, "G = -i grad F at 20 seeded points"),
        _check("kernel.reflection_symmetry", refl, 1e-12, "M(x)^dagger = M(-x)"),
        _check("kernel.profile_assembly", cons, 1e-12, "M = beta m F/2 + alpha.G/2"),
        _check("kernel.decay", decay, 1e-10, "max |M| at |x| = 30/m"),
        _check("kernel.representation", rep, 1e-4, "Fourier transform of M is P+(p) - 1/2"),
    ]


def check_wavepacket():
    env = gaussian_envelope()
    c = env.condition_constants
    const_dev = max(max(abs(v - GAUSS_CONSTANTS[0]) for v in c.c1),
                    max(abs(v - GAUSS_CONSTANTS[1]) for v in c.c2), abs(c.c3 - GAUSS_CONSTANTS[2]))
    template = WavePacket(env, 1)
    norms = max(abs(norm_momentum(template.with_n(n)) - 1.0) for n in (1, 2, 4, 8, 16, 20, 32, 64))
    rows = sigma_scan(range(1, 20), template)
    sig = np.array([r.sigma for r in rows])
    bound = 3.0 * (GAUSS_CONSTANTS[0] + 2.0 * GAUSS_CONSTANTS[1] + GAUSS_CONSTANTS[2])
    excess = max(r.sigma**2 - bound / r.n**2 for r in rows)
    ns = np.arange(4, 33)
    slope = float(np.polyfit(np.log(ns), np.log([r.sigma for r in sigma_scan(ns, template)]), 1)[0])
    tensor = second_moment_tensor(template).value
    oracle = abs(tensor / second_moment_position(template) - 1.0)
    sc = term_scaling(shifted_gaussian_envelope(SHIFT), (4, 8, 16, 32, 64))
    i_const = float(np.max(np.abs(sc.I_times_n2 / sc.I_times_n2[0] - 1.0)))
    worst_slope = max(abs(sc.terminal_slopes[k] + 2.0) for k in ("II", "III", "IV"))
    fits = ", ".join(f"{k}={sc.fit_slopes[k]:.4f}" for k in ("II", "III", "IV"))
    terms = ", ".join(f"{k}={sc.terminal_slopes[k]:.4f}" for k in ("II", "III", "IV"))
    return [
        _check("wavepacket.gaussian_constants", const_dev, 1e-8, f"c1={c.c1[0]:.12f} c2={c.c2[0]:.12f} c3={c.c3:.12f}"),
        _check("wavepacket.norm", norms, 1e-8, "n in {1,2,4,8,16,20,32,64}"),
        _check("wavepacket.sigma_decreasing", float(np.max(np.diff(sig))), 0.0, "n = 1..19",
               passed=bool(np.all(np.diff(sig) < 0))),
        _check("wavepacket.sigma_bound", excess, 0.0, f"sigma^2 - {bound:.4f}/n^2, n = 1..19"),
        _check("wavepacket.sigma_slope", abs(slope + 1.0), 0.2, f"slope={slope:.4f} over n = 4..32"),
        _check("wavepacket.tensor_oracle", oracle, 1e-6, "n = 1 second moment vs full 3D rule"),
        _check("wavepacket.term_I_scaling", i_const, 1e-8, "n^2 I constant, shifted Gaussian"),
        _check("wavepacket.term_conjugacy", sc.conjugacy_defect, 1e-10, "III = conj(II)"),
        _check("wavepacket.term_slopes", worst_slope, 0.15, f"terminal {terms}; fit over 4..64 {fits}"),
    ]


def check_position():
    template = WavePacket(gaussian_envelope(), 1)
    worst_norm = 0.0
    worst_m2 = 0.0
    modes = []
    for n in (1, 2, 5, 10):
        wp = template.with_n(n)
        prof = radial_components(wp)
        mo = position_moments(prof, check_tail=False)
        worst_norm = max(worst_norm, abs(mo["norm"] - 1.0))
        worst_m2 = max(worst_m2, abs(mo["second_moment"] / second_moment_position(wp) - 1.0))
        modes.append(prof.modal_radius)
    return [
        _check("position.norm", worst_norm, 1e-6, "n in {1,2,5,10}"),
        _check("position.second_moment", worst_m2, 1e-4, "radial density vs gradient formula"),
        _check("position.modal_radius_decreasing", float(np.max(np.diff(modes))), 0.0,
               f"modes={tuple(round(v, 6) for v in modes)}", passed=bool(np.all(np.diff(modes) < 0))),
    ]


def check_delta():
    out = []
    worst = {"norm": 0.0, "mean": 0.0, "second": -math.inf, "weak": -math.inf}
    monotone = True
    diverges = True
    for d in (1, 2, 3):
        n = np.arange(2, 101)
        rep = convergence_report(n, d, test_functions=("gauss", "square"))
        worst["norm"] = max(worst["norm"], float(np.max(np.abs(rep.l1_norms - 1.0))))
        worst["mean"] = max(worst["mean"], float(np.max(np.abs(rep.means))))
        worst["second"] = max(worst["second"], float(np.max(n / 2.0 - rep.second_moments)))
        worst["weak"] = max(worst["weak"], float(np.max(rep.weak_errors["gauss"] - 3.0 / n)))
        monotone &= bool(np.all(np.diff(rep.weak_errors["gauss"]) < 0))
        diverges &= bool(np.all(rep.weak_errors["square"] >= n / 2.0))
    exact = abs(moments(spread_delta_density(10, 1))["second_moment"] - spread_delta_second_moment(10, 1))
    out += [
        _check("delta.l1_norm", worst["norm"], 1e-10, "n = 2..100, d = 1..3"),
        _check("delta.mean", worst["mean"], 1e-12),
        _check("delta.second_moment_lower_bound", worst["second"], 0.0, "n/2 - second moment"),
        _check("delta.weak_error_rate", worst["weak"], 0.0, "error - 3/n for h = exp(-x^2)"),
        _check("delta.weak_error_decreasing", 0.0, 0.0, passed=monotone),
        _check("delta.square_diverges", 0.0, 0.0, "error >= n/2 for h = |x|^2", passed=diverges),
        _check("delta.exact_second_moment", exact, 1e-8, "n = 10, d = 1 against 20.104"),
    ]
    conv = converse_check(scaled_gaussian_family, "cos", (1, 2, 4, 8, 16, 32, 64))
    gap = float(np.max(conv.errors - conv.bounds))
    out.append(_check("delta.converse_taylor_bound", gap, 1e-15,
                      f"last error {conv.errors[-1]:.3e}",
                      passed=gap <= 1e-15 and bool(np.all(np.diff(conv.errors) < 0))))
    pair = convolution_variance_check(gaussian_scaled(1.0), gaussian_scaled(1.0))
    narrow = convolution_variance_check(gaussian_scaled(0.01), gaussian_scaled(1.3))
    heat = heat_variance_check(0.5)
    out += [
        _check("delta.convolution_additivity", max(pair["defect"], narrow["defect"]), 1e-8),
        _check("delta.heat_additivity", heat["defect"], 1e-8,
               f"sigma2_gt={heat['sigma2_gt']:.12f} (6t), t/2 increment off by {heat['increment_defect_t_over_2']:.6f}"),
    ]
    return out


SECTIONS = ("dirac", "special", "kernel", "wavepacket", "position", "delta")


def run_verification(seed=0, sections=SECTIONS):
    checks = []
    for name in sections:
        if name == "dirac":
            checks += check_dirac(seed)
        elif name == "special":
            checks += check_special()
        elif name == "kernel":
            checks += check_kernel(seed)
        elif name == "wavepacket":
            checks += check_wavepacket()
        elif name == "position":
            checks += check_position()
        elif name == "delta":
            checks += check_delta()
        else:
            raise ValueError(f"unknown section {name!r}")
    return {
        "version": __version__,
        "backend": backend_name(),
        "seed": int(seed),
        "passed": all(c.passed for c in checks),
        "checks": [asdict(c) for c in checks],
    }
