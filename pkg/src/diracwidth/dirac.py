"""Free Dirac algebra in the standard (Dirac) representation.

Units are natural (hbar = c = 1): momenta in units of ``m``. ``beta`` is
``diag(1, 1, -1, -1)`` and ``alpha_j`` carries ``sigma_j`` in its off-diagonal
2x2 blocks, where ``sigma`` is the complex conjugate of the usual Pauli set
(``sigma_2 = [[0, i], [-i, 0]]``). With that choice the positive-energy spinor

    u(p) = (E + m, 0, p3, p1 - i p2) / sqrt(2 E (E + m))

is an eigenvector of ``H(p) = alpha.p + beta m``; with the textbook
``sigma_2`` the last entry would have to be ``p1 + i p2``.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
SIGMA = PAULI.conj()

BETA = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
ALPHA = np.zeros((3, 4, 4), dtype=complex)
for _j in range(3):
    ALPHA[_j, :2, 2:] = SIGMA[_j]
    ALPHA[_j, 2:, :2] = SIGMA[_j]
IDENTITY4 = np.eye(4, dtype=complex)

SPINOR_GRADIENT_BOUND = 2.0 * math.sqrt(3.0)
# Per-component bounds on |p| |du_i/dp_k| (components 1..4).
COMPONENT_BOUNDS = (1.0 / (4.0 * math.sqrt(2.0)), 0.0, 3.0 / (2.0 * math.sqrt(2.0)), math.sqrt(2.0))


@dataclass(frozen=True)
class MomentumPoint:
    p: tuple
    m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(c) for c in self.p))
        if len(self.p) != 3:
            raise ValueError("momentum must be a 3-vector")
        if not self.m > 0:
            raise ValueError("mass must be positive")

    @property
    def compton_wavelength(self):
        return 2.0 * math.pi / self.m

    @property
    def vector(self):
        return np.array(self.p)


def _point(pt, m=None):
    if isinstance(pt, MomentumPoint):
        return pt.vector, pt.m
    return np.asarray(pt, dtype=float), 1.0 if m is None else float(m)


def energy(pt, m=None):
    """E(p) = sqrt(p^2 + m^2); accepts a MomentumPoint or a 3-vector plus mass."""
    p, m = _point(pt, m)
    return math.sqrt(float(p @ p) + m * m)


def dirac_hamiltonian(pt, m=None):
    p, m = _point(pt, m)
    return np.tensordot(p, ALPHA, axes=(0, 0)) + m * BETA


def positive_spinor(pt, m=None):
    p, m = _point(pt, m)
    u, _ = kernels.spinor_and_gradient(p.reshape(1, 3), m)
    return u[0]


def positive_spinor_gradient(pt, j, m=None):
    """Analytic derivative du/dp_j (j = 0, 1, 2) of :func:`positive_spinor`."""
    p, m = _point(pt, m)
    _, du = kernels.spinor_and_gradient(p.reshape(1, 3), m)
    return du[0, j]


def spinors(P, m=1.0):
    """Batched spinors and gradients: ``u`` of shape (N, 4), ``du`` (N, 3, 4)."""
    return kernels.spinor_and_gradient(np.asarray(P, dtype=float).reshape(-1, 3), m)


def projector_momentum(pt, m=None):
    """P+(p) = (alpha.p + beta m)/(2E) + 1/2."""
    p, m = _point(pt, m)
    E = math.sqrt(float(p @ p) + m * m)
    return dirac_hamiltonian(p, m) / (2.0 * E) + 0.5 * IDENTITY4


def spectral_positive_projector(pt, m=None):
    """Projector onto the positive eigenspace of H(p) by diagonalization."""
    w, v = np.linalg.eigh(dirac_hamiltonian(pt, m))
    pos = v[:, w > 0]
    return pos @ pos.conj().T


def clifford_defects():
    """Largest entry of each Clifford relation residual."""
    out = {"alpha_anticommutator": 0.0, "alpha_beta_anticommutator": 0.0,
           "beta_square": float(np.max(np.abs(BETA @ BETA - IDENTITY4)))}
    for j in range(3):
        aj = ALPHA[j]
        out["alpha_beta_anticommutator"] = max(out["alpha_beta_anticommutator"],
                                               float(np.max(np.abs(aj @ BETA + BETA @ aj))))
        for k in range(3):
            anti = aj @ ALPHA[k] + ALPHA[k] @ aj - 2.0 * (j == k) * IDENTITY4
            out["alpha_anticommutator"] = max(out["alpha_anticommutator"], float(np.max(np.abs(anti))))
    return out


def sample_momenta(count, magnitude_range, seed, m=1.0):
    """Seeded momenta with log-uniform |p| and uniform direction on the sphere."""
    lo, hi = map(float, magnitude_range)
    if not (0 < lo <= hi):
        raise ValueError("magnitude range must lie in (0, inf)")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    mag = np.exp(rng.uniform(math.log(lo), math.log(hi), count))
    d = rng.normal(size=(count, 3))
    d /= np.linalg.norm(d, axis=1)[:, None]
    return mag[:, None] * d


@dataclass(frozen=True)
class SpinorBoundReport:
    sample_count: int
    per_axis: tuple        # max_p |p| ||du/dp_j|| for j = 1, 2, 3
    overall: float
    per_component: tuple   # max_{p,k} |p| |du_i/dp_k| for i = 1..4
    bound: float = SPINOR_GRADIENT_BOUND
    component_bounds: tuple = COMPONENT_BOUNDS

    @property
    def passed(self):
        return self.overall <= self.bound and all(
            v <= b + 1e-15 for v, b in zip(self.per_component, self.component_bounds))


def check_spinor_bound(sample_count=100_000, magnitude_range=(1e-3, 1e3), seed=0, m=1.0):
    """Sample ``|p| * |du/dp_j|`` and compare with the 2 sqrt(3)/|p| gradient bound."""
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    P = sample_momenta(sample_count, magnitude_range, seed, m)
    _, du = kernels.spinor_and_gradient(P, m)
    pn = np.linalg.norm(P, axis=1)
    axis_norm = np.linalg.norm(du, axis=2) * pn[:, None]
    comp = np.abs(du) * pn[:, None, None]
    per_axis = tuple(float(v) for v in axis_norm.max(axis=0))
    per_comp = tuple(float(v) for v in comp.max(axis=(0, 1)))
    return SpinorBoundReport(sample_count, per_axis, max(per_axis), per_comp)


def gradient_fd_defect(sample_count=1000, magnitude_range=(1e-3, 1e3), seed=0, m=1.0):
    """Largest relative gap between analytic and central-difference spinor gradients.

    The step is ``1e-4 * max(|p|, m)``; the gap is measured against ``||du/dp_j||``.
    """
    P = sample_momenta(sample_count, magnitude_range, seed, m)
    _, du = kernels.spinor_and_gradient(P, m)
    h = 1e-4 * np.maximum(np.linalg.norm(P, axis=1), m)
    worst = 0.0
    for j in range(3):
        step = np.zeros_like(P)
        step[:, j] = h
        up, _ = kernels.spinor_and_gradient(P + step, m)
        dn, _ = kernels.spinor_and_gradient(P - step, m)
        fd = (up - dn) / (2.0 * h[:, None])
        scale = np.linalg.norm(du[:, j, :], axis=1)
        rel = np.linalg.norm(fd - du[:, j, :], axis=1) / np.maximum(scale, 1e-300)
        worst = max(worst, float(rel.max()))
    return worst


def algebra_defects(sample_count=1000, magnitude_range=(1e-3, 1e3), seed=0, m=1.0):
    """Residuals of H^2 = E^2, H u = E u, P+^2 = P+, P+ u = u, |u| = 1 over seeded momenta.

    Residuals are scaled by ``E^2`` for ``H^2``, by ``E`` for ``H u`` and
    absolute otherwise.
    """
    P = sample_momenta(sample_count, magnitude_range, seed, m)
    u, _ = kernels.spinor_and_gradient(P, m)
    out = {"hamiltonian_square": 0.0, "projector_idempotence": 0.0,
           "projector_fixes_spinor": 0.0, "spinor_norm": 0.0, "spectral_projector": 0.0, "eigenvector": 0.0}
    for p, uk in zip(P, u):
        E2 = float(p @ p) + m * m
        H = dirac_hamiltonian(p, m)
        Pp = projector_momentum(p, m)
        out["hamiltonian_square"] = max(out["hamiltonian_square"],
                                        float(np.max(np.abs(H @ H - E2 * IDENTITY4))) / E2)
        out["projector_idempotence"] = max(out["projector_idempotence"], float(np.max(np.abs(Pp @ Pp - Pp))))
        out["projector_fixes_spinor"] = max(out["projector_fixes_spinor"], float(np.max(np.abs(Pp @ uk - uk))))
        out["eigenvector"] = max(out["eigenvector"], float(np.max(np.abs(H @ uk - math.sqrt(E2) * uk))) / math.sqrt(E2))
        out["spinor_norm"] = max(out["spinor_norm"], abs(float(np.vdot(uk, uk).real) - 1.0))
    for p in P[:50]:
        out["spectral_projector"] = max(out["spectral_projector"], float(np.max(np.abs(
            spectral_positive_projector(p, m) - projector_momentum(p, m)))))
    return out
