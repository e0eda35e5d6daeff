import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diracwidth.errors import QuadratureError
from diracwidth.quadrature import (
    KRONROD_NODES, KRONROD_WEIGHTS, composite_legendre, integrate_adaptive, integrate_oscillatory,
    integrate_tensor3, oscillation_zeros, radial_panels, spherical_rule, wynn_epsilon,
)


def test_kronrod_rule_is_exact_to_degree_31():
    for k in range(0, 32, 3):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.dot(KRONROD_WEIGHTS, KRONROD_NODES**k) == pytest.approx(exact, abs=1e-15)


@given(st.floats(0.1, 20.0))
def test_gaussian_integral(a):
    res = integrate_adaptive(lambda x: np.exp(-a * x * x), (-np.inf, np.inf), 1e-13)
    assert res.converged
    assert res.value == pytest.approx(math.sqrt(math.pi / a), rel=1e-12)


def test_semi_infinite_and_reversed():
    res = integrate_adaptive(lambda x: np.exp(-x), (0.0, np.inf), 1e-14)
    assert res.value == pytest.approx(1.0, rel=1e-14)
    rev = integrate_adaptive(np.cos, (1.0, 0.0), 1e-14)
    assert rev.value == pytest.approx(-math.sin(1.0), rel=1e-14)


def test_kink_with_breakpoint():
    res = integrate_adaptive(lambda x: np.abs(x - 0.3), (0.0, 1.0), 1e-14, points=[0.3])
    assert res.value == pytest.approx(0.5 * (0.3**2 + 0.7**2), rel=1e-14)
    assert res.evaluations <= 42


def test_complex_and_vector_valued():
    res = integrate_adaptive(lambda x: np.exp(1j * x), (0.0, math.pi), 1e-13)
    assert res.value == pytest.approx(2j, abs=1e-13)
    vec = integrate_adaptive(lambda x: np.stack([x, x * x], axis=-1), (0.0, 1.0), 1e-13)
    np.testing.assert_allclose(vec.value, [0.5, 1.0 / 3.0], rtol=1e-14)


def test_budget_exhaustion_raises():
    with pytest.raises(QuadratureError) as info:
        integrate_adaptive(lambda x: np.sin(1.0 / x), (1e-6, 1.0), 1e-14, max_evals=500)
    assert info.value.args
    soft = integrate_adaptive(lambda x: np.sin(1.0 / x), (1e-6, 1.0), 1e-14, max_evals=500, strict=False)
    assert not soft.converged


def test_singular_endpoint():
    res = integrate_adaptive(lambda x: 1.0 / np.sqrt(x), (0.0, 1.0), 1e-10)
    assert res.value == pytest.approx(2.0, rel=1e-9)


@pytest.mark.parametrize("kind, zero_fn", [("sin", np.sin), ("cos", np.cos)])
def test_oscillation_zeros(kind, zero_fn):
    z = oscillation_zeros(kind, 10)
    np.testing.assert_allclose(zero_fn(z), 0.0, atol=1e-13)


def test_j1_zeros():
    z = oscillation_zeros("j1", 20)
    np.testing.assert_allclose(np.tan(z) - z, 0.0, atol=1e-9 * z.max())


def test_wynn_accelerates_alternating_series():
    partial = np.cumsum([(-1) ** k / (k + 1) for k in range(14)])
    est, err = wynn_epsilon(partial)
    assert est == pytest.approx(math.log(2.0), abs=1e-10)
    assert err < 1e-8


@pytest.mark.parametrize("r", [0.5, 2.0, 10.0])
def test_dirichlet_type_integral(r):
    # int_0^inf sin(r p) / p dp = pi / 2, only conditionally convergent;
    # Gauss-Kronrod never samples the endpoint p = 0
    res = integrate_oscillatory(lambda p: 1.0 / p, r, "sin")
    assert res.value == pytest.approx(math.pi / 2, abs=1e-9)


def test_oscillatory_fourier_transform_of_gaussian():
    res = integrate_oscillatory(lambda p: np.exp(-p * p), 3.0, "cos", 1e-13)
    assert res.value == pytest.approx(0.5 * math.sqrt(math.pi) * math.exp(-2.25), abs=1e-13)


def test_composite_legendre_and_panels():
    x, w = composite_legendre([0.0, 1.0, 3.0], 8)
    assert np.sum(w * x**5) == pytest.approx(3.0**6 / 6, rel=1e-14)
    edges = radial_panels(10.0, core=1.0, width=1.0)
    assert edges[0] == 0.0 and edges[-1] == 10.0
    assert np.all(np.diff(edges) > 0) and np.max(np.diff(edges)) <= 1.0 + 1e-12


def test_spherical_rule_volume_and_moments():
    rn, rw, dirs, dw = spherical_rule(2.0, 8, 12)
    assert np.sum(rw) * np.sum(dw) == pytest.approx(4 * math.pi * 8 / 3, rel=1e-14)
    np.testing.assert_allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert np.sum(dw * dirs[:, 2] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-14)


@pytest.mark.parametrize("rule", ["spherical", "hermite"])
def test_tensor3_gaussian(rule):
    f = lambda X: np.exp(-np.sum(X * X, axis=1))
    res = integrate_tensor3(f, 40, rule, radius=8.0)
    assert res.value == pytest.approx(math.pi**1.5, rel=1e-12)
