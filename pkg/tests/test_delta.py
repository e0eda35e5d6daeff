import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracwidth.delta import (
    TEST_FUNCTIONS, analytic_moments, convergence_report, convolution_variance_check,
    converse_check, exponential_3d, gaussian_scaled, heat_evolved, heat_kernel_3d,
    heat_variance_check, integrate_against, moments, scaled_gaussian_family, spread_delta_density,
    spread_delta_second_moment, weak_convergence_error,
)
from diracwidth.errors import DomainError, PreconditionError
from diracwidth.quadrature import composite_legendre


@settings(max_examples=25)
@given(st.integers(2, 400), st.integers(1, 3))
def test_mixture_moments_match_closed_form(n, d):
    spec = spread_delta_density(n, d)
    num, ref = moments(spec), analytic_moments(spec)
    assert num["norm"] == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(num["mean"], 0.0, atol=1e-12)
    assert num["second_moment"] == pytest.approx(ref["second_moment"], rel=1e-12)
    assert ref["second_moment"] == pytest.approx(spread_delta_second_moment(n, d), rel=1e-14)
    assert ref["second_moment"] >= n / 2


def test_frozen_second_moment():
    assert moments(spread_delta_density(10, 1))["second_moment"] == pytest.approx(20.104, abs=1e-10)


def test_density_is_pointwise_consistent():
    spec = spread_delta_density(4, 2)
    X = np.array([[0.0, 0.0], [4.0, 0.0], [-4.0, 0.5]])
    vals = spec(X)
    assert vals[0] == pytest.approx((0.5 * 16 + 0.5 * math.exp(-16)) / math.pi, rel=1e-14)
    assert vals[1] == pytest.approx(0.25 / math.pi * (1 + 0.5 * 16 * math.exp(-16 * 16)), rel=1e-12)
    assert vals[2] == pytest.approx(0.25 / math.pi * math.exp(-0.25), rel=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_weak_convergence_rate(d):
    n = np.arange(2, 60)
    err = weak_convergence_error(spread_delta_density, "gauss", n, d)
    assert np.all(err <= 3.0 / n)
    assert np.all(np.diff(err) < 0)


@pytest.mark.parametrize("name", sorted(TEST_FUNCTIONS))
def test_integrate_against_matches_point_rule(name):
    # brute-force tensor rule in 2D as the reference, with panels split at
    # the bump support edges
    h = TEST_FUNCTIONS[name]()
    spec = spread_delta_density(3, 2)
    x, w = composite_legendre([-8.0, -4.0, -1.0, 0.0, 1.0, 4.0, 8.0], 80)
    X = np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1).reshape(-1, 2)
    W = np.outer(w, w).ravel()
    ref = float(np.sum(W * spec(X) * h(X)))
    assert integrate_against(spec, h) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_square_test_counts_only_present_axes():
    h = TEST_FUNCTIONS["square"]()
    assert h(np.array([[1.0, 2.0]]))[0] == 5.0
    assert h(np.array([[1.0, 2.0, 3.0]]))[0] == 14.0
    with pytest.raises(DomainError):
        h(np.zeros((1, 4)))


@pytest.mark.parametrize("name", ["gauss", "cos", "bump"])
def test_converse_taylor_bound(name):
    rep = converse_check(scaled_gaussian_family, name, (1, 2, 4, 8, 16, 32))
    assert rep.within_bound
    assert np.all(np.diff(rep.errors) < 0)


def test_bump_curvature_constant_is_an_upper_bound():
    # the second derivative of exp(1 - 1/(1 - t^2)) peaks near |t| = 0.895
    t = np.linspace(-0.999, 0.999, 40001)
    psi = TEST_FUNCTIONS["bump"]()(t[:, None])
    d2 = np.gradient(np.gradient(psi, t), t)
    assert 21.0 < np.max(np.abs(d2)) <= TEST_FUNCTIONS["bump"]().sup_second


def test_converse_rejects_divergent_family():
    with pytest.raises(PreconditionError):
        converse_check(spread_delta_density, "gauss", (2, 4, 8))


def test_report_shapes():
    rep = convergence_report([2, 5, 9], 2, test_functions=("gauss", "square"))
    assert rep.means.shape == (3, 2)
    np.testing.assert_allclose(rep.weak_errors["square"], rep.second_moments, rtol=1e-12)


@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(-2.0, 2.0))
@settings(max_examples=15)
def test_variance_additivity_for_gaussians(s1, s2, c):
    rep = convolution_variance_check(gaussian_scaled(s1), gaussian_scaled(s2, center=(c,)))
    assert rep["conv_norm"] == pytest.approx(1.0, abs=1e-12)
    assert rep["sigma2_conv"] == pytest.approx(s1 * s1 + s2 * s2, rel=1e-10)
    assert rep["defect"] < 1e-10


def test_variance_additivity_for_mixture():
    rep = convolution_variance_check(spread_delta_density(5, 1), gaussian_scaled(0.5))
    assert rep["defect"] < 1e-9 * rep["sigma2_conv"]


def test_heat_evolution():
    u0 = moments(exponential_3d())
    assert u0["norm"] == pytest.approx(1.0, abs=1e-12)
    assert u0["second_moment"] == pytest.approx(12.0, rel=1e-12)
    assert moments(heat_kernel_3d(0.3))["second_moment"] == pytest.approx(1.8, rel=1e-12)
    ev = heat_evolved(0.3)
    assert moments(ev)["norm"] == pytest.approx(1.0, abs=1e-10)
    rep = heat_variance_check(0.3)
    assert rep["defect"] < 1e-9
    assert rep["increment_defect_t_over_2"] == pytest.approx(6 * 0.3 - 0.15, rel=1e-8)


def test_domain_errors():
    with pytest.raises(DomainError):
        spread_delta_density(1)
    with pytest.raises(DomainError):
        gaussian_scaled(0.0)
    with pytest.raises(DomainError):
        heat_kernel_3d(-1.0)
    with pytest.raises(DomainError):
        weak_convergence_error(spread_delta_density, "nope", [2])
