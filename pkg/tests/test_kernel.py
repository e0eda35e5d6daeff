import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from diracwidth.dirac import ALPHA, BETA
from diracwidth.errors import DomainError
from diracwidth.kernel import (
    DELTA_COEFFICIENT, FAULT_ENV, kernel_F, kernel_F_numeric, kernel_from_profiles, kernel_G,
    kernel_G_oracle, kernel_profile, kernel_regular_part, kernel_sample, projected_delta_column,
    representation_defect,
)
from diracwidth.special import bessel_k1

vectors = st.tuples(*[st.floats(-3.0, 3.0, allow_nan=False)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-2)


@pytest.mark.parametrize("r", [0.05, 0.3, 1.0, 3.0, 12.0])
def test_F_closed_form_against_fourier_integral(r):
    res = kernel_F_numeric(r)
    assert res.value == pytest.approx(kernel_F(r), rel=1e-10)


def test_F_small_r_limit():
    # K1(z) ~ 1/z gives F ~ 2 / (sqrt(2 pi) r^2)
    r = 1e-6
    assert kernel_F(r) * r * r == pytest.approx(2.0 / math.sqrt(2 * math.pi), rel=1e-9)


@given(st.floats(0.01, 20.0), st.sampled_from([0.5, 2.0, 3.0]))
def test_F_mass_scaling(r, m):
    assert kernel_F(r, m) == pytest.approx(m * m * kernel_F(m * r), rel=1e-13)


@given(vectors)
def test_G_is_minus_i_gradient_of_F(x):
    x = np.asarray(x)
    h = 1e-5 * np.linalg.norm(x)
    fd = np.array([(kernel_F(np.linalg.norm(x + h * e)) - kernel_F(np.linalg.norm(x - h * e))) / (2 * h)
                   for e in np.eye(3)])
    G = kernel_G(x)
    assert np.max(np.abs(G + 1j * fd)) <= 1e-7 * np.max(np.abs(G))
    np.testing.assert_allclose(G.real, 0.0)


@pytest.mark.slow
def test_G_against_3d_quadrature():
    x = np.array([0.6, -0.3, 0.4])
    G, err = kernel_G_oracle(x)
    assert np.max(np.abs(G - kernel_G(x))) <= 1e-5 * np.max(np.abs(G))
    assert err < 1e-4 * np.max(np.abs(G))


@given(vectors, st.sampled_from([0.5, 1.0, 2.0]))
def test_profiles_assemble_regular_part(x, m):
    np.testing.assert_allclose(kernel_from_profiles(x, m), kernel_regular_part(x, m), rtol=1e-13, atol=1e-300)


@given(vectors)
def test_reflection_symmetry(x):
    s = kernel_sample(x)
    scale = np.max(np.abs(s.regular_part))
    assert s.reflection_defect <= 1e-14 * scale
    # the alpha part is anti-Hermitian, so M itself is not Hermitian
    assert s.hermiticity_defect > 0


def test_delta_coefficient_and_column():
    assert DELTA_COEFFICIENT == 0.5
    x = np.array([0.2, 0.1, -0.4])
    col = projected_delta_column(1, x)
    np.testing.assert_allclose(col, kernel_regular_part(x)[:, 0] / (2 * math.pi) ** 1.5)
    with pytest.raises(ValueError):
        projected_delta_column(5, x)


@pytest.mark.parametrize("p", [(0.0, 0.0, 0.0), (0.7, -0.2, 0.4)])
def test_fourier_transform_reproduces_projector(p):
    assert representation_defect(p) < 1e-10


def test_profile_columns():
    tab = kernel_profile([0.5, 1.0, 2.0], numeric=True)
    assert set(tab) >= {"r", "F", "F_numeric", "rel_diff", "k1_over_r2", "column_norm"}
    assert np.max(tab["rel_diff"]) < 1e-10
    np.testing.assert_allclose(tab["k1_over_r"], bessel_k1(np.array([0.5, 1.0, 2.0])) / [0.5, 1.0, 2.0])
    # first column of M along x: scalar in row 1, alpha_1 couples to row 4
    assert tab["column_norm"][0] > tab["column_norm"][2] > 0


def test_matrix_structure():
    x = np.array([0.0, 0.0, 0.5])
    M = kernel_regular_part(x)
    assert M[0, 0] == pytest.approx(bessel_k1(0.5) / (math.sqrt(2 * math.pi) * 0.5))
    assert M[2, 2] == pytest.approx(-M[0, 0])
    np.testing.assert_allclose(M - M[0, 0] * BETA, 1j * (M[0, 2] / 1j) * ALPHA[2])


def test_domain_and_fault(monkeypatch):
    with pytest.raises(DomainError):
        kernel_F(0.0)
    with pytest.raises(DomainError):
        kernel_G(np.zeros(3))
    with pytest.raises(DomainError):
        kernel_F(1.0, m=0.0)
    x = np.array([0.3, 0.2, 0.1])
    good = kernel_G(x)
    monkeypatch.setenv(FAULT_ENV, "kernel_G_sign")
    np.testing.assert_allclose(kernel_G(x), -good)


def test_profile_shapes_on_default_grid():
    r = np.arange(1, 51) * 0.1
    tab = kernel_profile(r)
    assert np.all(np.diff(tab["k0_over_r"]) < 0) and np.all(np.diff(tab["k1_over_r"]) < 0)
    assert np.all(tab["k1_over_r"] > tab["k0_over_r"])
    tail = tab["column_norm"][r >= 0.5]
    assert np.all(np.diff(tail) < 0)
    assert 0 < kernel_F(5.0) <= kernel_F(1.0)
