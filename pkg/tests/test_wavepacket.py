import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diracwidth.errors import EnvelopeError
from diracwidth.wavepacket import (
    Envelope, WavePacket, gaussian_envelope, mean_position, moment_integrals, momentum_amplitude,
    norm_momentum, phase_gaussian_envelope, sample_radial_panels, second_moment_position,
    second_moment_tensor, shifted_gaussian_envelope, sigma, sigma_scan, term_decomposition,
)

# Full 3D product-rule value, frozen as a regression oracle.
SIGMA_N1 = 1.3596436436890245


@pytest.fixture(scope="module")
def gauss():
    return gaussian_envelope()


def test_gaussian_constants(gauss):
    c = gauss.condition_constants
    np.testing.assert_allclose(c.c1, 0.5, atol=1e-12)
    np.testing.assert_allclose(c.c2, math.sqrt(3.0), atol=1e-12)
    assert c.c3 == pytest.approx(24.0, rel=1e-12)
    assert c.second_moment_bound(1) == pytest.approx(3 * (24.5 + 2 * math.sqrt(3)))
    assert c.second_moment_bound(3) == pytest.approx(c.second_moment_bound(1) / 9)


def test_bad_envelope_is_rejected(gauss):
    with pytest.raises(EnvelopeError):
        gauss.scaled(2.0)
    assert gauss.scaled(-1.0).norm == pytest.approx(1.0)


def test_sigma_n1_regression(gauss):
    wp = WavePacket(gauss, 1)
    assert sigma(wp).sigma == pytest.approx(SIGMA_N1, rel=1e-12)
    assert second_moment_tensor(wp).value == pytest.approx(SIGMA_N1**2, rel=1e-12)


@pytest.mark.parametrize("n", [1, 3, 12])
def test_norm_and_centred_mean(gauss, n):
    wp = WavePacket(gauss, n)
    assert norm_momentum(wp) == pytest.approx(1.0, abs=1e-13)
    np.testing.assert_allclose(mean_position(wp), 0.0, atol=1e-13)


@pytest.mark.parametrize("n", [2, 7])
def test_radial_and_tensor_routes_agree(gauss, n):
    wp = WavePacket(gauss, n)
    assert second_moment_position(wp) == pytest.approx(second_moment_tensor(wp).value, rel=1e-10)
    vals, _ = moment_integrals(wp, method="tensor")
    assert float(np.sum((vals["I"] + vals["II"] + vals["III"] + vals["IV"]).real)) == pytest.approx(
        second_moment_position(wp), rel=1e-10)


@settings(max_examples=10)
@given(st.integers(1, 40))
def test_first_term_scales_exactly(n):
    # I_j = c1_j / n^2 holds with no mass corrections
    br = term_decomposition(WavePacket(gaussian_envelope(), n), 0)
    assert br.I.real * n * n == pytest.approx(0.5, rel=1e-12)
    assert br.III == pytest.approx(br.II.conjugate(), abs=1e-15)


def test_sigma_bound_and_monotone(gauss):
    rows = sigma_scan([1, 2, 4, 8], WavePacket(gauss, 1))
    s = [r.sigma for r in rows]
    assert all(a > b for a, b in zip(s, s[1:]))
    c = gauss.condition_constants
    assert all(r.second_moment <= c.second_moment_bound(r.n) for r in rows)


def test_phase_offset_translates_packet():
    a = np.array([0.3, -0.2, 0.1])
    wp = WavePacket(phase_gaussian_envelope(a), 2)
    np.testing.assert_allclose(sigma(wp).mean_x, a / 2, atol=1e-12)
    # translation leaves the width unchanged
    assert sigma(wp).sigma == pytest.approx(sigma(WavePacket(gaussian_envelope(), 2)).sigma, rel=1e-10)


def test_shifted_envelope_has_imaginary_cross_terms():
    br = term_decomposition(WavePacket(shifted_gaussian_envelope((0.5, 0.5, 0.0)), 4), 0)
    assert abs(br.II.imag) > 1e-4
    assert abs(br.II.real) < 1e-15
    assert br.total == pytest.approx((br.I + br.IV).real, rel=1e-14)


def test_mass_scaling(gauss):
    # sigma at mass m equals sigma at mass 1 with n/m, lengths / m
    s2 = sigma(WavePacket(gauss, 4, m=2.0)).sigma
    s1 = sigma(WavePacket(gauss, 2, m=1.0)).sigma
    assert s2 == pytest.approx(s1 / 2, rel=1e-10)


def test_amplitude_shapes(gauss):
    wp = WavePacket(gauss, 3)
    assert momentum_amplitude(wp, [0.1, 0.2, 0.3]).shape == (4,)
    assert momentum_amplitude(wp, np.zeros((5, 3))).shape == (5, 4)
    edges = sample_radial_panels(wp)
    assert edges[-1] == pytest.approx(wp.momentum_cutoff)


def test_packet_validation(gauss):
    with pytest.raises(ValueError):
        WavePacket(gauss, 0)
    with pytest.raises(ValueError):
        WavePacket(gauss, 1, m=-1.0)
    with pytest.raises(ValueError):
        sigma_scan([], WavePacket(gauss, 1))


def test_divergent_constants_are_rejected():
    # f = N exp(-|q|^2/2) / |q| is square integrable but int |f|^2 / p^2 diverges
    norm = (2.0 * math.pi**1.5) ** -0.5

    def profile(q):
        r = np.linalg.norm(q, axis=-1)
        return norm * np.exp(-0.5 * r * r) / r

    def gradient(q):
        r = np.linalg.norm(q, axis=-1)[..., None]
        return -q * (1.0 + 1.0 / r**2) * profile(q)[..., None]

    with pytest.raises(EnvelopeError, match="divergent"):
        Envelope(profile, gradient, "singular")
