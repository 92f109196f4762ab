import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import coherent_q, langevin_noise_matrix
from reference_points import nv_example
from srlaser.errors import AboveThreshold, BelowThreshold, TruncationFailure
from srlaser.fluctuations import (
    FluctuationCoeffs,
    GreenFunction,
    below_threshold_stats,
    fluct_coeffs,
    noise_spectrum_matrix,
    principal_spectra,
    q_representation,
    q_values,
    squeeze_db,
    squeeze_db_from_spectra,
    squeeze_db_params,
)
from srlaser.meanfield import lasing_state
from srlaser.model import ModelParams, cooperativity_branches, derive_rates

TWISTED = FluctuationCoeffs(kappa_a=1.0, d_a=0.1, d_phi=0.01, chi=1.0, a_mag=10.0)
# phase diffusion large enough for the series to converge at all times used below
SOFT = FluctuationCoeffs(kappa_a=1.0, d_a=0.1, d_phi=0.05, chi=0.5, a_mag=10.0)


def base_laser(**kw):
    base = dict(delta=1.0, epsilon=0.0, kappa=1.0, gamma=0.01, pump_w=0.2, gamma_phi=1.0)
    base.update(kw)
    return ModelParams.from_collective(100, 1.0, **base)


# ------------------------------------------------------------ coefficients


def test_coefficients_limits():
    c = fluct_coeffs(base_laser(pump_w=0.5))
    assert c.chi == 0.0
    assert c.kappa_a > 0 and c.d_a > 0 and c.d_phi > 0
    # kappa_a -> kappa as C grows
    big = fluct_coeffs(ModelParams.from_collective(100, 30.0, delta=0, epsilon=0, kappa=1, gamma=0.01,
                                                   pump_w=0.5, gamma_phi=1))
    assert big.kappa_a == pytest.approx(1.0, rel=2e-3)


def test_coefficients_below_threshold():
    with pytest.raises(BelowThreshold):
        fluct_coeffs(base_laser(pump_w=0.011))


def test_chi_formula():
    p = base_laser(epsilon=2.0, pump_w=0.5)
    c = fluct_coeffs(p)
    st_ = lasing_state(p, cooperativity_branches(p).c_plus)
    G = derive_rates(p).gamma_total
    assert c.chi == pytest.approx(2 * st_.jz * p.epsilon / (p.n_spins * G), rel=1e-14)
    assert c.a_mag**2 == pytest.approx(st_.photons, rel=1e-14)


def _scaled_cavity(kappa, n=100):
    # hold the intrinsic cooperativity fixed while changing kappa
    ks = 0.5 + 0.01 + 0.2
    c0 = 3.0
    g = math.sqrt(c0 * kappa * ks / (4 * n))
    return ModelParams(n, g, 0.0, 0.0, kappa, 0.01, 0.5, 0.2)


def test_bad_cavity_linewidth_scaling():
    vals = []
    for kappa in (200.0, 400.0):
        p = _scaled_cavity(kappa)
        vals.append(fluct_coeffs(p).d_phi * p.n_spins / derive_rates(p).kappa_s)
    assert vals[1] / vals[0] == pytest.approx(1.0, rel=0.1)


def test_good_cavity_linewidth_scaling():
    vals = []
    for kappa in (0.005, 0.0025):
        p = _scaled_cavity(kappa)
        c = fluct_coeffs(p)
        vals.append(c.d_phi * c.a_mag**2 / kappa)
    assert vals[1] / vals[0] == pytest.approx(1.0, rel=0.1)


# ------------------------------------------------------------ below threshold


def test_thermal_statistics():
    p = base_laser(pump_w=0.02)
    s = below_threshold_stats(p)
    assert s.g2(0.0) == 2.0
    r = derive_rates(p)
    C = s.cooperativity
    assert s.n_photons == pytest.approx(p.pump_w * C / ((p.pump_w - p.gamma) * (1 - C)), rel=1e-13)
    assert s.g1(0.0) == 1.0
    assert abs(s.g1(5.0)) == pytest.approx(math.exp(-(1 - C) * p.kappa / 2 * 5.0), rel=1e-12)
    assert s.laser_freq_offset == pytest.approx(p.kappa * p.delta / r.gamma_total, rel=1e-12)


def test_photons_vanish_without_coupling_or_pump():
    for p in (base_laser(pump_w=0.02).replace(g=0.0), base_laser(pump_w=1e-12, gamma=0.01)):
        assert below_threshold_stats(p).n_photons == pytest.approx(0.0, abs=1e-9)


def test_above_threshold_rejected():
    with pytest.raises(AboveThreshold):
        below_threshold_stats(base_laser(pump_w=0.05))


# ------------------------------------------------------------ Green's function


def _pde_residual(coeffs, z0, t, h=1e-4, k=1e-3):
    def G(z, phi, tt):
        return GreenFunction(coeffs, z0, 0.0, tt).complex_value(z, phi)

    z, phi = np.meshgrid(np.linspace(-0.5, 0.5, 5) + z0 * math.exp(-coeffs.kappa_a * t), np.linspace(-0.3, 0.3, 5))
    g0 = G(z, phi, t)
    dt = (G(z, phi, t + h) - G(z, phi, t - h)) / (2 * h)
    d_z_zg = ((z + k) * G(z + k, phi, t) - (z - k) * G(z - k, phi, t)) / (2 * k)
    dzz = (G(z + k, phi, t) - 2 * g0 + G(z - k, phi, t)) / k**2
    dpp = (G(z, phi + k, t) - 2 * g0 + G(z, phi - k, t)) / k**2
    dp = (G(z, phi + k, t) - G(z, phi - k, t)) / (2 * k)
    dzp = (G(z + k, phi + k, t) - G(z + k, phi - k, t) - G(z - k, phi + k, t) + G(z - k, phi - k, t)) / (4 * k * k)
    c = coeffs
    rhs = (c.kappa_a * d_z_zg + 0.5 * c.d_a * dzz + 0.5 * c.d_phi * dpp
           + c.kappa_a * c.chi / c.a_mag * (2 * z * dp - 0.5 * dzp))
    return np.max(np.abs(dt - rhs)) / np.max(np.abs(dt))


@pytest.mark.parametrize("z0", [0.0, 0.3])
@pytest.mark.parametrize("t", [0.5, 3.0])
def test_green_function_solves_fokker_planck(z0, t):
    c = SOFT
    assert _pde_residual(c, z0, t) < 1e-4


def test_green_normalization_and_delta_limit():
    g = GreenFunction(TWISTED, 0.0, 0.0, 4.0)
    assert g.box_mass(-60, 60, -math.pi, math.pi) == pytest.approx(1.0, abs=1e-6)
    tiny = GreenFunction(SOFT, 0.0, 0.0, 1e-3)
    assert tiny.sigma2 < 3e-4
    assert tiny.box_mass(-0.1, 0.1, -0.1, 0.1) > 0.999


def test_green_factorizes_at_zero_chi():
    c = TWISTED.with_chi(0.0)
    t = 2.0
    g = GreenFunction(c, 0.2, 0.1, t)
    z = np.linspace(-1, 1, 7)
    phi = np.linspace(-3, 3, 9)
    Z, P = np.meshgrid(z, phi)
    s2 = c.d_a / c.kappa_a * (1 - math.exp(-2 * c.kappa_a * t))
    gz = np.exp(-(Z - 0.2 * math.exp(-t)) ** 2 / s2) / math.sqrt(math.pi * s2)
    m = np.arange(-60, 61)
    wrapped = sum(np.exp(-0.5 * c.d_phi * t * n * n + 1j * n * (P - 0.1)) for n in m).real / (2 * math.pi)
    assert np.allclose(g(Z, P), gz * wrapped, rtol=1e-10, atol=1e-14)


def test_green_z_marginal_is_ornstein_uhlenbeck():
    g = GreenFunction(SOFT, 0.4, 0.0, 1.5)
    z = np.linspace(-2, 2, 41)
    phi = np.linspace(-math.pi, math.pi, 400, endpoint=False)
    Z, P = np.meshgrid(z, phi)
    numeric = g(Z, P).sum(axis=0) * (2 * math.pi / phi.size)
    assert np.allclose(numeric, g.z_marginal(z), rtol=1e-9, atol=1e-12)


def test_green_rejects_nonpositive_time_and_divergent_series():
    with pytest.raises(ValueError):
        GreenFunction(TWISTED, 0.0, 0.0, 0.0)
    with pytest.raises(TruncationFailure):
        GreenFunction(TWISTED, 0.0, 0.0, 2.0)


# ------------------------------------------------------------ Q function


def test_q_at_time_zero_is_coherent_state():
    grid = q_representation(TWISTED, 0.0, 0.0, 0.0, extent=4.0, resolution=31)
    X, P = np.meshgrid(grid.x, grid.p)
    assert np.allclose(grid.values, coherent_q(X, P, math.sqrt(2) * 10.0, 0.0), rtol=1e-10, atol=1e-14)


def test_q_matches_direct_double_sum():
    # brute force: Q = <alpha| rho |alpha> as an integral of G against the coherent overlap
    c = SOFT
    t = 1.0
    g = GreenFunction(c, 0.0, 0.0, t)
    z = np.linspace(-3, 3, 301)
    phi = np.linspace(-math.pi, math.pi, 256, endpoint=False)
    Z, PHI = np.meshgrid(z, phi)
    dens = g(Z, PHI) * (z[1] - z[0]) * (phi[1] - phi[0])
    r = c.a_mag + Z
    pts = [(14.2, 0.3), (13.9, -0.6), (14.5, 1.0)]
    for x, p in pts:
        q = (x + 1j * p) / math.sqrt(2)
        alpha = r * np.exp(1j * PHI)
        direct = float((dens * np.exp(-np.abs(q - alpha) ** 2)).sum()) / (2 * math.pi)
        fast, _, _ = q_values(c, 0.0, 0.0, t, np.array([x]), np.array([p]))
        assert fast[0] == pytest.approx(direct, rel=1e-4)


def test_q_grid_mass_and_twist():
    grid = q_representation(TWISTED, 0.0, 0.0, 4.0, extent=16.0, resolution=121)
    assert grid.total() == pytest.approx(1.0, abs=1e-3)
    _, cov = grid.moments()
    # amplitude excess drives the phase backwards for chi > 0
    assert cov[0, 1] < 0
    mirrored = q_representation(TWISTED.with_chi(-1.0), 0.0, 0.0, 4.0, extent=16.0, resolution=121)
    assert mirrored.moments()[1][0, 1] == pytest.approx(-cov[0, 1], rel=1e-6)


# ------------------------------------------------------------ spectra


@pytest.mark.parametrize("chi", [-3.0, -0.4, 0.0, 0.6, 2.5])
@pytest.mark.parametrize("d_a", [0.0, 0.1, 1.3])
def test_noise_matrix_matches_langevin_oracle(chi, d_a):
    c = FluctuationCoeffs(0.8, d_a, 0.01, chi)
    for w in (0.0, 0.3, 2.0, 17.0):
        m = noise_spectrum_matrix(c, w)
        assert np.allclose(m, langevin_noise_matrix(0.8, d_a, chi, w), rtol=1e-12, atol=0)


def test_noise_matrix_asymptotics():
    c = FluctuationCoeffs(1.0, 0.1, 0.01, 1.5)
    w = np.array([1e3, 1e4])
    m = noise_spectrum_matrix(c, w)
    assert m[1, 0, 0] / m[0, 0, 0] == pytest.approx(1e-2, rel=1e-5)
    assert m[1, 0, 1] / m[0, 0, 1] == pytest.approx(1e-4, rel=1e-5)


def test_degenerate_spectra_without_interaction():
    c = FluctuationCoeffs(0.5, 0.0, 0.01, 0.0)
    w = np.linspace(0, 10, 101)
    s = principal_spectra(c, w)
    assert np.allclose(s.s_plus, s.s_minus, rtol=1e-14)
    assert np.allclose(s.s_plus, 0.5 / (0.25 + w**2), rtol=1e-14)


def test_squeezing_below_reference():
    c = fluct_coeffs(base_laser(epsilon=3.0, pump_w=0.2))
    assert c.chi != 0
    s = principal_spectra(c, [0.0]).s_minus[0]
    ref = principal_spectra(c.with_chi(0.0), [0.0]).s_minus[0]
    assert s < ref


@settings(max_examples=50, deadline=None)
@given(chi=st.floats(-20, 20), ka=st.floats(0.05, 5.0))
def test_uncertainty_product_property(chi, ka):
    s = principal_spectra(FluctuationCoeffs(ka, 0.0, 0.01, chi), [0.0])
    assert s.s_plus[0] * s.s_minus[0] * ka**2 == pytest.approx(1.0, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(chi=st.floats(-10, 10), d_a=st.floats(0.0, 2.0), w=st.floats(0.0, 10.0))
def test_simplified_mode_agrees_when_amplitude_noise_vanishes(chi, d_a, w):
    c = FluctuationCoeffs(1.0, 0.0, 0.01, chi)
    a = principal_spectra(c, [w], mode="full")
    b = principal_spectra(c, [w], mode="simplified")
    assert b.s_plus[0] == pytest.approx(a.s_plus[0], rel=1e-10)
    assert b.s_minus[0] == pytest.approx(a.s_minus[0], rel=1e-9)


def test_squeeze_axis_is_minimum_noise_direction():
    for chi in (-2.0, -0.3, 0.5, 4.0):
        c = FluctuationCoeffs(1.0, 0.1, 0.01, chi)
        s = principal_spectra(c, [0.0])
        m = noise_spectrum_matrix(c, 0.0)
        u = np.array([math.cos(s.squeeze_axis), math.sin(s.squeeze_axis)])
        assert u @ m @ u == pytest.approx(s.s_minus[0], rel=1e-12)
        assert s.theta == pytest.approx(math.atan(chi))


def test_squeeze_db_values():
    assert squeeze_db(FluctuationCoeffs(1, 0, 0.01, 0.0)) == 0.0
    assert squeeze_db(FluctuationCoeffs(1, 0, 0.01, 0.6)) == pytest.approx(4.94, abs=0.01)
    z10 = squeeze_db(FluctuationCoeffs(1, 0, 0.01, 10.0))
    assert abs(z10 - 20 * math.log10(20)) / (20 * math.log10(20)) < 5e-3
    p = base_laser(epsilon=2.0, pump_w=0.5)
    assert squeeze_db_params(p) == pytest.approx(squeeze_db(fluct_coeffs(p)))
    c = FluctuationCoeffs(1, 0, 0.01, -1.7)
    assert squeeze_db_from_spectra(c) == pytest.approx(squeeze_db(c), abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(chi=st.floats(-10, 10), d_a=st.floats(0.0, 2.0), ka=st.floats(0.1, 3.0))
def test_spectral_ordering_property(chi, d_a, ka):
    s = principal_spectra(FluctuationCoeffs(ka, d_a, 0.01, chi), np.linspace(0, 10, 21))
    assert np.all(s.s_plus >= s.s_minus * (1 - 1e-12))


def test_green_is_real_after_pairing():
    g = GreenFunction(SOFT, 0.3, 0.2, 2.0)
    Z, P = np.meshgrid(np.linspace(-1, 1, 11), np.linspace(-3, 3, 13))
    v = g.complex_value(Z, P)
    assert np.max(np.abs(v.imag)) < 1e-12 * max(1.0, np.max(np.abs(v.real)))


def test_q_amplitude_variance_relaxes_at_twice_kappa_a():
    # weak phase diffusion keeps the cos(phi) spread out of the x variance
    c = FluctuationCoeffs(1.0, 0.1, 1e-3, 0.0, a_mag=10.0)
    h = 0.3
    var = [q_representation(c, 0.0, 0.0, t, extent=5.0, resolution=61).moments()[1][0, 0]
           for t in (0.3, 0.3 + h, 0.3 + 2 * h)]
    rate = -math.log((var[2] - var[1]) / (var[1] - var[0])) / h
    assert rate == pytest.approx(2 * c.kappa_a, rel=0.02)


def test_nv_worked_example():
    p = nv_example()
    c = fluct_coeffs(p)
    assert cooperativity_branches(p).c_plus == pytest.approx(3.0, rel=0.05)
    assert 3.0 < p.epsilon < 5.0
    assert c.chi == pytest.approx(0.6, rel=1e-9)
    assert squeeze_db(c) == pytest.approx(4.94, abs=0.01)
