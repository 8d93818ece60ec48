import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revdis import effective as eff
from revdis.errors import DomainError
from revdis.params import SystemParams

occupation = st.floats(0.0, 10.0)
cooperativity = st.floats(0.01, 20.0)


def test_cavity_amplitude():
    assert eff.cavity_amplitude(1.0, 0.0, 2.0) == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    for _ in range(10):
        eta, dc, k = rng.uniform(0, 10), rng.uniform(-3, 3), rng.uniform(0.01, 1)
        assert abs(eff.cavity_amplitude(eta, dc, k)) ** 2 == pytest.approx(eta**2 / (dc**2 + k**2 / 4))
    with pytest.raises(DomainError):
        eff.cavity_amplitude(1.0, 0.0, 0.0)


def test_resonance_root_without_pump():
    p = SystemParams(omega_m=1.3, g0_quad=1e-6, kappa=0.01, eta=0.0)
    assert eff.resonance_detuning(p) == pytest.approx(-2.6, abs=1e-12)


def test_resonance_root_below_bare_point_and_self_consistent():
    base = SystemParams(omega_m=1.0, g0_quad=5e-7, kappa=0.0025)
    roots = []
    for eta in np.linspace(50.0, 1000.0, 40):
        p = base.replace(eta=float(eta))
        root = eff.resonance_detuning(p)
        assert root < -2.0
        alpha = abs(eff.cavity_amplitude(eta, root, p.kappa))
        assert root == pytest.approx(-2 * (p.omega_m + 2 * p.g0_quad * alpha**2), abs=1e-10)
        roots.append(root)
    assert np.all(np.diff(roots) < 0)


def test_thermal_occupation():
    hbar, kb = eff.CONSTANTS.hbar, eff.CONSTANTS.k_B
    omega = 2 * math.pi * 1e6
    T = hbar * omega / (kb * math.log(2))
    assert eff.thermal_occupation(omega, T) == pytest.approx(1.0, rel=1e-12)
    for n in (0.1, 1.0, 10.0):
        T = eff.temperature_from_occupation(omega, n)
        assert eff.thermal_occupation(omega, T) == pytest.approx(n, rel=1e-12)
    # 1 MHz at 50 uK, evaluated with CODATA constants
    assert eff.thermal_occupation(omega, 50e-6) == pytest.approx(0.6206, abs=1e-4)
    assert eff.temperature_from_occupation(omega, 0.0) == 0.0
    with pytest.raises(DomainError):
        eff.thermal_occupation(omega, 0.0)
    with pytest.raises(DomainError):
        eff.temperature_from_occupation(omega, -1.0)


def test_quad_coeffs_reference_linewidths():
    widths = [eff.quad_coeffs_c(0.0025, 1.0, 1.0, n).kappa_eff for n in (0.0, 0.5, 2.414, 3.6)]
    assert np.allclose(widths, [0.005, 0.0075, 0.01707, 0.023], rtol=1e-12)


def test_quad_coeffs_bare_cavity():
    c = eff.quad_coeffs(0.01, 0.7, 0.0, 1.0, 2.0)
    assert c.d_e == pytest.approx(0.01 * 1.7)
    assert c.d_a == pytest.approx(0.01 * 0.7)
    assert c.n_ss == pytest.approx(0.7)


def test_quad_coeffs_from_coupling_matches_cooperativity():
    g2, gamma, kappa = 0.02, 0.5, 0.003
    C2 = eff.quadratic_cooperativity(g2, gamma, kappa)
    a = eff.quad_coeffs(kappa, 1.0, g2, gamma, 0.8)
    b = eff.quad_coeffs_c(kappa, 1.0, C2, 0.8)
    assert a.d_e == pytest.approx(b.d_e) and a.d_a == pytest.approx(b.d_a)
    assert a.kappa_eff == pytest.approx(kappa * (1 + C2 * 2.6))


@pytest.mark.parametrize("C2", [0.1, 1.0, 10.0])
def test_critical_occupation_independent_of_cooperativity(C2):
    crit = eff.n_m_crit_quad(1.0)
    assert crit == pytest.approx(1 + math.sqrt(2))
    assert eff.n_ss_quad(1.0, C2, crit) == pytest.approx(1.0, abs=1e-12)
    assert eff.n_ss_quad(1.0, C2, crit + 1e-3) > 1.0
    assert eff.n_ss_quad(1.0, C2, crit - 1e-3) < 1.0
    assert eff.n_m_crit_quad(0.0) == 0.0


def test_n_m_star_examples():
    assert eff.n_m_star(1.0, 1.0) == pytest.approx(math.sqrt(2) - 1)
    assert eff.n_m_star(0.0, 3.0) == 0.0
    # closed form at C2 = 0.1, cross-checked by a fine grid minimization
    star = eff.n_m_star(1.0, 0.1)
    grid = np.linspace(0, 3, 300001)
    assert star == pytest.approx(0.84429, abs=1e-5)
    assert grid[np.argmin(eff.n_ss_quad(1.0, 0.1, grid))] == pytest.approx(star, abs=1e-4)
    with pytest.warns(RuntimeWarning):
        assert eff.n_m_star(1.0, 0.0) == 0.0
    with pytest.raises(DomainError):
        eff.n_m_star(1.0, -1.0)


def test_lorentzian_spectrum_properties():
    c = eff.quad_coeffs_c(0.0025, 1.0, 1.0, 0.5)
    s = eff.lorentzian_spectrum(c, -2.0, np.array([-2.0 - c.kappa_eff / 2, -2.0, -2.0 + c.kappa_eff / 2]))
    peak = 2 * c.n_ss / (math.pi * c.kappa_eff)
    assert s.values[1] == pytest.approx(peak)
    assert s.values[0] == pytest.approx(peak / 2) and s.values[2] == pytest.approx(peak / 2)
    wide = eff.lorentzian_spectrum(c, -2.0, np.linspace(-2 - 50 * c.kappa_eff, -2 + 50 * c.kappa_eff, 2001))
    assert wide.area() == pytest.approx(c.n_ss, rel=0.015)


def test_lin_coeffs_examples():
    for n in (0.0, 1.0, 5.0):
        assert eff.lin_coeffs_c(0.01, 1.0, 1.0, n).kappa_eff == pytest.approx(0.02)
    for C1 in (0.1, 1.0, 10.0):
        assert eff.lin_coeffs_c(0.01, 0.7, C1, 0.7).n_ss == pytest.approx(0.7)
    assert eff.n_ss_lin(1.0, 1.0, 3.0) == pytest.approx(2.0)
    g1, gamma, kappa = 0.05, 1.0, 0.01
    a = eff.lin_coeffs(kappa, 1.0, g1, gamma, 3.0)
    assert a.cooperativity == pytest.approx(eff.linear_cooperativity(g1, gamma, kappa))


def test_mean_dynamics():
    c = eff.quad_coeffs_c(0.01, 1.0, 1.0, 0.5)
    assert eff.mean_amplitude(0.0, 0.3 + 0.1j, c, -2.0) == pytest.approx(0.3 + 0.1j)
    assert eff.mean_photon(0.0, 4.0, c) == pytest.approx(4.0)
    t_half = 2 * math.log(2) / c.kappa_eff
    assert abs(eff.mean_amplitude(t_half, 1.0, c, -2.0)) == pytest.approx(0.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-4, 1.0), occupation, cooperativity, occupation)
def test_coefficient_identities(kappa, n_o, C2, n_m):
    for c in (eff.quad_coeffs_c(kappa, n_o, C2, n_m), eff.lin_coeffs_c(kappa, n_o, C2, n_m)):
        assert c.kappa_eff == c.d_e - c.d_a
        assert c.n_ss == c.d_a / c.kappa_eff
    q = eff.quad_coeffs_c(kappa, n_o, C2, n_m)
    assert q.n_ss == pytest.approx(float(eff.n_ss_quad(n_o, C2, n_m)), rel=1e-9, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5.0), cooperativity)
def test_n_ss_terms_monotone(n_o, C2):
    grid = np.linspace(0.0, 5.0, 51)
    first, second = eff.n_ss_quad_terms(n_o, C2, grid)
    assert np.all(np.diff(first) < 0)
    assert np.all(np.diff(second) > 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e3, 1e9), st.floats(1e-3, 1e3))
def test_temperature_round_trip(omega, n):
    T = eff.temperature_from_occupation(omega, n)
    assert eff.thermal_occupation(omega, T) == pytest.approx(n, rel=1e-10)
