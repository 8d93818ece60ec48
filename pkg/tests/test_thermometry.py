import math

import numpy as np
import pytest

from revdis import effective as eff
from revdis import engine
from revdis.errors import DomainError, InconsistentInputError, PreconditionError
from revdis.operators import required_truncation
from revdis.params import SpectrumSeries
from revdis.thermometry import (
    fit_lorentzian,
    infer_from_fit,
    infer_phonon_occupation,
    infer_temperature,
    initial_guess,
)


def synthetic(center=-2.0, fwhm=0.0075, area=0.4, span=10, n=400):
    grid = np.linspace(center - span * fwhm, center + span * fwhm, n)
    return SpectrumSeries(grid, eff.lorentzian(grid, center, fwhm, area))


def test_noiseless_round_trip():
    for center, fwhm, area in [(-2.0, 0.0075, 0.4), (0.3, 2.0, 7.0), (1e3, 1e-2, 1e-3)]:
        fit = fit_lorentzian(synthetic(center, fwhm, area))
        assert fit.center == pytest.approx(center, rel=1e-6, abs=1e-6 * fwhm)
        assert fit.fwhm == pytest.approx(fwhm, rel=1e-6)
        assert fit.area == pytest.approx(area, rel=1e-6)


def test_noisy_monte_carlo():
    clean = synthetic()
    errs = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        noisy = clean.values * (1 + 0.01 * rng.standard_normal(clean.values.size))
        errs.append(abs(fit_lorentzian(SpectrumSeries(clean.omega_grid, noisy)).fwhm - 0.0075) / 0.0075)
    assert np.median(errs) < 0.02


def test_fit_on_resolvent_spectrum():
    c = eff.quad_coeffs_c(0.0025, 1.0, 1.0, 2.414)
    model = engine.build_effective_cavity_model(c.d_e, c.d_a, -2.0, required_truncation(c.n_ss, 1e-14))
    grid = np.linspace(-2.0 - 10 * c.kappa_eff, -2.0 + 10 * c.kappa_eff, 400)
    fit = fit_lorentzian(engine.spectrum(model, grid))
    assert fit.fwhm == pytest.approx(c.kappa_eff, rel=0.005)


def test_preconditions():
    with pytest.raises(PreconditionError):
        initial_guess(synthetic(n=5))
    # peak cut off at the edge: half maximum never reached on the left
    grid = np.linspace(-2.0, -1.9, 100)
    with pytest.raises(PreconditionError):
        fit_lorentzian(SpectrumSeries(grid, eff.lorentzian(grid, -2.0, 0.0075, 1.0)))
    with pytest.raises(PreconditionError):
        fit_lorentzian(synthetic(span=1.2))


def test_infer_examples():
    assert infer_phonon_occupation(0.0075, 0.0025, 1.0) == pytest.approx(0.5)
    assert infer_phonon_occupation(0.0025 * 2, 0.0025, 1.0) == 0.0
    assert infer_phonon_occupation(0.017, 0.0025, 1.0) == pytest.approx(2.4)


def test_infer_floor_handling():
    assert infer_phonon_occupation(0.0049, 0.0025, 1.0, fwhm_stderr=1e-4) == 0.0
    with pytest.raises(InconsistentInputError):
        infer_phonon_occupation(0.004, 0.0025, 1.0, fwhm_stderr=1e-5)
    with pytest.raises(DomainError):
        infer_phonon_occupation(0.01, 0.0025, 0.0)


def test_round_trip_pipeline():
    for n_true in (0.5, 1.0, 2.414, 3.6):
        c = eff.quad_coeffs_c(0.0025, 1.0, 1.0, n_true)
        model = engine.build_effective_cavity_model(c.d_e, c.d_a, -2.0, required_truncation(c.n_ss, 1e-14))
        grid = np.linspace(-2.0 - 10 * c.kappa_eff, -2.0 + 10 * c.kappa_eff, 400)
        n_est = infer_from_fit(fit_lorentzian(engine.spectrum(model, grid)), 0.0025, 1.0)
        assert n_est == pytest.approx(n_true, rel=0.01)


def test_linear_spectra_carry_no_occupation():
    for n_true in (0.0, 1.0, 2.5, 4.0):
        c = eff.lin_coeffs_c(0.0025, 1.0, 1.0, n_true)
        grid = np.linspace(-1.0 - 10 * c.kappa_eff, -1.0 + 10 * c.kappa_eff, 400)
        fit = fit_lorentzian(eff.lorentzian_spectrum(c, -1.0, grid))
        assert infer_from_fit(fit, 0.0025, 1.0) <= 0.05


def test_infer_temperature():
    omega = 2 * math.pi * 1e6
    hbar, kb = eff.CONSTANTS.hbar, eff.CONSTANTS.k_B
    assert infer_temperature(0.5, omega) == pytest.approx(hbar * omega / (kb * math.log(3)), rel=1e-12)
    assert infer_temperature(0.0, omega) == 0.0
    temps = [infer_temperature(n, omega) for n in (0.1, 0.5, 1, 3)]
    assert temps == sorted(temps)
    assert eff.thermal_occupation(omega, infer_temperature(1.7, omega)) == pytest.approx(1.7, rel=1e-12)
