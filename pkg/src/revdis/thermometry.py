"""Mechanical-bath thermometry from the cavity noise linewidth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from revdis.effective import lorentzian, temperature_from_occupation
from revdis.errors import DomainError, FitError, InconsistentInputError, PreconditionError
from revdis.params import SpectrumSeries

MIN_POINTS = 8
MIN_SPAN_FWHM = 3.0
MAX_ITERATIONS = 200
STEP_TOL = 1e-10
FLOOR_SIGMAS = 3.0
FLOOR_RTOL = 1e-9


@dataclass(frozen=True)
class LorentzianFit:
    center: float
    fwhm: float
    area: float
    residual_norm: float
    covariance: np.ndarray
    iterations: int = 0

    @property
    def fwhm_stderr(self):
        return float(math.sqrt(max(self.covariance[1, 1], 0.0)))


def _half_max_crossings(x, y, peak):
    half = y[peak] / 2.0
    left = peak
    while left > 0 and y[left] > half:
        left -= 1
    right = peak
    while right < len(y) - 1 and y[right] > half:
        right += 1
    if y[left] > half or y[right] > half:
        return None

    def interp(i, j):
        if y[i] == y[j]:
            return x[i]
        return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i])

    return interp(left, left + 1), interp(right - 1, right)


def initial_guess(series: SpectrumSeries):
    """Peak location, half-max width and trapezoidal area of ``series``."""
    x, y = series.omega_grid, series.values
    if x.size < MIN_POINTS:
        raise PreconditionError(f"need at least {MIN_POINTS} grid points, got {x.size}")
    peak = int(np.argmax(y))
    if not y[peak] > 0:
        raise PreconditionError("spectrum has no positive peak")
    crossings = _half_max_crossings(x, y, peak)
    if crossings is None:
        raise PreconditionError("grid does not reach half maximum on both sides of the peak")
    fwhm = crossings[1] - crossings[0]
    span = x[-1] - x[0]
    if span < MIN_SPAN_FWHM * fwhm:
        raise PreconditionError(
            f"grid spans {span:.3g}, less than {MIN_SPAN_FWHM:g}x the apparent FWHM {fwhm:.3g}"
        )
    area = float(np.trapezoid(y, x))
    return float(x[peak]), float(fwhm), area


def fit_lorentzian(series: SpectrumSeries) -> LorentzianFit:
    """Levenberg-Marquardt fit of ``area * (G/2) / ((w - w0)^2 + G^2/4) / pi``.

    The problem is solved in coordinates centred on the initial peak and
    scaled by the initial width and height so the tolerances are
    scale-free. Stops when the relative step falls below 1e-10; failing to do
    so within 200 iterations raises :class:`FitError`.
    """
    w0, g0, a0 = initial_guess(series)
    x = (series.omega_grid - w0) / g0
    height = 2 * a0 / (math.pi * g0)
    y = series.values / height
    area0 = a0 / (g0 * height)

    def residual(theta):
        c, g, a = theta
        return lorentzian(x, c, g, a) - y

    def jacobian(theta):
        c, g, a = theta
        d = x - c
        q = d**2 + g**2 / 4
        base = g / (2 * math.pi * q)
        return np.column_stack([
            a * base * 2 * d / q,
            a / (2 * math.pi) * (1 / q - g**2 / (2 * q**2)),
            base,
        ])

    sol = least_squares(residual, [0.0, 1.0, area0], jac=jacobian, method="lm",
                        xtol=STEP_TOL, ftol=1e-15, gtol=1e-15, max_nfev=MAX_ITERATIONS)
    diagnostics = {"status": int(sol.status), "message": sol.message, "nfev": int(sol.nfev),
                   "initial": (w0, g0, a0)}
    if sol.status <= 0:
        raise FitError(f"Lorentzian fit did not converge: {sol.message}", diagnostics)
    c, g, a = sol.x
    if not g > 0 or not a > 0:
        raise FitError(f"fit produced unphysical width {g:.3g} or area {a:.3g}", diagnostics)
    g = abs(g)
    dof = max(1, x.size - 3)
    s2 = float(sol.fun @ sol.fun) / dof
    try:
        cov_scaled = np.linalg.inv(sol.jac.T @ sol.jac) * s2
    except np.linalg.LinAlgError:
        cov_scaled = np.full((3, 3), np.inf)
    scale = np.array([g0, g0, g0 * height])
    covariance = cov_scaled * np.outer(scale, scale)
    residual_norm = float(np.linalg.norm(sol.fun) * height)
    return LorentzianFit(center=w0 + c * g0, fwhm=g * g0, area=a * g0 * height,
                         residual_norm=residual_norm, covariance=covariance,
                         iterations=int(sol.nfev))


def infer_phonon_occupation(fwhm, kappa, C2, fwhm_stderr=0.0):
    """Invert ``fwhm = kappa (1 + C2 (2 n + 1))`` for the mechanical occupation.

    A width below the zero-temperature floor ``kappa (1 + C2)`` is clamped to
    0 when within ``3 * fwhm_stderr`` (plus a 1e-9 relative allowance);
    otherwise it is inconsistent with the model.
    """
    if not C2 > 0:
        raise DomainError(f"C2 must be > 0, got {C2!r}")
    if not kappa > 0:
        raise DomainError(f"kappa must be > 0, got {kappa!r}")
    floor = kappa * (1 + C2)
    if fwhm < floor:
        tol = FLOOR_SIGMAS * fwhm_stderr + FLOOR_RTOL * floor
        if floor - fwhm <= tol:
            return 0.0
        raise InconsistentInputError(
            f"linewidth {fwhm:.6g} is below the quantum-noise floor {floor:.6g} "
            f"by more than {tol:.3g}"
        )
    return ((fwhm / kappa - 1) / C2 - 1) / 2


def infer_from_fit(fit: LorentzianFit, kappa, C2):
    return infer_phonon_occupation(fit.fwhm, kappa, C2, fit.fwhm_stderr)


def infer_temperature(n_bar_m, omega_m):
    """Bath temperature (K) for occupation ``n_bar_m`` at ``omega_m`` (rad/s); 0 maps to 0 K."""
    return temperature_from_occupation(omega_m, n_bar_m)
