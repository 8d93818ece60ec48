"""Closed-form results for the cavity after eliminating the mechanics.

Rates are in units of ``omega_m`` (or ``omega_m'``) unless a function takes SI
arguments explicitly (the thermal-occupation conversions).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.constants

from revdis.errors import DomainError, NoSolutionError
from revdis.params import SpectrumSeries, SystemParams


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = scipy.constants.hbar
    k_B: float = scipy.constants.k


CONSTANTS = PhysicalConstants()


class CouplingKind(enum.Enum):
    QUADRATIC = "quadratic"
    LINEAR = "linear"


@dataclass(frozen=True)
class EffectiveCoeffs:
    """Emission/absorption rates of the effective cavity master equation.

    ``kappa_eff`` and ``n_ss`` are derived from ``d_e`` and ``d_a`` at
    construction so the identities ``kappa_eff == d_e - d_a`` and
    ``n_ss == d_a / kappa_eff`` hold exactly.
    """

    d_e: float
    d_a: float
    coupling_kind: CouplingKind
    cooperativity: float
    kappa: float

    def __post_init__(self):
        if not self.d_e > self.d_a:
            raise DomainError(f"kappa_eff must be > 0 (d_e={self.d_e!r}, d_a={self.d_a!r})")

    @property
    def kappa_eff(self):
        return self.d_e - self.d_a

    @property
    def n_ss(self):
        return self.d_a / (self.d_e - self.d_a)


def cavity_amplitude(eta, delta_c, kappa):
    """Steady-state displaced cavity amplitude ``eta / (-i Delta_c + kappa/2)``."""
    if not np.all(np.asarray(kappa) > 0):
        raise DomainError("kappa must be > 0")
    return eta / (-1j * np.asarray(delta_c) + np.asarray(kappa) / 2.0)


def resonance_polynomial(p: SystemParams):
    """Coefficients, highest power first, of the cubic fixing ``Delta_c = -2 omega_m'``."""
    w, k = p.omega_m, p.kappa
    return np.array([1.0, 2 * w, k**2 / 4, w * k**2 / 2 + 4 * p.g0_quad * abs(p.eta) ** 2])


def resonance_detuning(p: SystemParams) -> float:
    """Detuning satisfying ``Delta_c = -2 omega_m'`` self-consistently.

    Roots come from the eigenvalues of the companion matrix, polished by one
    Newton step. The real root nearest ``-2 omega_m`` is returned.
    """
    c = resonance_polynomial(p)
    companion = np.zeros((3, 3))
    companion[0, :] = -c[1:]
    companion[1, 0] = companion[2, 1] = 1.0
    roots = np.linalg.eigvals(companion)
    scale = max(1.0, float(np.abs(roots).max()))
    real = roots[np.abs(roots.imag) <= 1e-8 * scale].real
    if real.size == 0:
        raise NoSolutionError("resonance cubic has no real root")
    order = np.argsort(np.abs(real + 2 * p.omega_m))
    root = float(real[order[0]])
    if real.size > 1 and abs(real[order[1]] - real[order[0]]) < 1e-3 * p.omega_m:
        warnings.warn(f"several real resonance roots near {root:.6g}", RuntimeWarning, stacklevel=2)
    dp = np.polyder(c)
    slope = np.polyval(dp, root)
    if slope != 0:
        root -= np.polyval(c, root) / slope
    return float(root)


def thermal_occupation(omega, T, constants=CONSTANTS):
    """Bose-Einstein occupation at angular frequency ``omega`` (rad/s) and ``T`` (K)."""
    if not omega > 0:
        raise DomainError(f"omega must be > 0, got {omega!r}")
    if not T > 0:
        raise DomainError(f"temperature must be > 0, got {T!r}")
    return 1.0 / math.expm1(constants.hbar * omega / (constants.k_B * T))


def temperature_from_occupation(omega, n_bar, constants=CONSTANTS):
    """Inverse of :func:`thermal_occupation`; ``n_bar == 0`` maps to 0 K."""
    if not omega > 0:
        raise DomainError(f"omega must be > 0, got {omega!r}")
    if n_bar < 0 or not math.isfinite(n_bar):
        raise DomainError(f"occupation must be finite and >= 0, got {n_bar!r}")
    if n_bar == 0:
        return 0.0
    return constants.hbar * omega / (constants.k_B * math.log1p(1.0 / n_bar))


def quad_rate_from_coupling(g2, gamma):
    """Mechanically induced rate scale ``8 g2^2 / gamma`` (``= kappa * C2``)."""
    return 8.0 * g2**2 / gamma


def quadratic_cooperativity(g2, gamma, kappa):
    return 8.0 * g2**2 / (gamma * kappa)


def linear_cooperativity(g1, gamma, kappa):
    return 4.0 * g1**2 / (gamma * kappa)


def _check_rates(kappa, gamma=1.0):
    if not kappa > 0 or not gamma > 0:
        raise DomainError(f"kappa and gamma must be > 0, got kappa={kappa!r}, gamma={gamma!r}")


def quad_coeffs_from_rate(kappa, n_bar_o, rate, n_bar_m):
    """Quadratic coefficients given the mechanical rate scale ``rate = kappa * C2``."""
    _check_rates(kappa)
    d_e = kappa * (n_bar_o + 1) + rate * (n_bar_m + 1) ** 2
    d_a = kappa * n_bar_o + rate * n_bar_m**2
    return EffectiveCoeffs(d_e, d_a, CouplingKind.QUADRATIC, rate / kappa, kappa)


def quad_coeffs(kappa, n_bar_o, g2, gamma, n_bar_m) -> EffectiveCoeffs:
    _check_rates(kappa, gamma)
    return quad_coeffs_from_rate(kappa, n_bar_o, quad_rate_from_coupling(g2, gamma), n_bar_m)


def quad_coeffs_c(kappa, n_bar_o, C2, n_bar_m) -> EffectiveCoeffs:
    """Quadratic coefficients parameterized by the cooperativity ``C2``."""
    return quad_coeffs_from_rate(kappa, n_bar_o, kappa * C2, n_bar_m)


def lin_coeffs_from_rate(kappa, n_bar_o, rate, n_bar_m):
    _check_rates(kappa)
    d_e = kappa * (n_bar_o + 1) + rate * (n_bar_m + 1)
    d_a = kappa * n_bar_o + rate * n_bar_m
    return EffectiveCoeffs(d_e, d_a, CouplingKind.LINEAR, rate / kappa, kappa)


def lin_coeffs(kappa, n_bar_o, g1, gamma, n_bar_m) -> EffectiveCoeffs:
    _check_rates(kappa, gamma)
    return lin_coeffs_from_rate(kappa, n_bar_o, 4.0 * g1**2 / gamma, n_bar_m)


def lin_coeffs_c(kappa, n_bar_o, C1, n_bar_m) -> EffectiveCoeffs:
    return lin_coeffs_from_rate(kappa, n_bar_o, kappa * C1, n_bar_m)


def kappa_eff_quad(kappa, C2, n_bar_m):
    return kappa * (1 + C2 * (2 * np.asarray(n_bar_m) + 1))


def kappa_eff_lin(kappa, C1, n_bar_m):
    return kappa * (1 + C1) * np.ones_like(np.asarray(n_bar_m, dtype=float))


def n_ss_quad_terms(n_bar_o, C2, n_bar_m):
    """The two terms of the quadratic steady-state photon number.

    The first (optical-bath) term falls and the second (mechanical) term
    rises with ``n_bar_m``.
    """
    n_bar_m = np.asarray(n_bar_m, dtype=float)
    denom = 1 + C2 * (2 * n_bar_m + 1)
    return n_bar_o / denom, C2 * n_bar_m**2 / denom


def n_ss_quad(n_bar_o, C2, n_bar_m):
    first, second = n_ss_quad_terms(n_bar_o, C2, n_bar_m)
    return first + second


def n_ss_lin(n_bar_o, C1, n_bar_m):
    n_bar_m = np.asarray(n_bar_m, dtype=float)
    return n_bar_o / (1 + C1) + C1 * n_bar_m / (1 + C1)


def n_m_star(n_bar_o, C2):
    """Mechanical occupation minimizing the quadratic steady-state photon number.

    Clamped at 0 where the closed form goes negative. ``C2 == 0`` returns 0
    with a warning, since the photon number no longer depends on ``n_bar_m``.
    """
    if C2 < 0:
        raise DomainError(f"C2 must be >= 0, got {C2!r}")
    if C2 == 0:
        warnings.warn("C2 = 0: photon number is independent of n_bar_m; returning 0",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    value = (-1 - C2 + math.sqrt((1 + C2) ** 2 + 4 * C2 * n_bar_o)) / (2 * C2)
    return max(0.0, value)


def n_m_crit_quad(n_bar_o):
    """Mechanical occupation at which the cavity ends at ``n_bar_o`` for any ``C2``."""
    if n_bar_o < 0:
        raise DomainError(f"n_bar_o must be >= 0, got {n_bar_o!r}")
    return n_bar_o + math.sqrt(n_bar_o * (1 + n_bar_o))


def n_m_crit_lin(n_bar_o):
    if n_bar_o < 0:
        raise DomainError(f"n_bar_o must be >= 0, got {n_bar_o!r}")
    return float(n_bar_o)


def lorentzian(omega, center, fwhm, area):
    """``area * (fwhm/2) / ((omega - center)^2 + fwhm^2/4) / pi``."""
    omega = np.asarray(omega, dtype=float)
    half = fwhm / 2.0
    return area / math.pi * half / ((omega - center) ** 2 + half**2)


def lorentzian_spectrum(coeffs: EffectiveCoeffs, delta_c, omega_grid) -> SpectrumSeries:
    values = lorentzian(omega_grid, delta_c, coeffs.kappa_eff, coeffs.n_ss)
    meta = {"source": "closed_form", "kappa_eff": coeffs.kappa_eff, "n_ss": coeffs.n_ss,
            "delta_c": delta_c, "coupling": coeffs.coupling_kind.value}
    return SpectrumSeries(np.asarray(omega_grid, dtype=float), values, meta)


def mean_amplitude(t, a0, coeffs: EffectiveCoeffs, delta_c):
    t = np.asarray(t, dtype=float)
    return a0 * np.exp((1j * delta_c - coeffs.kappa_eff / 2) * t)


def mean_photon(t, n0, coeffs: EffectiveCoeffs):
    t = np.asarray(t, dtype=float)
    return coeffs.n_ss + (n0 - coeffs.n_ss) * np.exp(-coeffs.kappa_eff * t)
