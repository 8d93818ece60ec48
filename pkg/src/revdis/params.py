"""Shared parameter and result containers."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from revdis.errors import ModelError


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and occupations, in units where ``omega_m = 1`` by default.

    ``g0_quad`` is the single-photon quadratic coupling, ``g1_lin`` the
    field-amplified linear coupling used only by linear models. ``eta`` is the
    (complex) pump rate.
    """

    omega_m: float = 1.0
    delta_c: float = -2.0
    g0_quad: float = 0.0
    g1_lin: float = 0.0
    kappa: float = 0.0025
    gamma: float = 0.25
    n_bar_o: float = 0.0
    n_bar_m: float = 0.0
    eta: complex = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value):
                raise ModelError(f"{f.name} must be finite, got {value!r}")
        for name in ("omega_m", "kappa", "gamma"):
            if getattr(self, name) <= 0:
                raise ModelError(f"{name} must be > 0, got {getattr(self, name)!r}")
        for name in ("g0_quad", "g1_lin", "n_bar_o", "n_bar_m"):
            if getattr(self, name) < 0:
                raise ModelError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SystemParams(**values)


@dataclass(frozen=True)
class SpectrumSeries:
    """Sampled noise spectrum ``S(omega)``."""

    omega_grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        omega = np.asarray(self.omega_grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.ndim != 1 or omega.shape != values.shape:
            raise ValueError(f"grid {omega.shape} and values {values.shape} must be matching 1-D arrays")
        if omega.size > 1 and not np.all(np.diff(omega) > 0):
            raise ValueError("omega grid must be strictly increasing")
        if values.size and values.min() < -1e-10 * max(1.0, float(np.abs(values).max())):
            raise ValueError(f"spectrum has negative values (min {values.min():.3g})")
        object.__setattr__(self, "omega_grid", omega)
        object.__setattr__(self, "values", values)

    def area(self):
        """Trapezoidal integral over the sampled grid."""
        return float(np.trapezoid(self.values, self.omega_grid))
