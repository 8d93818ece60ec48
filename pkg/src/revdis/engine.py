"""Lindblad models of the optomechanical system and their dynamics.

All generators are ``d rho/dt = -i[H, rho] + sum_k r_k D[C_k] rho``. Models
with a conserved excitation charge (the RWA and cavity-only models) carry a
per-basis-state ``charges`` vector; every dissipator and Hamiltonian term then
shifts the charge difference of a matrix unit ``|i><j|`` by zero, so the
coherence sectors ``q_i - q_j = s`` are invariant and each solve below is
restricted to the one sector it needs.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from revdis.errors import (
    DegenerateSteadyStateError,
    DimensionError,
    DomainError,
    InstabilityError,
    ModelError,
    NoSteadyStateError,
    SteadyStateError,
    StiffnessError,
)
from revdis.operators import (
    HERMITIAN_TOL,
    THERMAL_TAIL_TOL,
    HilbertDims,
    annihilation,
    check_truncation,
    coherence_sector,
    dagger,
    generator_block,
    is_hermitian,
    number,
)
from revdis.params import SpectrumSeries, SystemParams

RWA_WARN_RATIO = 1e-2
CAVITY_TOP_POP_TOL = 1e-6
STEADY_RESIDUAL_TOL = 1e-8
_RCOND_MIN = 1e-13


class RWAWarning(UserWarning):
    """The static frequency shift is not small compared to the mechanics."""


class Frame(enum.Enum):
    RWA_QUADRATIC = "rwa_quadratic"
    DISPLACED_FULL = "displaced_full"
    RWA_LINEAR = "rwa_linear"
    CAVITY_ONLY_EFFECTIVE = "cavity_only_effective"


def operator_shift(op, charges):
    """Charge change produced by ``op``; ``None`` if it mixes several shifts."""
    r, c = np.nonzero(np.abs(op) > 0)
    if r.size == 0:
        return 0
    diffs = np.unique(charges[r] - charges[c])
    return int(diffs[0]) if diffs.size == 1 else None


@dataclass(frozen=True, eq=False)
class LindbladModel:
    hamiltonian: np.ndarray
    collapse_terms: tuple
    frame: Frame
    cavity_op: np.ndarray
    dims: HilbertDims | None = None
    charges: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        H = np.asarray(self.hamiltonian, dtype=complex)
        if not is_hermitian(H, HERMITIAN_TOL):
            raise ModelError("model Hamiltonian is not Hermitian within 1e-10")
        terms = []
        for rate, C in self.collapse_terms:
            if not np.isfinite(rate) or rate < 0:
                raise ModelError(f"collapse rates must be >= 0, got {rate!r}")
            C = np.asarray(C, dtype=complex)
            if C.shape != H.shape:
                raise DimensionError(f"collapse operator {C.shape} does not match H {H.shape}")
            terms.append((float(rate), C))
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "collapse_terms", tuple(terms))
        if self.charges is not None:
            q = np.asarray(self.charges, dtype=int)
            if q.shape != (H.shape[0],):
                raise DimensionError("charges must have one entry per basis state")
            if operator_shift(H, q) != 0 or any(operator_shift(C, q) is None for _, C in terms):
                raise ModelError("charges are not conserved by the generator")
            object.__setattr__(self, "charges", q)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def sector(self, shift=0):
        """Matrix-unit indices ``(i, j)`` of the coherence sector ``shift``."""
        if self.charges is None:
            if shift != 0:
                raise ModelError("model has no conserved charge; only the full space exists")
            return coherence_sector(self.dim)
        return coherence_sector(self.charges, shift)

    def block(self, shift=0):
        rows = self.sector(shift)
        return rows, generator_block(self.hamiltonian, self.collapse_terms, rows)

    def shift_of(self, X):
        """Sector containing operator ``X`` (``0`` for models without charges)."""
        if self.charges is None:
            return 0
        s = operator_shift(X, self.charges)
        if s is None:
            raise ModelError("operator is not confined to a single coherence sector")
        return s


def _bath_terms(p, a, b):
    ad, bd = dagger(a), dagger(b)
    return (
        (p.kappa * (p.n_bar_o + 1), a),
        (p.kappa * p.n_bar_o, ad),
        (p.gamma * (p.n_bar_m + 1), b),
        (p.gamma * p.n_bar_m, bd),
    )


def _joint_charges(dims, photon, phonon):
    n = np.arange(dims.n_cav)[:, None]
    m = np.arange(dims.n_mech)[None, :]
    return (photon * n + phonon * m).ravel()


def _rwa_check(p, alpha, threshold):
    omega_prime = p.omega_m + 2 * p.g0_quad * alpha**2
    ratio = p.g0_quad * alpha**2 / omega_prime
    notes = []
    if ratio > threshold:
        msg = f"RWA ratio g0*alpha^2/omega_m' = {ratio:.3g} exceeds {threshold:g}"
        warnings.warn(msg, RWAWarning, stacklevel=3)
        notes.append({"kind": "rwa_ratio", "value": ratio, "threshold": threshold})
    return omega_prime, ratio, notes


def build_full_rwa_model(p: SystemParams, dims: HilbertDims, alpha: float,
                         tail_tol=THERMAL_TAIL_TOL, rwa_threshold=RWA_WARN_RATIO) -> LindbladModel:
    """Quadratic model after displacement and RWA: ``H = g2 (a+ b^2 + b+^2 a)``."""
    if not alpha > 0:
        raise ModelError(f"alpha must be > 0, got {alpha!r}")
    tail = check_truncation(p.n_bar_m, dims.n_mech, tail_tol, "mechanics")
    omega_prime, ratio, notes = _rwa_check(p, alpha, rwa_threshold)
    a, b = dims.ladder_ops()
    g2 = p.g0_quad * alpha
    b2 = b @ b
    H = g2 * (dagger(a) @ b2 + dagger(b2) @ a)
    return LindbladModel(
        H, _bath_terms(p, a, b), Frame.RWA_QUADRATIC, a, dims,
        charges=_joint_charges(dims, 2, 1),
        info={"g2": g2, "alpha": alpha, "omega_m_prime": omega_prime, "rwa_ratio": ratio,
              "mech_tail": tail, "warnings": notes},
    )


def build_displaced_model(p: SystemParams, dims: HilbertDims, alpha: float,
                          tail_tol=THERMAL_TAIL_TOL) -> LindbladModel:
    """Linearized quadratic model in the displaced frame, no RWA.

    ``H = -Delta_c a+a + w' b+b - g0 alpha^2 (b+^2 + b^2) + g0 alpha (a + a+)(b + b+)^2``
    with ``w' = omega_m + 2 g0 alpha^2``; the single-photon term
    ``g0 a+a (b + b+)^2`` is dropped.
    """
    if not alpha > 0:
        raise ModelError(f"alpha must be > 0, got {alpha!r}")
    tail = check_truncation(p.n_bar_m, dims.n_mech, tail_tol, "mechanics")
    a, b = dims.ladder_ops()
    ad, bd = dagger(a), dagger(b)
    g0 = p.g0_quad
    omega_prime = p.omega_m + 2 * g0 * alpha**2
    x2 = (b + bd) @ (b + bd)
    H = (-p.delta_c * ad @ a + omega_prime * bd @ b - g0 * alpha**2 * (bd @ bd + b @ b)
         + g0 * alpha * (a + ad) @ x2)
    return LindbladModel(
        H, _bath_terms(p, a, b), Frame.DISPLACED_FULL, a, dims,
        info={"g2": g0 * alpha, "alpha": alpha, "omega_m_prime": omega_prime,
              "rwa_ratio": g0 * alpha**2 / omega_prime, "mech_tail": tail, "warnings": []},
    )


def build_linear_rwa_model(p: SystemParams, dims: HilbertDims,
                           tail_tol=THERMAL_TAIL_TOL) -> LindbladModel:
    """Beam-splitter model ``H = g1 (a+ b + b+ a)`` for red detuning by omega_m."""
    tail = check_truncation(p.n_bar_m, dims.n_mech, tail_tol, "mechanics")
    a, b = dims.ladder_ops()
    H = p.g1_lin * (dagger(a) @ b + dagger(b) @ a)
    return LindbladModel(
        H, _bath_terms(p, a, b), Frame.RWA_LINEAR, a, dims,
        charges=_joint_charges(dims, 1, 1),
        info={"g1": p.g1_lin, "mech_tail": tail, "warnings": []},
    )


def build_effective_cavity_model(D_e, D_a, delta_c, n_cav) -> LindbladModel:
    """Cavity-only model with emission ``D_e`` and absorption ``D_a``."""
    if D_a < 0 or D_e < 0:
        raise ModelError(f"rates must be >= 0, got D_e={D_e!r}, D_a={D_a!r}")
    if D_a >= D_e:
        raise InstabilityError(f"D_a={D_a:g} >= D_e={D_e:g}: no steady state")
    a = annihilation(n_cav)
    return LindbladModel(
        -delta_c * number(n_cav), ((D_e, a), (D_a, dagger(a))),
        Frame.CAVITY_ONLY_EFFECTIVE, a, charges=np.arange(n_cav),
        info={"D_e": D_e, "D_a": D_a, "delta_c": delta_c, "warnings": []},
    )


def quadratic_rwa_params(C2, kappa, gamma, n_bar_o, n_bar_m, alpha=100.0, omega_m=None):
    """``(SystemParams, alpha)`` realising cooperativity ``C2 = 8 g2^2/(gamma kappa)``.

    ``omega_m`` defaults to a value deep in the resolved-sideband regime so
    that the RWA ratio stays at 1e-3.
    """
    g2 = math.sqrt(C2 * gamma * kappa / 8.0)
    g0 = g2 / alpha
    if omega_m is None:
        omega_m = 1e3 * max(gamma, kappa, g2 * alpha)
    omega_prime = omega_m + 2 * g0 * alpha**2
    p = SystemParams(omega_m=omega_m, delta_c=-2 * omega_prime, g0_quad=g0, kappa=kappa,
                     gamma=gamma, n_bar_o=n_bar_o, n_bar_m=n_bar_m)
    return p, alpha


def linear_rwa_params(C1, kappa, gamma, n_bar_o, n_bar_m, omega_m=None):
    """``SystemParams`` realising ``C1 = 4 g1^2/(gamma kappa)``."""
    g1 = math.sqrt(C1 * gamma * kappa / 4.0)
    if omega_m is None:
        omega_m = 1e3 * max(gamma, kappa, g1)
    return SystemParams(omega_m=omega_m, delta_c=-omega_m, g1_lin=g1, kappa=kappa,
                        gamma=gamma, n_bar_o=n_bar_o, n_bar_m=n_bar_m)


def _to_sector(X, rows):
    return np.asarray(X)[rows[0], rows[1]]


def _from_sector(x, rows, d):
    out = np.zeros((d, d), dtype=complex)
    out[rows[0], rows[1]] = x
    return out


def _lu_with_rcond(M):
    # singularity is judged by the condition estimate, not scipy's warning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    rcond, info = sla.lapack.zgecon(lu, np.linalg.norm(M, 1), norm="1")
    return lu, piv, (rcond if info == 0 else 0.0)


def steady_state(model: LindbladModel, check_stability=False) -> np.ndarray:
    """Unit-trace kernel element of the generator via a bordered LU solve.

    The population equation of the first diagonal matrix unit is replaced by
    the trace constraint. A numerically singular bordered matrix means the
    kernel is not one-dimensional.
    """
    rows, L = model.block(0)
    diag = np.flatnonzero(rows[0] == rows[1])
    A = L.copy()
    A[diag[0], :] = 0.0
    A[diag[0], diag] = 1.0
    rhs = np.zeros(len(A), dtype=complex)
    rhs[diag[0]] = 1.0
    lu, piv, rcond = _lu_with_rcond(A)
    if not rcond > _RCOND_MIN:
        raise DegenerateSteadyStateError(
            f"bordered generator is singular (rcond={rcond:.3g}); kernel dimension > 1"
        )
    x = sla.lu_solve((lu, piv), rhs, check_finite=False)
    scale = np.linalg.norm(L)
    resid = np.linalg.norm(L @ x)
    if not resid < STEADY_RESIDUAL_TOL * scale:
        raise SteadyStateError(f"steady-state residual {resid:.3g} exceeds {STEADY_RESIDUAL_TOL:g}*|L|")
    if check_stability:
        ev = sla.eigvals(L)
        if ev.real.max() > 1e-9 * scale:
            raise NoSteadyStateError(f"generator has growing mode (Re={ev.real.max():.3g})")
    rho = _from_sector(x, rows, model.dim)
    return 0.5 * (rho + rho.conj().T)


def _sector_shifts(model, X):
    if model.charges is None:
        return [0]
    r, c = np.nonzero(np.abs(X) > 0)
    if r.size == 0:
        return [0]
    return [int(s) for s in np.unique(model.charges[r] - model.charges[c])]


def _propagate(model, X0, times, tol, max_evals):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be a non-decreasing sequence of non-negative values")
    out = np.zeros((len(times), model.dim, model.dim), dtype=complex)
    if times.size == 0:
        return out
    t_end = float(times[-1])
    if t_end == 0:
        out[:] = X0
        return out
    evals = 0
    for shift in _sector_shifts(model, X0):
        rows, L = model.block(shift)
        y0 = _to_sector(X0, rows)

        def rhs(_t, y, L=L):
            nonlocal evals
            evals += 1
            if evals > max_evals:
                raise StiffnessError(
                    f"more than {max_evals} generator evaluations; the problem is too stiff "
                    "for explicit integration, use steady_state for long times"
                )
            return L @ y

        sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", t_eval=times,
                        rtol=tol, atol=tol * 1e-2)
        if sol.status != 0:
            raise StiffnessError(f"integration failed: {sol.message}; consider steady_state instead")
        for k in range(len(times)):
            out[k, rows[0], rows[1]] += sol.y[:, k]
    # keep the t=0 entries bit-identical to the input
    out[times == 0] = X0
    return out


def evolve(model: LindbladModel, rho0, t, tol=1e-8, max_evals=2_000_000) -> np.ndarray:
    """State at time ``t`` by adaptive embedded Runge-Kutta (DOP853).

    The trace is not renormalized.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise DimensionError(f"state shape {rho0.shape} does not match model dimension {model.dim}")
    if t == 0:
        return rho0.copy()
    return _propagate(model, rho0, [t], tol, max_evals)[-1]


def trajectory(model: LindbladModel, rho0, times, tol=1e-8, max_evals=2_000_000) -> np.ndarray:
    """States at every entry of the non-decreasing ``times``."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise DimensionError(f"state shape {rho0.shape} does not match model dimension {model.dim}")
    return _propagate(model, rho0, times, tol, max_evals)


def two_time_correlation(model: LindbladModel, A, B, tau_grid, rho_ss=None, tol=1e-10,
                         max_evals=2_000_000) -> np.ndarray:
    """``C(tau) = Tr{A e^{L tau}(B rho_ss)}`` on a non-decreasing grid."""
    if rho_ss is None:
        rho_ss = steady_state(model)
    X0 = np.asarray(B) @ rho_ss
    states = _propagate(model, X0, tau_grid, tol, max_evals)
    return np.einsum("ij,tji->t", np.asarray(A), states)


def spectrum(model: LindbladModel, omega_grid, rho_ss=None, threads=1) -> SpectrumSeries:
    """Cavity noise spectrum from the resolvent.

    Solves ``(i w + L) x = -vec(a rho_ss)`` for every ``w`` and returns
    ``S(w) = Re Tr{a+ x} / pi``. Grid points where the shifted generator is
    singular are skipped and listed in ``meta['skipped']``.
    """
    omega = np.asarray(omega_grid, dtype=float)
    if rho_ss is None:
        rho_ss = steady_state(model)
    a = model.cavity_op
    X0 = a @ rho_ss
    rows, L = model.block(model.shift_of(X0))
    b = -_to_sector(X0, rows)
    weights = np.conj(_to_sector(a, rows))
    eye = np.eye(len(L))

    def solve_one(w):
        M = L + 1j * w * eye
        lu, piv, rcond = _lu_with_rcond(M)
        if not rcond > _RCOND_MIN:
            return None
        x = sla.lu_solve((lu, piv), b, check_finite=False)
        return float(np.real(weights @ x) / math.pi)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(solve_one, omega))
    else:
        results = [solve_one(w) for w in omega]
    keep = [k for k, r in enumerate(results) if r is not None]
    skipped = [float(omega[k]) for k, r in enumerate(results) if r is None]
    n_ss = float(np.real(np.einsum("ij,ji->", dagger(a) @ a, rho_ss)))
    meta = {"frame": model.frame.value, "n_ss": n_ss, "skipped": skipped}
    return SpectrumSeries(omega[keep], np.array([results[k] for k in keep]), meta)


def g2_zero(rho, a=None) -> float:
    """Normalized equal-time intensity correlation ``<a+^2 a^2>/<a+ a>^2``."""
    rho = np.asarray(rho)
    if a is None:
        a = annihilation(rho.shape[0])
    ad = dagger(a)
    n = float(np.real(np.einsum("ij,ji->", ad @ a, rho)))
    if n <= 1e-14:
        raise DomainError("g2(0) is undefined for a state with zero mean photon number")
    n2 = float(np.real(np.einsum("ij,ji->", ad @ ad @ a @ a, rho)))
    return n2 / n**2


def truncation_report(model: LindbladModel, rho, tol=CAVITY_TOP_POP_TOL):
    """Populations of the two highest cavity (and mechanical) levels in ``rho``."""
    p = np.real(np.diag(rho))
    if model.dims is None:
        cav = p
        mech = None
    else:
        grid = p.reshape(model.dims.n_cav, model.dims.n_mech)
        cav = grid.sum(axis=1)
        mech = grid.sum(axis=0)
    report = {"cavity_top_population": float(cav[-2:].sum()), "warnings": []}
    if report["cavity_top_population"] >= tol:
        report["warnings"].append({"kind": "cavity_truncation",
                                   "value": report["cavity_top_population"], "threshold": tol})
    if mech is not None:
        report["mechanics_top_population"] = float(mech[-2:].sum())
    return report
