"""Dense operator algebra on truncated Fock spaces.

Operators are plain complex ``numpy`` arrays. Density matrices are vectorized
by column stacking, so that ``vec(X @ rho @ Y) == kron(Y.T, X) @ vec(rho)``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from revdis.errors import ConfigurationError, DimensionError, ModelError, TruncationError

DEFAULT_MAX_DIM = 4096
MAX_SUPEROP_DIM = 8192
THERMAL_TAIL_TOL = 1e-8
HERMITIAN_TOL = 1e-10


def max_joint_dim():
    """Joint Hilbert dimension cap, overridable through ``REVDIS_MAX_DIM``."""
    raw = os.environ.get("REVDIS_MAX_DIM")
    if raw is None or raw == "":
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"REVDIS_MAX_DIM must be an integer, got {raw!r}") from exc
    if value < 4:
        raise ConfigurationError(f"REVDIS_MAX_DIM must be >= 4, got {value}")
    return value


def _check_joint(dim):
    limit = max_joint_dim()
    if dim > limit:
        raise ConfigurationError(
            f"joint dimension {dim} exceeds the limit {limit} (set REVDIS_MAX_DIM to raise it)"
        )


@dataclass(frozen=True)
class HilbertDims:
    """Fock truncations of the cavity and mechanical modes."""

    n_cav: int
    n_mech: int

    def __post_init__(self):
        for name in ("n_cav", "n_mech"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 2:
                raise DimensionError(f"{name} must be an integer >= 2, got {value!r}")
        _check_joint(self.joint)

    @property
    def joint(self):
        return int(self.n_cav) * int(self.n_mech)

    def ladder_ops(self):
        """Return ``(a, b)`` embedded in the joint space, cavity factor first."""
        a = tensor(annihilation(self.n_cav), np.eye(self.n_mech))
        b = tensor(np.eye(self.n_cav), annihilation(self.n_mech))
        return a, b


def annihilation(n):
    """Lowering operator with ``<i|a|i+1> = sqrt(i+1)`` on ``n`` Fock levels."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DimensionError(f"truncation must be an integer >= 2, got {n!r}")
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def creation(n):
    return annihilation(n).conj().T


def number(n):
    return np.diag(np.arange(n, dtype=float)).astype(complex)


def tensor(A, B):
    """Kronecker product ``A (x) B`` with the cavity factor first."""
    A = np.asarray(A)
    B = np.asarray(B)
    for op in (A, B):
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise DimensionError(f"tensor factors must be square, got shape {op.shape}")
    _check_joint(A.shape[0] * B.shape[0])
    return np.kron(A, B).astype(complex)


def dagger(A):
    return np.asarray(A).conj().T


def is_hermitian(A, tol=HERMITIAN_TOL):
    A = np.asarray(A)
    return A.ndim == 2 and A.shape[0] == A.shape[1] and np.allclose(A, A.conj().T, rtol=0, atol=tol)


def thermal_tail(n_bar, n):
    """Total Bose-Einstein weight on levels ``>= n`` before renormalization."""
    if n_bar == 0:
        return 0.0
    return (n_bar / (1.0 + n_bar)) ** n


def required_truncation(n_bar, tol=THERMAL_TAIL_TOL):
    """Smallest ``n >= 2`` with ``thermal_tail(n_bar, n) < tol``."""
    if n_bar == 0:
        return 2
    ratio = n_bar / (1.0 + n_bar)
    n = max(2, math.ceil(math.log(tol) / math.log(ratio)))
    while thermal_tail(n_bar, n) >= tol:
        n += 1
    return n


def check_truncation(n_bar, n, tol=THERMAL_TAIL_TOL, label="mode"):
    tail = thermal_tail(n_bar, n)
    if tail >= tol:
        need = required_truncation(n_bar, tol)
        raise TruncationError(
            f"{label}: truncation {n} leaves thermal tail {tail:.3g} >= {tol:g} "
            f"for occupation {n_bar:g}; need n >= {need}",
            required=need,
        )
    return tail


def thermal_density(n_bar, n, tol=THERMAL_TAIL_TOL):
    """Thermal state with mean occupation ``n_bar`` on ``n`` Fock levels.

    Weights ``n_bar**k / (1 + n_bar)**(k + 1)`` are renormalized to unit trace
    after truncation. Raises :class:`TruncationError` if the discarded tail is
    not below ``tol``.
    """
    if n_bar < 0 or not np.isfinite(n_bar):
        raise ModelError(f"occupation must be finite and >= 0, got {n_bar!r}")
    annihilation(n)  # dimension validation
    check_truncation(n_bar, n, tol)
    k = np.arange(n, dtype=float)
    if n_bar == 0:
        p = (k == 0).astype(float)
    else:
        # log-space keeps large n_bar from overflowing
        p = np.exp(k * math.log(n_bar) - (k + 1) * math.log1p(n_bar))
    return np.diag(p / p.sum()).astype(complex)


def expectation(A, rho):
    """``Tr(A rho)`` as a complex scalar."""
    A = np.asarray(A)
    rho = np.asarray(rho)
    if A.shape != rho.shape or A.ndim != 2:
        raise DimensionError(f"shape mismatch: operator {A.shape} vs state {rho.shape}")
    return complex(np.einsum("ij,ji->", A, rho))


def vec(X):
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v)
    if d is None:
        d = math.isqrt(v.size)
    if d * d != v.size:
        raise DimensionError(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(d, d, order="F")


def _validate_generator(H, collapse_terms, tol):
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"Hamiltonian must be square, got {H.shape}")
    if not is_hermitian(H, tol):
        dev = np.max(np.abs(H - H.conj().T))
        raise ModelError(f"Hamiltonian is not Hermitian (max deviation {dev:.3g} > {tol:g})")
    terms = []
    for rate, C in collapse_terms:
        C = np.asarray(C, dtype=complex)
        if C.shape != H.shape:
            raise DimensionError(f"collapse operator shape {C.shape} != Hamiltonian shape {H.shape}")
        if not np.isfinite(rate) or rate < 0:
            raise ModelError(f"collapse rates must be finite and >= 0, got {rate!r}")
        terms.append((float(rate), C))
    return H, terms


def _sandwich_terms(H, terms):
    """Expand the generator into ``(X, Y)`` pairs meaning ``rho -> X rho Y``."""
    d = H.shape[0]
    eye = np.eye(d, dtype=complex)
    pairs = [(-1j * H, eye), (eye, 1j * H)]
    for rate, C in terms:
        if rate == 0:
            continue
        CdC = C.conj().T @ C
        pairs.append((rate * C, C.conj().T))
        pairs.append((-0.5 * rate * CdC, eye))
        pairs.append((eye, -0.5 * rate * CdC))
    return pairs


def lindblad_rhs(H, collapse_terms, rho):
    """Right-hand side ``-i[H, rho] + sum rate * D[C] rho`` evaluated directly."""
    H = np.asarray(H, dtype=complex)
    out = -1j * (H @ rho - rho @ H)
    for rate, C in collapse_terms:
        C = np.asarray(C, dtype=complex)
        Cd = C.conj().T
        CdC = Cd @ C
        out = out + rate * (C @ rho @ Cd - 0.5 * (CdC @ rho + rho @ CdC))
    return out


def vectorize_generator(H, collapse_terms, tol=HERMITIAN_TOL):
    """Dense Liouvillian acting on column-stacked density matrices."""
    H, terms = _validate_generator(H, collapse_terms, tol)
    d = H.shape[0]
    if d * d > MAX_SUPEROP_DIM:
        raise ConfigurationError(
            f"superoperator dimension {d * d} exceeds {MAX_SUPEROP_DIM}; "
            "use a symmetry sector (generator_block) instead"
        )
    L = np.zeros((d * d, d * d), dtype=complex)
    for X, Y in _sandwich_terms(H, terms):
        L += np.kron(Y.T, X)
    return L


def coherence_sector(charges, shift=0):
    """Index pairs ``(i, j)`` with ``charges[i] - charges[j] == shift``.

    Pairs come in column-stacking order, so with ``charges=None`` the result
    enumerates the full vectorization.
    """
    if np.ndim(charges) == 0:
        d = int(charges)
        jj, ii = np.divmod(np.arange(d * d), d)
        return ii, jj
    q = np.asarray(charges)
    mask = (q[:, None] - q[None, :]) == shift
    jj, ii = np.nonzero(mask.T)
    return ii, jj


def generator_block(H, collapse_terms, rows, cols=None, tol=HERMITIAN_TOL):
    """Liouvillian restricted to the matrix units ``|i><j|`` listed in ``rows``/``cols``.

    Entry ``[(k, l), (i, j)]`` is ``<k| L(|i><j|) |l>``. When ``rows`` spans a
    subspace the generator leaves invariant this is an exact block of the full
    Liouvillian.
    """
    H, terms = _validate_generator(H, collapse_terms, tol)
    if cols is None:
        cols = rows
    K, Lr = (np.asarray(x) for x in rows)
    I, J = (np.asarray(x) for x in cols)
    if max(len(K), len(I)) > MAX_SUPEROP_DIM:
        raise ConfigurationError(
            f"generator block {len(K)}x{len(I)} exceeds the dense limit {MAX_SUPEROP_DIM}"
        )
    block = np.zeros((len(K), len(I)), dtype=complex)
    for X, Y in _sandwich_terms(H, terms):
        block += X[np.ix_(K, I)] * Y[np.ix_(J, Lr)].T
    return block
