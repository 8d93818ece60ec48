"""Superoperator machinery behind the elimination of the mechanics.

The three mechanical superoperators ``(b+^2 .)``, ``(b+ . b+)`` and
``(. b+^2)``, conjugated by the thermal mechanical dissipator, evolve in
closed form under a real 3x3 matrix; this module builds that matrix, its
exponential, and checks the closed form against dense propagation.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from revdis.operators import (
    annihilation,
    check_truncation,
    coherence_sector,
    dagger,
    generator_block,
    required_truncation,
    thermal_density,
    unvec,
    vec,
    vectorize_generator,
)

_EPS = np.finfo(float).eps


def m_matrix(gamma, n_bar_m):
    """Generator of the mechanical superoperator triple."""
    g, n = float(gamma), float(n_bar_m)
    return np.array([
        [g * (2 * n + 1), -2 * g * (n + 1), 0.0],
        [g * n, 0.0, -g * (n + 1)],
        [0.0, 2 * g * n, -g * (2 * n + 1)],
    ])


def s_matrix(gamma, n_bar_m, t):
    """``exp(M t)`` by scaling and squaring with a Pade approximant."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t!r}")
    return sla.expm(m_matrix(gamma, n_bar_m) * t)


def mechanical_dissipator(n_mech, gamma, n_bar_m):
    b = annihilation(n_mech)
    terms = [(gamma * (n_bar_m + 1), b), (gamma * n_bar_m, dagger(b))]
    return vectorize_generator(np.zeros((n_mech, n_mech)), terms)


def _random_states(rng, n, support, count):
    for _ in range(count):
        A = rng.normal(size=(support, support)) + 1j * rng.normal(size=(support, support))
        X = np.zeros((n, n), dtype=complex)
        X[:support, :support] = A + A.conj().T
        yield X


def verify_superop_evolution(dims, gamma, n_bar_m, t, n_samples=4, support=None, seed=0,
                             method="auto"):
    """Max element-wise gap between propagated and closed-form superoperators.

    For random Hermitian ``X`` on the lowest ``support`` mechanical levels,
    compares ``e^{-L t}(b+^2 e^{L t} X)`` with
    ``S11 b+^2 X + S12 b+ X b+ + S13 X b+^2`` and the ``b^2`` counterpart
    ``S31 X b^2 + S32 b X b + S33 b^2 X``.

    ``method="backward"`` applies ``e^{-L t}`` literally. Backward propagation
    amplifies rounding by ``|e^{-L t}|``, which is astronomically large for
    thermal baths on big truncations, so ``"forward"`` instead checks the
    equivalent identity with ``e^{L t}`` applied to both sides. ``"auto"``
    picks backward whenever its amplified rounding stays below 1e-10.
    """
    n = dims.n_mech
    check_truncation(n_bar_m, n, label="mechanics")
    if support is None:
        support = max(2, min(n - 2, n // 4))
    if not 1 <= support <= n:
        raise ValueError(f"support must lie in [1, {n}], got {support}")
    L = mechanical_dissipator(n, gamma, n_bar_m)
    fwd = sla.expm(L * t)
    S = s_matrix(gamma, n_bar_m, t)
    if method == "auto":
        bwd = sla.expm(-L * t)
        method = "backward" if np.linalg.norm(bwd, 1) * _EPS < 1e-10 else "forward"
    elif method == "backward":
        bwd = sla.expm(-L * t)
    elif method != "forward":
        raise ValueError(f"unknown method {method!r}")

    b = annihilation(n)
    bd = dagger(b)
    bd2, b2 = bd @ bd, b @ b
    rng = np.random.default_rng(seed)
    worst = 0.0
    for X in _random_states(rng, n, support, n_samples):
        evolved = unvec(fwd @ vec(X), n)
        closed_up = S[0, 0] * bd2 @ X + S[0, 1] * bd @ X @ bd + S[0, 2] * X @ bd2
        closed_down = S[2, 0] * X @ b2 + S[2, 1] * b @ X @ b + S[2, 2] * b2 @ X
        if method == "backward":
            pairs = [(unvec(bwd @ vec(bd2 @ evolved), n), closed_up),
                     (unvec(bwd @ vec(b2 @ evolved), n), closed_down)]
        else:
            pairs = [(bd2 @ evolved, unvec(fwd @ vec(closed_up), n)),
                     (b2 @ evolved, unvec(fwd @ vec(closed_down), n))]
        for lhs, rhs in pairs:
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def markov_coefficient_check(g2, gamma, n_bar_m):
    """Mechanical (emission, absorption) rates ``8 g2^2 (n+1)^2/gamma, 8 g2^2 n^2/gamma``.

    These follow from the kernel prefactors ``2 (n+1)^2`` and ``2 n^2``, the
    coupling factor ``2 g2^2`` and the substitution
    ``exp(-gamma s) -> (2/gamma) delta(s)`` taken with full weight on the
    half line. The exact half-line integral gives half of this; see
    :func:`born_markov_rates`.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    weight = 2.0 / gamma
    return (2 * g2**2 * 2 * (n_bar_m + 1) ** 2 * weight,
            2 * g2**2 * 2 * n_bar_m**2 * weight)


def born_markov_rates(g2, gamma, n_bar_m, n_mech=None, order=2):
    """Mechanical rates from the exact one-sided memory-kernel integral.

    Emission: ``2 g^2 Re int_0^inf <b^k(s) b+^k(0)> ds`` with ``k = order``
    (2 for quadratic, 1 for linear coupling); absorption with ``b`` and
    ``b+`` exchanged. The correlations are propagated with the truncated
    thermal mechanical dissipator and the integral is the resolvent
    ``-L^{-1}`` on the relevant coherence sector.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma!r}")
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    if n_mech is None:
        n_mech = max(8, required_truncation(n_bar_m, 1e-14))
    b = annihilation(n_mech)
    bd = dagger(b)
    rho = thermal_density(n_bar_m, n_mech, tol=1e-12)
    terms = [(gamma * (n_bar_m + 1), b), (gamma * n_bar_m, bd)]
    charges = np.arange(n_mech)
    H = np.zeros((n_mech, n_mech))
    up = np.linalg.matrix_power(bd, order)
    down = np.linalg.matrix_power(b, order)
    rates = []
    for creator, annihilator, shift in ((up, down, order), (down, up, -order)):
        rows = coherence_sector(charges, shift)
        L = generator_block(H, terms, rows)
        x0 = (creator @ rho)[rows[0], rows[1]]
        y = np.linalg.solve(L, -x0)
        integral = np.real(annihilator.T[rows[0], rows[1]] @ y)
        rates.append(2 * g2**2 * float(integral))
    return tuple(rates)
