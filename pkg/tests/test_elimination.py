import numpy as np
import pytest

from revdis.elimination import (
    born_markov_rates,
    m_matrix,
    markov_coefficient_check,
    s_matrix,
    verify_superop_evolution,
)
from revdis.errors import TruncationError
from revdis.operators import HilbertDims


def test_m_matrix_examples():
    assert np.array_equal(m_matrix(1.0, 0.0), [[1, -2, 0], [0, 0, -1], [0, 0, -1]])
    assert np.array_equal(m_matrix(2.0, 1.0), [[6, -8, 0], [2, 0, -4], [0, 4, -6]])
    assert np.allclose(m_matrix(3.7, 0.4), 3.7 * m_matrix(1.0, 0.4))


@pytest.mark.parametrize("n_bar", [0.0, 0.5, 1.0, 2.0])
def test_m_matrix_spectrum(n_bar):
    # the characteristic polynomial is lambda (gamma^2 - lambda^2) for every occupation
    gamma = 1.3
    ev = np.sort(np.linalg.eigvals(m_matrix(gamma, n_bar)).real)
    assert np.allclose(ev, [-gamma, 0.0, gamma], atol=1e-12)


def test_s_matrix_identity_and_real():
    assert np.array_equal(s_matrix(0.7, 0.3, 0.0), np.eye(3))
    rng = np.random.default_rng(0)
    for _ in range(10):
        S = s_matrix(rng.uniform(0.1, 3), rng.uniform(0, 3), rng.uniform(0, 2))
        assert S.dtype.kind == "f"
    with pytest.raises(ValueError):
        s_matrix(1.0, 0.0, -1.0)


def test_s_matrix_derivative():
    gamma, n, t, h = 0.8, 0.7, 1.3, 1e-5
    fd = (s_matrix(gamma, n, t + h) - s_matrix(gamma, n, t - h)) / (2 * h)
    assert np.max(np.abs(fd - m_matrix(gamma, n) @ s_matrix(gamma, n, t))) < 1e-6


def test_s_matrix_semigroup():
    gamma, n = 1.1, 0.5
    assert np.allclose(s_matrix(gamma, n, 0.3) @ s_matrix(gamma, n, 0.9), s_matrix(gamma, n, 1.2),
                       atol=1e-9, rtol=0)


def test_superop_evolution_examples():
    assert verify_superop_evolution(HilbertDims(2, 12), 1.0, 0.0, 0.0) < 1e-12
    assert verify_superop_evolution(HilbertDims(2, 12), 1.0, 0.0, 0.5) < 1e-6
    assert verify_superop_evolution(HilbertDims(2, 30), 1.0, 1.0, 1.0) < 1e-5


def test_superop_backward_and_forward_agree_when_stable():
    dims = HilbertDims(2, 12)
    back = verify_superop_evolution(dims, 1.0, 0.0, 0.5, method="backward")
    fwd = verify_superop_evolution(dims, 1.0, 0.0, 0.5, method="forward")
    assert back < 1e-6 and fwd < 1e-6


def test_superop_discrepancy_falls_with_truncation():
    gaps = [verify_superop_evolution(HilbertDims(2, n), 1.0, 0.5, 1.0, support=4) for n in (17, 22, 28)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_superop_requires_adequate_truncation():
    with pytest.raises(TruncationError):
        verify_superop_evolution(HilbertDims(2, 12), 1.0, 1.0, 1.0)


def test_markov_coefficient_examples():
    g2, gamma = 0.3, 2.0
    assert markov_coefficient_check(g2, gamma, 0.0) == pytest.approx((8 * g2**2 / gamma, 0.0))
    assert markov_coefficient_check(1.0, 8.0, 1.0) == pytest.approx((4.0, 1.0))
    emit, absorb = markov_coefficient_check(0.2, 1.0, 0.7)
    assert emit / absorb == pytest.approx((1.7 / 0.7) ** 2)


@pytest.mark.parametrize("n_bar", [0.0, 0.5, 2.0])
def test_born_markov_rates_are_half_of_delta_rule(n_bar):
    g2, gamma = 0.3, 2.0
    exact = born_markov_rates(g2, gamma, n_bar)
    delta_rule = markov_coefficient_check(g2, gamma, n_bar)
    assert exact[0] == pytest.approx(delta_rule[0] / 2, rel=1e-9)
    assert exact[1] == pytest.approx(delta_rule[1] / 2, rel=1e-9, abs=1e-15)


def test_born_markov_linear_order():
    g1, gamma, n = 0.4, 3.0, 1.5
    emit, absorb = born_markov_rates(g1, gamma, n, order=1)
    assert emit == pytest.approx(4 * g1**2 * (n + 1) / gamma, rel=1e-9)
    assert absorb == pytest.approx(4 * g1**2 * n / gamma, rel=1e-9)
