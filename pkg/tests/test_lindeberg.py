"""Smooth-max machinery.

Claims under test:
    - sandwich max <= f_beta <= max + log C(n,K)/beta; flat-disorder
      equality f_beta = c C(K,2) + log C(n,K)/beta
    - Gibbs edge weights: symmetry value, [0,1] range, monotone in the
      edge weight, sum identity residual
    - derivative formulas vs multiprecision finite differences and the
      algebraic bounds d1 in [0,1], d2 in [0, beta/4], |d3| <= beta^2/4
    - interpolation path endpoints and telescoping
    - aggregated multiplicity identity by full order enumeration,
      including the x = y collapse and the B_0/B_N corner values
    - universality gap: identical laws, hypothesis gate, budget value
"""

import math
from math import comb, log

import numpy as np
import pytest

from densek.disorder import (
    DisorderMatrix,
    bernoulli_half,
    bounded_custom,
    gaussian_half_quarter,
    gaussian_std,
    pair_count,
    sample_disorder,
)
from densek.errors import DomainError, HypothesisViolatedError, ResourceLimitError
from densek.lindeberg import (
    GibbsState,
    InterpolationPlan,
    aggregated_multiplicity_check,
    default_beta,
    gibbs_edge_weight,
    gibbs_sum_identity,
    interpolation_path,
    make_interpolation_plan,
    smooth_max,
    smooth_max_derivatives,
    universality_gap,
)
from densek.solver import psi_exact

from _oracles import mp_smooth_max


def _flat_matrix(n, c):
    return DisorderMatrix(n, np.full(pair_count(n), c),
                          bounded_custom([c], [1.0]), seed=0)


def test_flat_disorder_exact_value():
    n, k, beta, c = 7, 3, 2.0, 0.4
    m = _flat_matrix(n, c)
    assert smooth_max(m, k, beta) == pytest.approx(
        c * comb(k, 2) + log(comb(n, k)) / beta, rel=1e-12)


def test_sandwich():
    for s in range(20):
        m = sample_disorder(8, gaussian_std(), seed=1000 + s)
        psi = psi_exact(m, 3).value
        for beta in (0.5, 2.0, 1000.0):
            f = smooth_max(m, 3, beta)
            assert psi - 1e-10 <= f <= psi + log(comb(8, 3)) / beta + 1e-10
    # large beta pinches the gap
    m = sample_disorder(8, gaussian_std(), seed=5)
    assert smooth_max(m, 3, 1000.0) - psi_exact(m, 3).value <= \
        log(comb(8, 3)) / 1000.0 + 1e-12


def test_smooth_max_against_naive_summation():
    m = sample_disorder(8, gaussian_std(), seed=77)
    got = smooth_max(m, 3, 1.3)
    want = float(mp_smooth_max(m.dense(), 8, 3, 1.3))
    assert got == pytest.approx(want, abs=1e-10)


def test_gibbs_state_cache_consistency():
    m = sample_disorder(9, gaussian_half_quarter(), seed=3)
    st = GibbsState.create(m, 4, 0.9)
    assert st.log_partition == pytest.approx(
        0.9 * smooth_max(m, 4, 0.9), abs=1e-10)


def test_gibbs_weight_symmetric_case():
    n, k = 8, 3
    m = _flat_matrix(n, 0.2)
    w = gibbs_edge_weight(m, k, 1.0, (2, 5))
    assert w == pytest.approx(comb(n - 2, k - 2) / comb(n, k), rel=1e-10)


def test_gibbs_weight_monotone_in_weight():
    base = sample_disorder(8, gaussian_std(), seed=21)
    k, beta, e = 3, 1.0, (0, 1)
    w_small = gibbs_edge_weight(base, k, beta, e)
    boosted = base.weights.copy()
    from densek.disorder import pair_index
    boosted[pair_index(8, 0, 1)] = 50.0
    m2 = DisorderMatrix(8, boosted, base.spec, seed=base.seed)
    w_big = gibbs_edge_weight(m2, k, beta, e)
    assert w_big > w_small
    assert w_big > 0.99  # the edge dominates the softmax


def test_gibbs_sum_identity_residuals():
    for s in range(50):
        m = sample_disorder(9, gaussian_std(), seed=100 + s)
        assert gibbs_sum_identity(m, 4, 1.1) <= 1e-9 * comb(4, 2)
    z = _flat_matrix(8, 0.0)
    assert gibbs_sum_identity(z, 3, 1.0) <= 1e-12 * comb(3, 2)


def test_derivative_bounds_on_random_instances():
    rng = np.random.default_rng(17)
    for i in range(100):
        m = sample_disorder(7, gaussian_std(), seed=int(rng.integers(1 << 40)))
        beta = float(rng.uniform(0.2, 3.0))
        e = (int(rng.integers(7)), int(rng.integers(7)))
        if e[0] == e[1]:
            e = (0, 1)
        d1, d2, d3 = smooth_max_derivatives(m, 3, beta, e)
        assert -1e-12 <= d1 <= 1 + 1e-12
        assert -1e-12 <= d2 <= beta / 4 + 1e-12
        assert abs(d3) <= beta * beta / 4 + 1e-12


def test_derivatives_match_finite_differences():
    # multiprecision central differences at steps 1e-4 / 1e-3
    import mpmath as mp
    for s in range(5):
        m = sample_disorder(8, gaussian_std(), seed=4000 + s)
        beta = 1.0
        e = (0, 1)
        d1, d2, d3 = smooth_max_derivatives(m, 3, beta, e)
        W = m.dense()

        def f(delta):
            return mp_smooth_max(W, 8, 3, beta, delta_edge=e,
                                 delta=mp.mpf(delta))
        h = mp.mpf("1e-4")
        fd1 = float((f(h) - f(-h)) / (2 * h))
        fd2 = float((f(h) - 2 * f(0) + f(-h)) / (h * h))
        h = mp.mpf("1e-3")
        fd3 = float((f(2 * h) - 2 * f(h) + 2 * f(-h) - f(-2 * h))
                    / (2 * h ** 3))
        assert abs(d1 - fd1) <= 1e-5 * abs(d1) + 1e-7
        assert abs(d2 - fd2) <= 1e-5 * abs(d2) + 1e-7
        assert abs(d3 - fd3) <= 1e-5 * abs(d3) + 1e-7


def test_flat_disorder_d2_value():
    n, k, beta = 8, 3, 1.5
    m = _flat_matrix(n, 0.3)
    p = comb(n - 2, k - 2) / comb(n, k)
    _, d2, _ = smooth_max_derivatives(m, k, beta, (1, 4))
    assert d2 == pytest.approx(beta * p * (1 - p), rel=1e-10)


def test_interpolation_path():
    plan = make_interpolation_plan(6, bernoulli_half(), seed=9)
    vals = interpolation_path(plan, 3, 0.8)
    n_pairs = pair_count(6)
    assert len(vals) == n_pairs + 1
    # endpoints are the pure-disorder smooth maxima
    mx = DisorderMatrix(6, plan.x_weights, gaussian_half_quarter(), seed=0)
    my = DisorderMatrix(6, plan.y_weights, bernoulli_half(), seed=0)
    assert vals[0] == pytest.approx(smooth_max(my, 3, 0.8), abs=1e-10)
    assert vals[-1] == pytest.approx(smooth_max(mx, 3, 0.8), abs=1e-10)
    # telescoping
    diffs = vals[1:] - vals[:-1]
    assert abs((vals[-1] - vals[0]) - diffs.sum()) <= 1e-10


def test_interpolation_path_constant_when_equal():
    plan = make_interpolation_plan(5, bernoulli_half(), seed=4)
    same = InterpolationPlan(n=5, edge_order=plan.edge_order,
                             x_weights=plan.y_weights,
                             y_weights=plan.y_weights, seed=4)
    vals = interpolation_path(same, 3, 1.0)
    assert np.allclose(vals, vals[0], atol=1e-12)


def test_plan_validation():
    with pytest.raises(DomainError):
        InterpolationPlan(n=5, edge_order=(0, 1, 2), x_weights=np.zeros(10),
                          y_weights=np.zeros(10), seed=0)


def test_multiplicity_identity_random_pairs():
    for s in range(5):
        x = sample_disorder(4, gaussian_half_quarter(), seed=600 + s).weights
        y = sample_disorder(4, bernoulli_half(), seed=700 + s).weights
        lhs, rhs, resid = aggregated_multiplicity_check(4, 3, 0.7, x, y)
        assert resid <= 1e-8 * lhs


def test_multiplicity_identity_collapsed():
    x = sample_disorder(4, gaussian_half_quarter(), seed=8).weights
    lhs, rhs, resid = aggregated_multiplicity_check(4, 3, 1.0, x, x)
    n_pairs = pair_count(4)
    assert lhs == pytest.approx(
        2 * math.factorial(n_pairs) * comb(3, 2), rel=1e-12)
    assert resid <= 1e-8 * lhs


def test_multiplicity_corner_sums():
    # B_0 and B_N each equal (N-1)! C(K,2): the all-y and all-x states
    from densek.lindeberg import _gibbs_vector_flat
    x = sample_disorder(4, gaussian_half_quarter(), seed=1).weights
    y = sample_disorder(4, bernoulli_half(), seed=2).weights
    n_pairs = pair_count(4)
    for flat in (x, y):
        g = _gibbs_vector_flat(flat, 4, 3, 0.7)
        b = math.factorial(n_pairs - 1) * g.sum()
        assert b == pytest.approx(
            math.factorial(n_pairs - 1) * comb(3, 2), rel=1e-10)


def test_multiplicity_resource_limit():
    with pytest.raises(ResourceLimitError):
        aggregated_multiplicity_check(5, 3, 1.0, np.zeros(10), np.zeros(10))


def test_universality_gap_identical_laws():
    res = universality_gap(12, 3, 0.5, gaussian_half_quarter(),
                           trials=30, seed=3)
    assert res.gap_estimate <= res.ci_halfwidth + 1e-12
    assert res.gap_estimate == 0.0  # same seeds, same distribution


def test_universality_gap_contract():
    with pytest.raises(HypothesisViolatedError):
        universality_gap(12, 3, 0.5, gaussian_std(), trials=5, seed=0)
    res = universality_gap(12, 3, 0.5, bernoulli_half(), trials=20, seed=1)
    assert res.gap_estimate >= 0.0
    assert res.budget == pytest.approx(3 ** (4 / 3) * log(12) ** (7 / 6))
    assert res.trials == 20


def test_default_beta_matches_documented_scale():
    assert default_beta(100, 10) == pytest.approx(
        (10 * math.sqrt(log(100)) / 2) ** (-1 / 3))


def test_partition_resource_limit():
    m = sample_disorder(40, gaussian_std(), seed=0)
    with pytest.raises(ResourceLimitError):
        smooth_max(m, 16, 1.0)
