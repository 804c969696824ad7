import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

import rrtcut as rc
from rrtcut import oracles


def test_window_bounds():
    lo, hi = rc.degree_window(1000, 0.5)
    ln = math.log(1000)
    assert lo == 0.5 * ln and hi == 1.5 * ln


def test_window_infeasible_rejected():
    # ln 3 ~ 1.0986; a hair-thin window holds no integer
    with pytest.raises(ValueError):
        rc.degree_window(3, 0.01)
    with pytest.raises(ValueError):
        rc.sample_conditioned_bernoulli(3, 0.01, rc.RngStream(0, 0))
    with pytest.raises(ValueError):
        rc.build_coupled_pair(3, 0.01, rc.RngStream(0, 0))


def test_epsilon_and_n_validation():
    for bad in (0.0, 1.0, -0.3, 1.5):
        with pytest.raises(ValueError):
            rc.degree_window(100, bad)
    with pytest.raises(ValueError):
        rc.degree_window(1, 0.5)


def test_vertex2_indicator_always_true():
    for seed in range(5):
        draw = rc.sample_conditioned_bernoulli(50, 0.5, rc.RngStream(seed, 0))
        assert bool(draw.values[0]) is True
        assert draw.attempts >= 1
        lo, hi = rc.degree_window(50, 0.5)
        assert lo < int(draw.values.sum()) < hi


def test_rejection_budget_error():
    # window (6.08, 7.74) at n=1000 admits only degree 7; most first draws miss
    raised = False
    for seed in range(50):
        try:
            rc.sample_conditioned_bernoulli(1000, 0.12, rc.RngStream(seed, 0), max_attempts=1)
        except rc.RejectionBudgetError:
            raised = True
            break
    assert raised
    assert issubclass(rc.RejectionBudgetError, RuntimeError)
    assert rc.REJECTION_ATTEMPT_BUDGET == 10**6


def test_coupled_pair_n2_forced():
    sample = rc.build_coupled_pair(2, 0.9, rc.RngStream(3, 0))
    assert sample.tree.to_parent_string() == "0 1"
    assert sample.tree_cond.to_parent_string() == "0 1"
    assert sample.root_degree == sample.root_degree_cond == 1
    assert rc.coupling_diagnostics(sample, 0).tail_ratio == 1.0
    assert rc.coupling_diagnostics(sample, 1).tail_ratio == 1.0


def test_coupled_pair_reproducible():
    a = rc.build_coupled_pair(500, 0.5, rc.RngStream(8, 0))
    b = rc.build_coupled_pair(500, 0.5, rc.RngStream(8, 0))
    assert np.array_equal(a.root_attach, b.root_attach)
    assert np.array_equal(a.root_attach_cond, b.root_attach_cond)
    assert np.array_equal(a.alt_parent, b.alt_parent)
    assert a.tree.to_parent_string() == b.tree.to_parent_string()


def test_alt_parent_ranges():
    sample = rc.build_coupled_pair(300, 0.5, rc.RngStream(17, 0))
    alt = sample.alt_parent
    assert alt[0] == 1
    idx = np.arange(1, len(alt))
    assert np.all(alt[1:] >= 2)
    assert np.all(alt[1:] <= idx + 1)  # vertex j+2 draws from {2..j+1}


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(2, 400),
    eps=st.sampled_from([0.3, 0.5, 0.7, 0.9]),
    seed=st.integers(0, 2**31 - 1),
)
def test_coupled_pair_invariants(n, eps, seed):
    try:
        lo, hi = rc.degree_window(n, eps)
    except ValueError:
        assume(False)  # window holds no integer at tiny n with small eps
    sample = rc.build_coupled_pair(n, eps, rc.RngStream(seed, 0))
    assert sample.root_degree == int(sample.root_attach.sum())
    assert sample.root_degree_cond == int(sample.root_attach_cond.sum())
    assert lo < sample.root_degree_cond < hi
    sample.tree.validate()
    sample.tree_cond.validate()
    agree = sample.root_attach == sample.root_attach_cond
    p1 = sample.tree.parent[2:]
    p2 = sample.tree_cond.parent[2:]
    assert np.array_equal(p1[agree], p2[agree])
    sym = int(np.count_nonzero(~agree))
    max_deg = max(sample.tree.max_degree, sample.tree_cond.max_degree)
    for d in {0, 1, min(2, max_deg), max_deg}:
        diag = rc.coupling_diagnostics(sample, d)
        assert 1.0 / n <= diag.tail_ratio <= n
        assert diag.sym_diff_root_children == sym
        assert diag.differing_degree_count <= sym
        assert abs(diag.tail_count - diag.tail_count_cond) <= 1 + sym
    assert rc.coupling_diagnostics(sample, 0).tail_ratio == 1.0


def test_identical_indicators_give_unit_ratio_everywhere():
    # hunt a sample whose two indicator vectors agree exactly
    found = None
    for seed in range(200):
        sample = rc.build_coupled_pair(6, 0.9, rc.RngStream(seed, 0))
        if np.array_equal(sample.root_attach, sample.root_attach_cond):
            found = sample
            break
    assert found is not None
    for d in range(0, found.tree.max_degree + 2):
        diag = rc.coupling_diagnostics(found, d)
        assert diag.tail_ratio == 1.0
        assert diag.sym_diff_root_children == 0
        assert diag.differing_degree_count == 0


def test_diagnostics_validation():
    sample = rc.build_coupled_pair(50, 0.5, rc.RngStream(2, 0))
    with pytest.raises(ValueError):
        rc.coupling_diagnostics(sample, -1)


def test_acceptance_rate_matches_exact_window_probability():
    n, eps, samples = 100, 0.5, 3000
    gen = rc.RngStream(33, 0).generator()
    attempts = 0
    for _ in range(samples):
        attempts += rc.sample_conditioned_bernoulli(n, eps, gen).attempts
    p_exact = 1.0 - rc.window_miss_probability(n, eps)
    rate = samples / attempts
    se = math.sqrt(p_exact * (1 - p_exact) / attempts)
    assert abs(rate - p_exact) <= 3 * se


def test_unconditional_marginal_matches_generate_rrt_law():
    # coupled-pair first component must be a plain uniform tree: check its
    # root-degree histogram against the exact convolution and its mean tail
    # profile against the per-vertex first-moment oracle
    n, reps = 100, 100_000
    gen = rc.RngStream(44, 0).generator()
    d_counts = np.zeros(n, dtype=np.int64)
    width = 32
    tail_sums = np.zeros(width)
    tail_sumsq = np.zeros(width)
    for _ in range(reps):
        sample = rc.build_coupled_pair(n, 0.5, gen)
        d_counts[sample.root_degree] += 1
        counts = np.bincount(sample.tree.degree[1:], minlength=width)
        z = counts[::-1].cumsum()[::-1][:width].astype(float)
        tail_sums += z
        tail_sumsq += z**2
    pmf = rc.root_degree_distribution_exact(n)
    for deg in range(1, n):
        p = pmf[deg - 1]
        expected = reps * p
        if expected < 10:
            continue
        se = math.sqrt(reps * p * (1 - p))
        assert abs(d_counts[deg] - expected) <= 3 * se, f"root degree cell {deg}"
    mean = tail_sums / reps
    var = np.maximum(tail_sumsq - reps * mean**2, 0.0) / (reps - 1)
    se = np.sqrt(var / reps)
    for d in range(1, 9):
        exact = oracles.exact_tail_first_moment(n, d)
        assert abs(mean[d] - exact) <= 3 * se[d] + 1e-9, f"tail mean at d={d}"
