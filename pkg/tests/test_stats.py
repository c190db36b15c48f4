import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import friedmanchisquare, studentized_range

from ndeso.stats import (
    Q_ALPHA, MissingCellError, ScoreTable, cd_groups, friedman, mean_ranks, nemenyi_cd,
    rank_analysis, rank_rows, resolve_missing, significance_matrix,
)


def brute_ranks(row):
    """Average rank of each entry: 1 + #strictly better + half of #ties (others)."""
    out = []
    for i, v in enumerate(row):
        better = sum(w > v for w in row)
        ties = sum(w == v for j, w in enumerate(row) if j != i)
        out.append(1 + better + ties / 2)
    return out


def test_full_ties():
    R = mean_ranks(np.full((4, 5), 0.7))
    np.testing.assert_array_equal(R, [3.0] * 5)
    chi2, p = friedman(np.full((4, 5), 0.7))
    assert chi2 == 0.0 and p == 1.0


def test_consistent_order():
    scores = np.array([[0.9, 0.8, 0.7], [0.6, 0.5, 0.1], [0.99, 0.98, 0.2]])
    np.testing.assert_array_equal(mean_ranks(scores), [1, 2, 3])
    chi2, p = friedman(scores)
    assert chi2 == pytest.approx(6.0, abs=1e-12)
    assert p == pytest.approx(math.exp(-3), abs=1e-12)
    assert p == pytest.approx(0.0498, abs=1e-4)


def test_average_rank_ties():
    np.testing.assert_array_equal(mean_ranks(np.array([[0.9, 0.9, 0.5]])), [1.5, 1.5, 3])


def test_missing_cells_rejected_then_resolved():
    t = ScoreTable(np.array([[0.9, np.nan, 0.5], [0.4, 0.6, 0.5], [0.7, 0.2, np.nan]]),
                   ["a", "b", "c"], ["m1", "m2", "m3"])
    with pytest.raises(MissingCellError):
        mean_ranks(t)
    worst, dropped = resolve_missing(t, "worst-rank")
    assert dropped == []
    np.testing.assert_array_equal(mean_ranks(worst), np.mean([[1, 3, 2], [3, 1, 2], [1, 2, 3]], axis=0))
    kept, dropped = resolve_missing(t, "drop-row")
    assert dropped == ["a", "c"] and kept.datasets == ["b"]


def test_worst_rank_shares_bottom_positions():
    t = ScoreTable(np.array([[0.9, np.nan, np.nan]]), ["a"], ["x", "y", "z"])
    np.testing.assert_array_equal(mean_ranks(resolve_missing(t)[0]), [1, 2.5, 2.5])


@settings(max_examples=80)
@given(st.integers(1, 4), st.integers(2, 4), st.data())
def test_ranks_match_brute_force(N, k, data):
    rows = [data.draw(st.lists(st.sampled_from([0.1, 0.2, 0.5, 0.9]), min_size=k, max_size=k)) for _ in range(N)]
    expected = np.mean([brute_ranks(r) for r in rows], axis=0)
    np.testing.assert_array_equal(mean_ranks(np.array(rows)), expected)


@settings(max_examples=50)
@given(st.integers(2, 4), st.integers(2, 5), st.integers(0, 9999))
def test_tie_free_rank_sum(N, k, seed):
    rng = np.random.default_rng(seed)
    scores = np.array([rng.permutation(k) for _ in range(N)], dtype=float)
    assert np.all(rank_rows(scores).sum(axis=1) == k * (k + 1) / 2)
    assert mean_ranks(scores).sum() == pytest.approx(k * (k + 1) / 2, abs=1e-12)
    for perm in itertools.islice(itertools.permutations(range(k)), 6):
        np.testing.assert_array_equal(mean_ranks(scores[:, perm]), mean_ranks(scores)[list(perm)])


@settings(max_examples=50)
@given(st.integers(2, 6), st.integers(3, 6), st.integers(0, 9999))
def test_friedman_rank_invariance_and_scipy(N, k, seed):
    rng = np.random.default_rng(seed)
    scores = rng.random((N, k))
    chi2, p = friedman(scores)
    chi2_t, p_t = friedman(np.exp(3 * scores) + 7)
    assert chi2 == pytest.approx(chi2_t, abs=1e-12) and p == pytest.approx(p_t, abs=1e-12)
    ref = friedmanchisquare(*scores.T)
    assert chi2 == pytest.approx(ref.statistic, rel=1e-9)
    assert p == pytest.approx(ref.pvalue, rel=1e-9)


def test_friedman_requires_two_methods():
    with pytest.raises(ValueError):
        friedman(np.ones((3, 1)))


def test_cd_values():
    assert nemenyi_cd(15, 20, 0.05) == pytest.approx(4.796, abs=0.01)
    assert nemenyi_cd(2, 9, 0.05) == pytest.approx(1.960 / 3, abs=1e-12)
    assert nemenyi_cd(3, 3, 0.05) == pytest.approx(2.343 * math.sqrt(12 / 18), abs=1e-12)
    assert round(nemenyi_cd(3, 3, 0.05), 4) == 1.9131
    with pytest.raises(ValueError):
        nemenyi_cd(21, 5)
    with pytest.raises(ValueError):
        nemenyi_cd(5, 5, 0.01)


@pytest.mark.parametrize("alpha", [0.05, 0.10])
def test_q_table_against_studentized_range(alpha):
    for k, q in zip(range(2, 21), Q_ALPHA[alpha]):
        ref = studentized_range.ppf(1 - alpha, k, np.inf) / math.sqrt(2)
        assert q == pytest.approx(ref, abs=2e-3)


def test_significance():
    assert not significance_matrix([2.0, 2.0, 2.0], 1.0).any()
    sig = significance_matrix([1.85, 8.05, 3.98], 4.796)
    assert sig[0, 1] and sig[1, 0]
    assert not sig[0, 2]
    assert not sig.diagonal().any()
    assert np.array_equal(sig, sig.T)
    with pytest.raises(ValueError):
        significance_matrix([1, 2], 0)


def test_cd_groups():
    assert cd_groups([1.0, 1.5, 4.0, 4.2], 1.0) == [[0, 1], [2, 3]]
    assert cd_groups([1.0, 2.0, 3.0], 10.0) == [[0, 1, 2]]


def test_rank_analysis_fifteen_by_twenty():
    rng = np.random.default_rng(0)
    base = np.linspace(0.95, 0.6, 15)
    scores = base + rng.normal(0, 0.01, size=(20, 15))
    res = rank_analysis(ScoreTable(scores, [f"d{i}" for i in range(20)], [f"m{j}" for j in range(15)]))
    assert res.cd == pytest.approx(4.796, abs=0.01)
    assert res.p_value < 1e-10 and res.reject_null
