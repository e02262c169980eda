from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps
from sklearn.metrics import adjusted_mutual_info_score

from hypertda import stats
from hypertda.stats import StatsError
from oracles import mann_whitney_enumeration

vectors = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=30)


@pytest.mark.parametrize("x, y, r", [
    ([1, 2, 3], [1, 2, 3], 1.0),
    ([1, 2, 3], [-1, -2, -3], -1.0),
    ([1, 2, 3], [2, 4, 6], 1.0),
    ([1, 2, 3, 4], [1, 3, 2, 4], 0.8),
])
def test_pearson_examples(x, y, r):
    assert stats.pearson(x, y) == pytest.approx(r, abs=1e-15)


def test_pearson_errors():
    with pytest.raises(StatsError):
        stats.pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(StatsError):
        stats.pearson([1], [1])


@settings(max_examples=60)
@given(vectors, st.floats(-100, 100).filter(lambda a: abs(a) > 1e-3), st.floats(-100, 100))
def test_pearson_affine(x, a, b):
    x = np.asarray(x)
    if np.ptp(x) < 1e-6:
        return
    assert stats.pearson(x, a * x + b) == pytest.approx(np.sign(a), abs=1e-12)


# --- AMI -------------------------------------------------------------------

def test_ami_examples():
    assert stats.ami([0, 0, 1, 1, 2], [5, 5, 7, 7, 9]) == pytest.approx(1.0)
    assert stats.ami([0, 0, 0, 0], [0, 1, 0, 1]) == 0.0
    # independent 2x2 blocks: MI = 0 but E[MI] = ln(2)/3 (two of the six
    # equally likely tables are perfectly aligned), so AMI = -1/2
    assert stats.ami([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5, abs=1e-9)


@pytest.mark.parametrize("seed", range(40))
def test_ami_matches_sklearn(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 80))
    a = rng.integers(0, rng.integers(2, 6), size=n)
    b = rng.integers(0, rng.integers(2, 6), size=n)
    if len(set(a)) < 2 or len(set(b)) < 2:
        return
    expected = adjusted_mutual_info_score(a, b, average_method="arithmetic")
    assert stats.ami(a, b) == pytest.approx(expected, abs=1e-9)


def test_ami_singletons():
    a = np.array([0, 0, 1, 1, -1, -1])
    b = np.array([0, 0, 1, 1, 2, 3])
    # -1 entries are distinct one-element clusters
    assert stats.ami(a, b) == pytest.approx(1.0)
    c = np.array([0, 0, 1, 1, 0, 1])
    assert stats.ami(a, c, drop_singletons=True) == pytest.approx(1.0)
    with pytest.raises(StatsError):
        stats.ami([0, 1], [0, 1, 1])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=4, max_size=40), st.data())
def test_ami_symmetric_and_label_invariant(a, data):
    b = data.draw(st.lists(st.integers(0, 4), min_size=len(a), max_size=len(a)))
    assert stats.ami(a, b) == stats.ami(b, a)
    relabel = data.draw(st.permutations(range(5)))
    a2 = [relabel[v] for v in a]
    assert stats.ami(a2, b) == pytest.approx(stats.ami(a, b), abs=1e-12)


# --- Mann-Whitney ----------------------------------------------------------

SIZES = [(n, m) for n in range(1, 10) for m in range(1, 10) if n + m <= 10]


@pytest.mark.parametrize("n, m", SIZES)
def test_exact_matches_enumeration(n, m):
    rng = np.random.default_rng(n * 31 + m)
    for _ in range(3):
        # coarse values so ties appear
        x = rng.integers(0, 6, size=n).astype(float)
        y = rng.integers(0, 6, size=m).astype(float)
        assert stats._exact_p(x, y) == pytest.approx(mann_whitney_enumeration(x, y), abs=1e-12)


@pytest.mark.parametrize("n, m", [(n, m) for n, m in SIZES if n <= 8 and m <= 8])
def test_exact_matches_scipy_without_ties(n, m):
    rng = np.random.default_rng(n * 17 + m)
    x, y = rng.random(n), rng.random(m)
    ref = sps.mannwhitneyu(x, y, alternative="two-sided", method="exact").pvalue
    assert stats.mann_whitney(x, y) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_normal_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 15, size=int(rng.integers(9, 40))).astype(float)
    y = rng.integers(3, 18, size=int(rng.integers(9, 40))).astype(float)
    ref = sps.mannwhitneyu(x, y, alternative="two-sided", method="asymptotic", use_continuity=True).pvalue
    assert stats.mann_whitney(x, y) == pytest.approx(ref, rel=1e-9)


def test_mann_whitney_examples():
    assert stats.mann_whitney([1, 2], [3, 4]) == pytest.approx(1 / 3)
    assert stats.mann_whitney([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    with pytest.raises(StatsError):
        stats.mann_whitney([], [1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 20), min_size=1, max_size=12),
       st.lists(st.integers(0, 20), min_size=1, max_size=12))
def test_mann_whitney_symmetric(x, y):
    assert stats.mann_whitney(x, y) == pytest.approx(stats.mann_whitney(y, x), abs=1e-12)
    assert 0 <= stats.mann_whitney(x, y) <= 1


# --- KS --------------------------------------------------------------------

def test_ks_examples():
    assert stats.ks_two_sample([1, 2, 3], [3, 1, 2]) == (0.0, 1.0)
    assert stats.ks_two_sample([1, 2, 3], [11, 12, 13])[0] == 1.0
    assert stats.ks_two_sample([1, 2], [1.5, 2.5])[0] == 0.5
    with pytest.raises(StatsError):
        stats.ks_two_sample([], [1])


@pytest.mark.parametrize("seed", range(10))
def test_ks_statistic_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=int(rng.integers(1, 50)))
    y = rng.normal(0.3, size=int(rng.integers(1, 50)))
    assert stats.ks_statistic(x, y) == pytest.approx(sps.ks_2samp(x, y).statistic, abs=1e-15)
    n, m = x.size, y.size
    D, p = stats.ks_two_sample(x, y)
    assert p == pytest.approx(sps.kstwobign.sf(np.sqrt(n * m / (n + m)) * D), abs=1e-12)


@settings(max_examples=50)
@given(vectors, vectors)
def test_ks_monotone_invariance(x, y):
    x, y = np.asarray(x), np.asarray(y)
    D = stats.ks_statistic(x, y)
    assert stats.ks_statistic(np.arctan(x / 7), np.arctan(y / 7)) == D or \
        np.unique(np.arctan(np.concatenate([x, y]) / 7)).size < np.unique(np.concatenate([x, y])).size


def test_concatenated_ks_separates_groups():
    rng = np.random.default_rng(0)
    a = {"size": rng.normal(0, 1, 40), "volume": rng.normal(10, 1, 40)}
    b = {"size": rng.normal(2, 1, 40), "volume": rng.normal(14, 1, 40)}
    same = {"size": rng.normal(0, 1, 40), "volume": rng.normal(10, 1, 40)}
    assert stats.concatenated_ks(a, b)[1] < 1e-6
    assert stats.concatenated_ks(a, same)[1] > 1e-3


def test_rank_normalize():
    np.testing.assert_allclose(stats.rank_normalize([10, 30, 20, 20]), [0.25, 1.0, 0.625, 0.625])
