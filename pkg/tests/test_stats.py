import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr, ndtri
from scipy.stats import kurtosis, skew

from covlab.stats import RunningStats, ks_statistic, merge_stats

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def _close(a, b, rel=1e-12):
    for attr in ("count", "mean", "m2", "m3", "m4", "min", "max"):
        x, y = getattr(a, attr), getattr(b, attr)
        assert abs(x - y) <= rel * max(1.0, abs(y)), attr


def test_merge_with_empty():
    s = RunningStats.from_array([1.0, 4.0, 2.5])
    _close(merge_stats(RunningStats(), s), s)
    _close(merge_stats(s, RunningStats()), s)


def test_merge_two_points():
    m = merge_stats(RunningStats.from_array([3.0]), RunningStats.from_array([7.0]))
    assert m.mean == 5.0
    assert m.m2 == pytest.approx((3.0 - 7.0) ** 2 / 2)


def test_merge_example():
    m = merge_stats(RunningStats.from_array([1, 2, 3]), RunningStats.from_array([4, 5]))
    _close(m, RunningStats.from_array([1, 2, 3, 4, 5]))


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=1, max_size=40), st.lists(finite, min_size=1, max_size=40),
       st.lists(finite, min_size=1, max_size=40))
def test_merge_associative(a, b, c):
    sa, sb, sc = (RunningStats.from_array(v) for v in (a, b, c))
    left = merge_stats(merge_stats(sa, sb), sc)
    right = merge_stats(sa, merge_stats(sb, sc))
    full = RunningStats.from_array(a + b + c)
    scale = max(1.0, float(np.max(np.abs(a + b + c))))
    for attr, k in (("mean", 1), ("m2", 2), ("m3", 3), ("m4", 4)):
        ref = len(a + b + c) * scale ** k
        assert abs(getattr(left, attr) - getattr(full, attr)) <= 1e-12 * ref
        assert abs(getattr(right, attr) - getattr(full, attr)) <= 1e-12 * ref
    assert left.count == right.count == full.count


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=2, max_size=60))
def test_variance_nonnegative(v):
    s = RunningStats()
    for x in v:
        s.push(x)
    assert s.variance >= 0
    assert s.count == len(v)


def test_moments_match_scipy():
    x = np.random.default_rng(0).gamma(2.0, size=5000)
    s = RunningStats.from_array(x[:1234]).push(x[1234:])
    assert s.variance == pytest.approx(np.var(x, ddof=1), rel=1e-12)
    assert s.skewness == pytest.approx(skew(x), rel=1e-10)
    assert s.excess_kurtosis == pytest.approx(kurtosis(x), rel=1e-10)
    assert s.stderr == pytest.approx(np.std(x, ddof=1) / math.sqrt(x.size))
    assert (s.min, s.max) == (x.min(), x.max())


def test_variance_stderr_gaussian():
    # for normal data the delta-method SE approaches sigma^2 sqrt(2/n)
    x = np.random.default_rng(1).standard_normal(200000) * 3
    s = RunningStats.from_array(x)
    assert s.variance_stderr == pytest.approx(9 * math.sqrt(2 / x.size), rel=0.02)


def test_small_counts_are_nan():
    s = RunningStats.from_array([1.0])
    assert math.isnan(s.variance) and math.isnan(s.stderr) and math.isnan(s.skewness)
    assert math.isnan(RunningStats.from_array([1.0, 2.0]).variance_stderr)


def test_ks_examples():
    n = 100
    q = ndtri((np.arange(1, n + 1) - 0.5) / n)
    assert ks_statistic(q, ndtr) == pytest.approx(0.005, abs=1e-12)
    assert ks_statistic([0.0], ndtr) == pytest.approx(0.5)
    x = np.random.default_rng(2).standard_normal(300)
    assert ks_statistic(x, ndtr) == ks_statistic(np.sort(x), ndtr)
    with pytest.raises(ValueError):
        ks_statistic([], ndtr)


def test_ks_matches_scipy():
    from scipy.stats import kstest
    x = np.random.default_rng(3).standard_normal(777) * 1.1
    assert ks_statistic(x, ndtr) == pytest.approx(kstest(x, "norm").statistic, abs=1e-14)
