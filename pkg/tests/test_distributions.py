import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from seqsparse import (
    BernoulliPair,
    GaussianShift,
    GeneralMLR,
    NonFiniteDivergence,
    QueryNotPermitted,
    llr,
    llr_stats,
    null_quantile,
    sample,
)
from seqsparse.distributions import test_statistic as statistic
from seqsparse.streams import CounterStream


# -- sampling ----------------------------------------------------------------


def test_sample_is_deterministic_under_seed():
    pair = GaussianShift(2.0)
    a = sample(pair, "null", 3, CounterStream(7))
    b = sample(pair, "null", 3, CounterStream(7))
    assert a.shape == (3,)
    assert_array_equal(a, b)


def test_sample_accepts_numpy_generator():
    a = sample(GaussianShift(2.0), "alt", 4, np.random.default_rng(7))
    b = sample(GaussianShift(2.0), "alt", 4, np.random.default_rng(7))
    assert_array_equal(a, b)


def test_degenerate_bernoulli_masses():
    pair = BernoulliPair(0.0, 1.0)
    assert_array_equal(sample(pair, "null", 5, CounterStream(1)), np.zeros(5))
    assert_array_equal(sample(pair, "alt", 5, CounterStream(1)), np.ones(5))


def test_gaussian_alt_mean():
    y = sample(GaussianShift(2.0), "alt", 10**6, CounterStream(3))
    assert abs(y.mean() - 2.0) < 0.01
    assert abs(y.std() - 1.0) < 0.01


def test_bernoulli_frequency():
    y = sample(BernoulliPair(0.1, 0.3), "alt", 10**5, CounterStream(4))
    se = math.sqrt(0.3 * 0.7 / 1e5)
    assert abs(y.mean() - 0.3) < 5 * se


# -- likelihood ratios -------------------------------------------------------


def test_llr_examples():
    assert llr(GaussianShift(2.0), []) == 0.0
    assert llr(GaussianShift(2.0), [1.0]) == 0.0
    assert llr(BernoulliPair(0.5, 0.5), [0, 1, 1, 0, 1]) == 0.0


def test_llr_bernoulli_value():
    pair = BernoulliPair(0.2, 0.6)
    expected = 2 * math.log(0.6 / 0.2) + math.log(0.4 / 0.8)
    assert_allclose(llr(pair, [1, 0, 1]), expected, rtol=1e-14)


def test_llr_hidden_alternative_refused():
    for pair in (GaussianShift(1.0, alt_known=False), BernoulliPair(0.2, 0.4, alt_known=False)):
        with pytest.raises(QueryNotPermitted):
            llr(pair, [0.0])
        # the statistic and quantiles stay available
        statistic(pair, [1.0, 0.0])
        null_quantile(pair, 2, 0.5)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-8, 8), min_size=0, max_size=30),
    st.integers(0, 30),
    st.floats(0.1, 5),
)
def test_llr_additive_gaussian(ys, cut, theta):
    pair = GaussianShift(theta)
    cut = min(cut, len(ys))
    whole = llr(pair, ys)
    parts = llr(pair, ys[:cut]) + llr(pair, ys[cut:])
    assert math.isclose(whole, parts, rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(0, 1), min_size=0, max_size=30),
    st.integers(0, 30),
    st.floats(0.01, 0.99),
    st.floats(0.01, 0.99),
)
def test_llr_additive_bernoulli(ys, cut, p0, p1):
    pair = BernoulliPair(p0, p1)
    cut = min(cut, len(ys))
    whole = llr(pair, ys)
    parts = llr(pair, ys[:cut]) + llr(pair, ys[cut:])
    assert math.isclose(whole, parts, rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5), st.lists(st.floats(-6, 6), min_size=1, max_size=20))
def test_gaussian_llr_affine_in_statistic(theta, ys):
    pair = GaussianShift(theta)
    ell = len(ys)
    expected = theta * statistic(pair, ys) - ell * theta**2 / 2
    assert math.isclose(llr(pair, ys), expected, rel_tol=1e-12, abs_tol=1e-9)


def test_llr_vectorized_over_rows():
    pair = GaussianShift(1.5)
    y = np.arange(12.0).reshape(3, 4) / 7
    assert_allclose(pair.llr(y), [pair.llr(row) for row in y], rtol=1e-15)


# -- divergences -------------------------------------------------------------


def test_gaussian_stats():
    s = llr_stats(GaussianShift(2.0))
    assert (s.d01, s.d10, s.var01, s.dkl) == (2.0, 2.0, 4.0, 2.0)


def test_bernoulli_stats():
    s = llr_stats(BernoulliPair(0.5, 0.5))
    assert s.d01 == 0.0 and s.d10 == 0.0 and s.var01 == 0.0
    s = llr_stats(BernoulliPair(0.1, 0.3))
    # two-term sums evaluated by hand
    assert_allclose(s.d01, 0.1 * math.log(1 / 3) + 0.9 * math.log(0.9 / 0.7), rtol=1e-14)
    assert_allclose(s.d01, 0.11632175658600458, rtol=1e-12)
    assert_allclose(s.d10, 0.3 * math.log(3) + 0.7 * math.log(0.7 / 0.9), rtol=1e-14)
    assert s.dkl == max(s.d01, s.d10)
    # variance of the single-sample LLR under the null
    a, b = math.log(3), math.log(0.7 / 0.9)
    assert_allclose(s.var01, 0.1 * 0.9 * (a - b) ** 2, rtol=1e-12)


def test_bernoulli_disjoint_support_diverges():
    with pytest.raises(NonFiniteDivergence):
        llr_stats(BernoulliPair(0.0, 1.0))


@pytest.mark.parametrize("pair", [GaussianShift(0.7), BernoulliPair(0.3, 0.55)])
def test_llr_drift_matches_divergences(pair):
    s = llr_stats(pair)
    N = 200_000
    for hyp, target in (("alt", s.d10), ("null", -s.d01)):
        inc = pair.llr_increments(sample(pair, hyp, N, CounterStream(21, len(hyp))))
        se = inc.std() / math.sqrt(N)
        assert abs(inc.mean() - target) <= 5 * se
    inc0 = pair.llr_increments(sample(pair, "null", N, CounterStream(22)))
    assert_allclose(inc0.var(), s.var01, rtol=0.02)


def test_general_mlr_matches_gaussian_closed_form():
    pair = GeneralMLR(stats.norm(0, 1), stats.norm(1.5, 1))
    s = pair.llr_stats()
    assert abs(s.d01 - 1.125) < 0.02
    assert abs(s.d10 - 1.125) < 0.02
    assert abs(s.var01 - 2.25) < 0.05
    assert pair.llr_stats() == s  # seeded


def test_general_mlr_discrete():
    pair = GeneralMLR(stats.poisson(1.0), stats.poisson(2.0))
    s = pair.llr_stats()
    exact = 1.0 * math.log(1 / 2) + 2.0 - 1.0
    assert abs(s.d01 - exact) < 0.01
    y = np.array([0, 1, 3])
    assert_allclose(pair.llr(y), np.sum(y * math.log(2) - 1.0), rtol=1e-12)


# -- statistics and quantiles -----------------------------------------------


def test_statistic_examples():
    assert statistic(GaussianShift(1.0), [1.0, -0.5, 2.5]) == 3.0
    assert statistic(BernoulliPair(0.2, 0.6), [1, 0, 1, 1]) == 3
    ys = [0.3, -1.2, 4.0]
    assert statistic(GaussianShift(1.0, alt_known=False), ys) == statistic(GaussianShift(3.0, alt_known=False), ys)


def test_gaussian_quantile_examples():
    assert null_quantile(GaussianShift(2.0), 8, 0.5) == 0.0
    assert_allclose(null_quantile(GaussianShift(2.0), 4, 0.75), 1.3489795003921634, rtol=1e-12)


def test_bernoulli_quantile_example():
    # P(T <= 0) = 1/4 < 1/2 <= P(T <= 1) = 3/4
    assert null_quantile(BernoulliPair(0.5, 0.7), 2, 0.5) == 1


def _enumerated_quantile(p, ell, rho):
    cdf = {}
    for outcome in itertools.product((0, 1), repeat=ell):
        t = sum(outcome)
        cdf[t] = cdf.get(t, 0.0) + p**t * (1 - p) ** (ell - t)
    total = 0.0
    for g in range(ell + 1):
        total += cdf.get(g, 0.0)
        if total >= rho - 1e-12:
            return g
    return ell


@pytest.mark.parametrize("p0", [0.1, 0.3, 0.5, 0.8])
@pytest.mark.parametrize("rho", [0.5, 0.6, 0.75, 0.9, 0.99])
def test_bernoulli_quantile_brute_force(p0, rho):
    pair = BernoulliPair(p0, min(p0 + 0.1, 0.95))
    for ell in range(1, 13):
        assert null_quantile(pair, ell, rho) == _enumerated_quantile(p0, ell, rho), ell


def test_bernoulli_quantile_large_counts():
    pair = BernoulliPair(0.3, 0.5)
    for ell in (65, 200, 1000):
        g = null_quantile(pair, ell, 0.75)
        assert stats.binom.cdf(g, ell, 0.3) >= 0.75
        assert stats.binom.cdf(g - 1, ell, 0.3) < 0.75


@pytest.mark.parametrize("ell", [1, 2, 4, 8])
@pytest.mark.parametrize("rho", [0.5, 0.75, 0.9])
def test_gaussian_quantile_empirical(ell, rho):
    pair = GaussianShift(1.0)
    t = statistic(pair, sample(pair, "null", 10**5 * ell, CounterStream(99, ell)).reshape(10**5, ell))
    g = null_quantile(pair, ell, rho)
    assert np.mean(t <= g) >= rho - 0.01
    assert abs(np.mean(t <= g) - rho) < 0.01


def test_general_mlr_quantile():
    pair = GeneralMLR(stats.norm(0, 1), stats.norm(1, 1), alt_known=False, mc_samples=50_000)
    for ell, rho in ((1, 0.5), (4, 0.75)):
        g = pair.null_quantile(ell, rho)
        assert abs(stats.norm.cdf(g / math.sqrt(ell)) - rho) < 0.01
    assert pair.quantile_resolution == 1 / 50_000
    with pytest.raises(QueryNotPermitted):
        pair.llr([0.0])


def test_invalid_parameters():
    with pytest.raises(ValueError):
        GaussianShift(0.0)
    with pytest.raises(ValueError):
        BernoulliPair(-0.1, 0.5)
    with pytest.raises(ValueError):
        null_quantile(GaussianShift(1.0), 0, 0.5)
    with pytest.raises(ValueError):
        null_quantile(GaussianShift(1.0), 2, 1.0)


def test_pairs_are_immutable_and_hashable():
    pair = GaussianShift(2.0)
    with pytest.raises(AttributeError):
        pair.theta = 3.0
    assert hash(pair) == hash(GaussianShift(2.0))
    assert pair.with_alt_known(False).alt_known is False
