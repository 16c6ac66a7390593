import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from seqsparse import (
    BernoulliPair,
    DivergenceZero,
    GaussianShift,
    LLRStats,
    NotPositive,
    Regime,
    SparsityRegimeViolation,
    classify_regime,
    cor2_schedule,
    nonseq_rate,
    seq_lower_bound,
    seq_rate,
    simple_st_budget,
    simple_st_passes,
    sprt_thresholds,
    st_cn,
    st_passes,
    st_step_samples,
)
from seqsparse.bounds import BoundReport, ceil_log, even_budget_above, regime_report

UNIT = LLRStats(1.0, 1.0, 1.0)
GAUSS2 = GaussianShift(2.0).llr_stats()


# -- lower bounds ------------------------------------------------------------


def test_seq_lower_bound_example():
    r = seq_lower_bound(100, 0.05, UNIT)
    assert round(r.m_required, 4) == 6.2146
    assert round(r.pe_floor, 5) == 0.04877
    assert_allclose(r.m_required, math.log(100) + math.log(5), rtol=1e-14)


def test_seq_lower_bound_small_delta_and_degenerate_case():
    r = seq_lower_bound(10, 1e-4, UNIT)
    assert abs(r.pe_floor - 1e-4) < 1e-8
    r = seq_lower_bound(1, 0.25, UNIT, m=0.5)
    assert r.m_required == 0.0
    assert r.regime is Regime.INDETERMINATE


def test_seq_lower_bound_regime_and_errors():
    assert seq_lower_bound(100, 0.05, UNIT, m=6.0).regime is Regime.UNRELIABLE
    assert seq_lower_bound(100, 0.05, UNIT, m=6.3).regime is Regime.INDETERMINATE
    with pytest.raises(DivergenceZero):
        seq_lower_bound(10, 0.1, LLRStats(0.0, 0.0, 0.0))


def test_seq_lower_bound_uses_larger_divergence():
    r = seq_lower_bound(100, 0.05, LLRStats(0.5, 2.0, 1.0))
    assert_allclose(r.m_required, (math.log(100) + math.log(5)) / 2.0, rtol=1e-14)


def test_seq_rate_examples():
    assert_allclose(seq_rate(math.e**2, UNIT), 2.0, rtol=1e-15)
    assert round(seq_rate(16, GAUSS2), 4) == 1.3863
    stats = LLRStats(0.3, 0.5, 1.0)
    assert seq_rate(40, LLRStats(0.6, 0.5, 1.0)) == seq_rate(40, stats) / 2
    with pytest.raises(DivergenceZero):
        seq_rate(10, BernoulliPair(0.5, 0.5).llr_stats())


def test_nonseq_rate_examples():
    assert_allclose(nonseq_rate(math.e**3, UNIT), 3.0, rtol=1e-15)
    assert round(nonseq_rate(4096, GAUSS2), 4) == 4.1589
    assert_allclose(nonseq_rate(4096, GAUSS2) / seq_rate(16, GAUSS2), math.log(4096) / math.log(16), rtol=1e-14)
    with pytest.raises(DivergenceZero):
        nonseq_rate(10, LLRStats(1.0, 0.0, 1.0))


@given(st.integers(2, 10**6), st.floats(0.01, 10))
def test_sequential_rate_never_exceeds_fixed_rate(n, theta):
    s = max(2, n // 7)
    assume(s <= n)
    stats = GaussianShift(theta).llr_stats()
    assert seq_rate(s, stats) <= nonseq_rate(n, stats) * (1 + 1e-12)


def test_classify_regime():
    # sparse: judged against ln s / d01 = 1.386...
    assert classify_regime(1.0, 4096, 16, GAUSS2) is Regime.UNRELIABLE
    assert classify_regime(2.0, 4096, 16, GAUSS2) is Regime.RELIABLE
    assert classify_regime(4.0, 4096, 16, GAUSS2, sequential=False) is Regime.UNRELIABLE
    assert classify_regime(5.0, 4096, 16, GAUSS2, sequential=False) is Regime.RELIABLE
    assert classify_regime(5.0, 4096, 1, GAUSS2) is Regime.INDETERMINATE
    assert classify_regime(None, 4096, 16, GAUSS2) is Regime.INDETERMINATE
    # dense: judged against ln s / D_KL
    stats = LLRStats(0.5, 2.0, 1.0)
    assert classify_regime(2.0, 100, 20, stats) is Regime.RELIABLE
    assert classify_regime(2.0, 100, 20, stats, divergence="d01") is Regime.UNRELIABLE


def test_regime_report_and_bound_report_invariants():
    r = regime_report(1.0, 4096, 16, GAUSS2)
    assert r.regime is Regime.UNRELIABLE
    assert_allclose(r.m_required, math.log(16) / 2)
    assert r.pe_floor == pytest.approx(1 - math.exp(-0.1))
    with pytest.raises(ValueError):
        BoundReport(1.0, 1.5, Regime.RELIABLE)
    with pytest.raises(ValueError):
        BoundReport(-1.0, 0.5, Regime.RELIABLE)


# -- SPRT thresholds ---------------------------------------------------------


def test_sprt_threshold_examples():
    th = sprt_thresholds(10100, 100, 0.1)
    assert_allclose(th.gamma_L, 10**-2.2, rtol=1e-12)
    assert abs(th.gamma_L - 6.3096e-3) < 1e-7
    assert_allclose(th.gamma_U, 10000**1.1, rtol=1e-12)
    assert abs(th.gamma_U - 2.5119e4) < 1
    assert_allclose(sprt_thresholds(200, 100, 1e-9).gamma_L, 1 / 100, rtol=1e-8)
    with pytest.raises(ValueError):
        sprt_thresholds(10, 10, 0.1)


# -- simple thresholding -----------------------------------------------------


def test_simple_st_budget_example():
    b = simple_st_budget(4096, 16, 0.1, 2.0)
    parts = math.log(16) + math.log(math.log2(81920)) + math.log(10)
    assert_allclose(b, parts, rtol=1e-14)
    assert round(b, 4) == 7.8677
    assert even_budget_above(b) == 8
    assert simple_st_passes(4096, 0.1) == 17


def test_simple_st_budget_theta_scaling_and_pinned_value():
    assert_allclose(simple_st_budget(4096, 16, 0.1, 4.0), simple_st_budget(4096, 16, 0.1, 2.0) / 4, rtol=1e-14)
    # s=1, delta=1/e, n=e: ln 1 + ln log2(2e^2) + 1 over theta^2/4
    b = simple_st_budget(math.e, 1, 1 / math.e, 2.0)
    assert_allclose(b, math.log(math.log2(2 * math.e**2)) + 1.0, rtol=1e-14)


def test_even_budget_above():
    assert [even_budget_above(x) for x in (0.0, 1.9, 2.0, 7.87, 8.0, 8.01)] == [2, 2, 4, 8, 10, 10]


@settings(max_examples=50)
@given(
    st.integers(10, 10**6),
    st.integers(1, 1000),
    st.floats(0.01, 0.9),
    st.floats(0.2, 5.0),
)
def test_simple_st_budget_monotone(n, s, delta, theta):
    s = min(s, n // 2)
    b = simple_st_budget(n, s, delta, theta)
    assert simple_st_budget(n, s, delta, theta * 1.1) < b
    assert simple_st_budget(n * 2, s, delta, theta) > b
    assert simple_st_budget(n, s + 1, delta, theta) > b
    assert simple_st_budget(n, s, delta * 0.9, theta) > b


# -- sequential thresholding -------------------------------------------------


def test_st_passes_examples():
    assert st_passes(1024, 4, 0.5, 0.5) == 12
    assert st_passes(4096, 16, 0.1, 0.5) == 17
    # exact power: log2(2*512/0.5) = 11 exactly
    assert st_passes(516, 4, 0.5, 0.5) == 11


def test_ceil_log_exact_powers():
    assert ceil_log(1024, 2) == 10
    assert ceil_log(1025, 2) == 11
    assert ceil_log(1000, 10) == 3
    assert ceil_log(0.5, 2) == 0


def test_st_step_samples_example():
    assert [st_step_samples(10, k, 0.5, 1024, 4, 12) for k in (1, 2, 3)] == [1, 3, 4]
    assert st_step_samples(6, 1, 0.5, 4096, 16, 17) == 0


def test_st_cn_zero_variance():
    stats = LLRStats(0.7, 0.9, 0.0)
    r = st_cn(1000, 5, 10, 0.6, 9, stats)
    assert_allclose(r.c_n, 0.36 * 1000 * 0.7 / (1000 + 5 * 81), rtol=1e-14)
    assert math.isnan(r.m_sufficient)


def test_st_cn_prefactor_limit():
    # rho = 1/2, s K^2 << n and a negligible variance term: c_n -> d01 / 4
    stats = LLRStats(0.1, 0.1, 1e-12)
    r = st_cn(10**15, 10**6, 10, 0.5, 40, stats)
    assert abs(r.c_n - 0.1 / 4) < 1e-6


def test_st_cn_positive_regression():
    stats = GaussianShift(0.5).llr_stats()
    n, s, rho, delta = 10**15, 10**8, 0.5, 0.1
    K = st_passes(n, s, delta, rho)
    assert K == 55
    r = st_cn(n, s, 100.0, rho, K, stats, delta=delta)
    # direct evaluation of the rate constant
    scale = rho**2 * n / (n + s * K**2)
    inner = scale * math.log(s) / stats.d01 - 1
    expected = scale * (stats.d01 - math.sqrt(stats.var01 / (inner * (1 - rho))))
    assert_allclose(r.c_n, expected, rtol=1e-12)
    assert_allclose(r.c_n, 0.0017169766215448033, rtol=1e-9)
    assert_allclose(r.m_sufficient, (math.log(s) + math.log(10) + math.log(4)) / expected, rtol=1e-12)


def test_st_cn_cor2_example_is_not_positive():
    # scale * ln s / d01 - 1 = 0.272 * 2.303 - 1 < 0: the rate constant is undefined
    sched = cor2_schedule(10**6, 100)
    with pytest.raises(NotPositive):
        st_cn(10**6, 100, 10.0, sched.rho, sched.K, GAUSS2, delta=sched.delta)


@settings(max_examples=200)
@given(
    st.integers(100, 10**12),
    st.integers(2, 10**6),
    st.floats(0.5, 0.99),
    st.floats(0.01, 0.9),
    st.floats(0.05, 3.0),
)
def test_st_cn_never_exceeds_d01(n, s, rho, delta, theta):
    s = min(s, n // 2)
    stats = GaussianShift(theta).llr_stats()
    K = st_passes(n, s, delta, rho)
    try:
        r = st_cn(n, s, 10.0, rho, K, stats)
    except NotPositive:
        return
    assert 0 < r.c_n <= stats.d01


def test_cor2_schedule_examples():
    sched = cor2_schedule(10**6, 55)
    assert abs(sched.delta - 0.25) < 0.001 and abs(sched.rho - 0.5) < 0.001
    with pytest.raises(SparsityRegimeViolation):
        cor2_schedule(10**6, 54)
    sched = cor2_schedule(10**6, 100)
    assert round(sched.delta, 4) == 0.2171
    assert round(sched.rho, 4) == 0.5340
    assert_allclose(sched.rho, 1 - 1 / math.sqrt(math.log(100)), rtol=1e-15)
    assert sched.K == 22
    assert sched.K == st_passes(10**6, 100, sched.delta, sched.rho)
    with pytest.raises(SparsityRegimeViolation):
        cor2_schedule(10**4, 200)  # 10^4 / (ln 10^4)^2 = 117.9
    with pytest.raises(SparsityRegimeViolation):
        cor2_schedule(10**6, 2)


def test_bounds_are_pure():
    a = (seq_lower_bound(50, 0.1, GAUSS2), simple_st_budget(999, 7, 0.2, 1.3), sprt_thresholds(500, 9, 0.3))
    b = (seq_lower_bound(50, 0.1, GAUSS2), simple_st_budget(999, 7, 0.2, 1.3), sprt_thresholds(500, 9, 0.3))
    assert a == b
