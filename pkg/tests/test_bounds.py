"""Bound curves, mixing times, the geometric identity, and the h-estimator."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lagcoupling as lc
from lagcoupling import (
    CensoredRecordsError,
    MeetingRecord,
    derive_stream,
    geometric_ceil_expectation,
    ipm_bound_curve,
    mixing_time,
    sample_meeting,
    smc_bias_bound,
    tv_bound_curve,
    unbiased_estimator_h,
    unbiased_estimator_h_avg,
    w1_bound_curve,
)
from lagcoupling.bounds import _n_terms
from lagcoupling.presets import PointMassInitial


def _records(taus, lag=1, censored=()):
    return [
        MeetingRecord(lag=lag, tau=t, censored=(i in censored))
        for i, t in enumerate(taus)
    ]


# ---------------------------------------------------------------------------
# TV curves
# ---------------------------------------------------------------------------


def test_tv_hand_values():
    curve = tv_bound_curve(_records([2, 3, 5]), [0, 1, 2, 3, 4])
    assert curve.bound.tolist() == pytest.approx([7 / 3, 4 / 3, 2 / 3, 1 / 3, 0.0])


def test_tv_zero_once_all_met():
    curve = tv_bound_curve(_records([4, 6], lag=2), [10, 50])
    assert np.all(curve.bound == 0.0)


@pytest.mark.parametrize("lag", [1, 2, 7])
def test_tv_at_zero_when_meeting_right_after_lag(lag):
    curve = tv_bound_curve(_records([lag + 1] * 5, lag=lag), [0])
    assert curve.bound[0] == 1.0


def test_tv_rejects_mixed_lags():
    records = _records([3]) + _records([5], lag=2)
    with pytest.raises(ValueError, match="mix"):
        tv_bound_curve(records, [0])


def test_tv_censored_poisons_unless_overridden():
    records = _records([3, 4, 50], censored={2})
    with pytest.raises(CensoredRecordsError):
        tv_bound_curve(records, [0, 1])
    curve = tv_bound_curve(records, [0, 1], allow_censored=True)
    assert not curve.valid and curve.censored_count == 1


def test_tv_curve_nonincreasing_on_real_records():
    kernel = lc.rwmh_coupled(lc.std_normal_target(), 0.5)
    records = [
        sample_meeting(derive_stream(50, i), kernel, PointMassInitial([6.0]), 5, 10**5)
        for i in range(50)
    ]
    curve = tv_bound_curve(records, range(0, 100, 3))
    assert np.all(np.diff(curve.bound) <= 1e-12)


@settings(max_examples=200, deadline=None)
@given(
    tau=st.integers(min_value=2, max_value=10**6),
    lag=st.integers(min_value=1, max_value=10**4),
    t=st.integers(min_value=0, max_value=10**6),
)
def test_term_count_properties(tau, lag, t):
    terms = _n_terms(tau, lag, t)
    assert terms >= 0
    assert terms <= _n_terms(tau, lag, max(t - 1, 0))  # non-increasing in t
    # exact integer ceiling
    a = tau - lag - t
    assert terms == max(0, math.ceil(a / lag))


# ---------------------------------------------------------------------------
# trajectory curves
# ---------------------------------------------------------------------------


def _fake_trajectory_record(xs, ys, lag):
    tau = len(xs) - 1
    return MeetingRecord(
        lag=lag,
        tau=tau,
        censored=False,
        x_path=[np.array([v], dtype=float) for v in xs],
        y_path=[np.array([v], dtype=float) for v in ys],
    )


def test_w1_hand_value():
    # lag 1, tau 3: terms j=1,2 give |x1-y0| + |x2-y1|
    record = _fake_trajectory_record([5.0, 3.0, 2.0, 1.5], [1.5, 2.0, 1.5], lag=1)
    curve = w1_bound_curve([record], [0])
    assert curve.bound[0] == pytest.approx(abs(3.0 - 1.5) + abs(2.0 - 2.0))


def test_w1_degenerate_coupling_is_zero():
    record = _fake_trajectory_record([1.0, 1.0, 1.0], [1.0, 1.0], lag=1)
    curve = w1_bound_curve([record], [0, 1, 2])
    assert np.all(curve.bound == 0.0)


def test_w1_requires_trajectories():
    with pytest.raises(ValueError, match="keep_trajectory"):
        w1_bound_curve(_records([4]), [0])


def _real_trajectory_records(n=40, lag=3, min_steps=0):
    kernel = lc.rwmh_coupled(lc.std_normal_target(), 0.5)
    return [
        sample_meeting(
            derive_stream(51, i),
            kernel,
            PointMassInitial([4.0]),
            lag,
            10**5,
            keep_trajectory=True,
            min_steps=min_steps,
        )
        for i in range(n)
    ]


def test_ipm_specializations_match_exactly():
    records = _real_trajectory_records()
    grid = range(0, 40, 2)
    tv = tv_bound_curve(records, grid)
    w1 = w1_bound_curve(records, grid)
    unit = ipm_bound_curve(records, grid, lambda x, y: 1.0)
    l1 = ipm_bound_curve(records, grid, lambda x, y: float(abs(x[0] - y[0])))
    zero = ipm_bound_curve(records, grid, lambda x, y: 0.0)
    assert np.array_equal(unit.bound, tv.bound)
    assert l1.bound == pytest.approx(w1.bound.tolist(), abs=1e-12)
    assert np.all(zero.bound == 0.0)


# ---------------------------------------------------------------------------
# mixing time
# ---------------------------------------------------------------------------


def test_mixing_time_hand_values():
    assert mixing_time(_records([2, 2, 2]), 0.25) == 1
    assert mixing_time(_records([2, 3, 5]), 0.5) == 3


def test_mixing_time_matches_direct_scan():
    records = _records([3, 9, 17, 4, 28], lag=2)
    for eps in (0.1, 0.3, 0.6, 0.9):
        direct = next(
            k
            for k in range(0, 40)
            if np.mean([_n_terms(r.tau, 2, k) for r in records]) < eps
        )
        assert mixing_time(records, eps) == direct


def test_mixing_time_epsilon_domain():
    for bad in (0.0, 1.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            mixing_time(_records([3]), bad)


# ---------------------------------------------------------------------------
# geometric ceiling expectation
# ---------------------------------------------------------------------------


def test_geometric_ceil_exact_values():
    assert geometric_ceil_expectation(1.0, 0, 1) == 1.0
    assert geometric_ceil_expectation(1.0, 2, 3) == 0.0
    assert abs(geometric_ceil_expectation(0.5, 0, 1) - 2.0) < 1e-12
    assert abs(geometric_ceil_expectation(0.5, 1, 1) - 1.0) < 1e-12


def test_geometric_ceil_domain():
    for args in [(0.0, 0, 1), (1.2, 0, 1), (0.5, -1, 1), (0.5, 0, 0)]:
        with pytest.raises(ValueError):
            geometric_ceil_expectation(*args)


def test_geometric_ceil_monte_carlo_spot():
    rng = derive_stream(52, 0)
    p, m, n = 0.3, 1, 2
    draws = np.array(
        [max(0, math.ceil((rng.geometric(p) - m) / n)) for _ in range(10**5)], dtype=float
    )
    se = draws.std(ddof=1) / math.sqrt(draws.size)
    assert abs(draws.mean() - geometric_ceil_expectation(p, m, n)) < 4 * se


@settings(max_examples=100, deadline=None)
@given(
    alpha=st.floats(min_value=1e-6, max_value=1.0 - 1e-9),
    lag=st.integers(min_value=1, max_value=50),
)
def test_geometric_ceil_consistency_identity(alpha, lag):
    # with the meeting delay G = tau - (lag - 1) geometric, the bias bound's
    # per-sample value (1-a)/(1-(1-a)^L) is E[ceil((G-1)/L)]: the m=1, n=L case
    direct = (1.0 - alpha) / (1.0 - (1.0 - alpha) ** lag)
    assert geometric_ceil_expectation(alpha, 1, lag) == pytest.approx(direct, rel=1e-12)


# ---------------------------------------------------------------------------
# particle-sampler bias bound
# ---------------------------------------------------------------------------


class ConstantDraw:
    def __init__(self, value):
        self.value = value

    def __call__(self, rng):
        return self.value


def test_smc_bias_bound_perfect_sampler_is_zero():
    rng = derive_stream(53, 0)
    bound, se = smc_bias_bound(rng, [1.0] * 20, 3, 10, ConstantDraw(1.0))
    assert bound == 0.0 and se == 0.0


@pytest.mark.parametrize("lag,expected", [(1, 1.0), (2, 2.0 / 3.0)])
def test_smc_bias_bound_constant_alpha(lag, expected):
    # zhat 2.0 with Z* = 1.0 always gives alpha = 0.5 exactly
    rng = derive_stream(53, 1)
    bound, se = smc_bias_bound(rng, [2.0] * 8, lag, 25, ConstantDraw(1.0))
    assert bound == pytest.approx(expected, abs=1e-12)
    assert se == pytest.approx(0.0, abs=1e-12)
    assert bound == pytest.approx(geometric_ceil_expectation(0.5, 1, lag), abs=1e-12)


def test_smc_bias_bound_rejects_bad_zhat():
    rng = derive_stream(53, 2)
    with pytest.raises(ValueError):
        smc_bias_bound(rng, [1.0, -2.0], 1, 5, ConstantDraw(1.0))
    with pytest.raises(ValueError):
        smc_bias_bound(rng, [], 1, 5, ConstantDraw(1.0))


def test_pimh_zhat_warmup_lag_one_is_fresh_run():
    spec = lc.gaussian_importance_spec(6)
    a = lc.pimh_zhat_after_warmup(derive_stream(53, 3), spec, 1)
    _, b = lc.smc_sampler_run(derive_stream(53, 3), spec)
    assert a == b


# ---------------------------------------------------------------------------
# unbiased estimator of stationary expectations
# ---------------------------------------------------------------------------


def test_h_estimator_no_correction_after_meeting():
    record = _fake_trajectory_record([5.0, 3.0, 2.0, 1.0], [1.0, 2.0, 1.0], lag=1)
    # tau = 3 <= lag + t for t >= 2: plain plug-in
    assert unbiased_estimator_h(record, lambda s: float(s[0]), 2) == 2.0


def test_h_estimator_constant_function_is_exact():
    records = _real_trajectory_records(n=10, lag=2, min_steps=8)
    for record in records:
        assert unbiased_estimator_h(record, lambda s: 3.25, 0) == 3.25
        assert unbiased_estimator_h_avg(record, lambda s: 3.25, 0, 5) == 3.25


def test_h_estimator_hand_value_with_correction():
    record = _fake_trajectory_record([5.0, 3.0, 2.0, 1.0], [1.0, 2.0, 1.0], lag=1)
    h = lambda s: float(s[0])
    # t=0: terms j=1,2: (h(x1)-h(y0)) + (h(x2)-h(y1))
    expected = 5.0 + (3.0 - 1.0) + (2.0 - 2.0)
    assert unbiased_estimator_h(record, h, 0) == expected


def test_h_estimator_mean_matches_target_small():
    kernel = lc.rwmh_coupled(lc.std_normal_target(), 0.5)
    n = 3000
    values = np.empty(n)
    for i in range(n):
        record = sample_meeting(
            derive_stream(54, i),
            kernel,
            PointMassInitial([3.0]),
            1,
            10**5,
            keep_trajectory=True,
            min_steps=20,
        )
        values[i] = unbiased_estimator_h(record, lambda s: float(s[0]), 20)
    se = values.std(ddof=1) / math.sqrt(n)
    assert abs(values.mean()) < 4 * se


def test_h_estimator_trajectory_coverage_errors():
    record = _fake_trajectory_record([5.0, 3.0, 2.0, 1.0], [1.0, 2.0, 1.0], lag=1)
    with pytest.raises(ValueError, match="min_steps"):
        unbiased_estimator_h(record, lambda s: float(s[0]), 10)
    bare = MeetingRecord(lag=1, tau=3, censored=False)
    with pytest.raises(ValueError, match="keep_trajectory"):
        unbiased_estimator_h(bare, lambda s: float(s[0]), 0)
