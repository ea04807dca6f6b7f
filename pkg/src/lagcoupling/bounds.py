"""Bound curves and derived estimates from meeting records.

The core identity: for a lagged coupled pair meeting at tau, the distance
between the chain's time-t marginal and its invariant distribution is
bounded by the mean of

    sum_{j=1..J(t)} M(x_{t+j*lag}, y_{t+(j-1)*lag}),   J(t) = ceil((tau - lag - t) / lag)

with the empty-sum convention for J(t) <= 0. Unit cost M gives the total
variation curve (which only needs meeting times); the L1 cost gives the
1-Wasserstein curve (which needs trajectories).

Censored records poison a curve by default. With the explicit override they
contribute at their cap value and the curve is flagged invalid: the result
is then only a lower bound of the intended upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .kernels.pimh import PimhKernel
from .meeting import MeetingRecord
from .rng import RngStream
from .targets import SmcProposalSpec

__all__ = [
    "BoundCurve",
    "CensoredRecordsError",
    "tv_bound_curve",
    "w1_bound_curve",
    "ipm_bound_curve",
    "mixing_time",
    "geometric_ceil_expectation",
    "smc_bias_bound",
    "smc_zhat_draw",
    "pimh_zhat_after_warmup",
    "unbiased_estimator_h",
    "unbiased_estimator_h_avg",
]


class CensoredRecordsError(ValueError):
    """Censored records reached an estimator that refuses them by default."""


@dataclass
class BoundCurve:
    """Estimated upper bounds over a time grid, with plain i.i.d. standard errors."""

    t_grid: np.ndarray
    bound: np.ndarray
    std_error: np.ndarray
    metric: str
    lag: int
    n_replicates: int
    censored_count: int = 0

    @property
    def valid(self) -> bool:
        return self.censored_count == 0


def _ceil_div_pos(a: int, b: int) -> int:
    """ceil(a / b) for a > 0, b > 0, in exact integer arithmetic."""
    return (a + b - 1) // b


def _n_terms(tau: int, lag: int, t: int) -> int:
    """max(0, ceil((tau - lag - t) / lag)) without float rounding."""
    a = tau - lag - t
    return _ceil_div_pos(a, lag) if a > 0 else 0


def _validate_records(
    records: Sequence[MeetingRecord], allow_censored: bool
) -> tuple[int, int]:
    if not records:
        raise ValueError("no meeting records supplied")
    lags = {r.lag for r in records}
    if len(lags) > 1:
        raise ValueError(f"records mix lags {sorted(lags)}; curves need a single lag")
    censored = sum(r.censored for r in records)
    if censored and not allow_censored:
        raise CensoredRecordsError(
            f"{censored} of {len(records)} records are censored; the resulting curve "
            "would silently lower-bound the upper bound. Pass allow_censored=True "
            "to get a curve flagged invalid."
        )
    return lags.pop(), censored


def _curve_from_samples(
    samples: np.ndarray, t_grid, metric: str, lag: int, censored: int
) -> BoundCurve:
    n = samples.shape[0]
    bound = samples.mean(axis=0)
    if n > 1:
        std_error = samples.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        std_error = np.zeros_like(bound)
    return BoundCurve(
        t_grid=np.asarray(list(t_grid), dtype=int),
        bound=bound,
        std_error=std_error,
        metric=metric,
        lag=lag,
        n_replicates=n,
        censored_count=censored,
    )


def tv_bound_curve(
    records: Sequence[MeetingRecord],
    t_grid: Iterable[int],
    allow_censored: bool = False,
) -> BoundCurve:
    """Total variation bound: mean of the clamped term count at each grid time."""
    lag, censored = _validate_records(records, allow_censored)
    grid = list(t_grid)
    samples = np.array(
        [[_n_terms(r.tau, lag, t) for t in grid] for r in records], dtype=float
    )
    return _curve_from_samples(samples, grid, "tv", lag, censored)


def _l1_distance(x, y) -> float:
    return float(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)).sum())


def ipm_bound_curve(
    records: Sequence[MeetingRecord],
    t_grid: Iterable[int],
    m_h: Callable[[object, object], float],
    metric: str = "custom",
    allow_censored: bool = False,
) -> BoundCurve:
    """Generic bound curve for a user pair-cost; needs stored trajectories."""
    lag, censored = _validate_records(records, allow_censored)
    grid = list(t_grid)
    samples = np.empty((len(records), len(grid)))
    for i, record in enumerate(records):
        if not record.has_trajectory:
            raise ValueError("ipm/w1 curves need records with keep_trajectory=True")
        xs, ys = record.x_path, record.y_path
        for j, t in enumerate(grid):
            total = 0.0
            for k in range(1, _n_terms(record.tau, lag, t) + 1):
                total += m_h(xs[t + k * lag], ys[t + (k - 1) * lag])
            samples[i, j] = total
    return _curve_from_samples(samples, grid, metric, lag, censored)


def w1_bound_curve(
    records: Sequence[MeetingRecord],
    t_grid: Iterable[int],
    allow_censored: bool = False,
) -> BoundCurve:
    """1-Wasserstein bound under the L1 ground metric."""
    return ipm_bound_curve(records, t_grid, _l1_distance, "w1", allow_censored)


def mixing_time(records: Sequence[MeetingRecord], epsilon: float) -> int:
    """Smallest k whose estimated total variation bound drops below epsilon.

    The per-record term count is non-increasing in k, so the empirical bound
    is too and binary search over k in [0, max tau - lag] is exact.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    lag, _ = _validate_records(records, allow_censored=False)
    taus = np.array([r.tau for r in records], dtype=int)

    def bound_at(k: int) -> float:
        return float(np.mean([_n_terms(int(tau), lag, k) for tau in taus]))

    if bound_at(0) < epsilon:
        return 0
    lo = 0
    hi = int(taus.max()) - lag  # bound is exactly zero here
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound_at(mid) < epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def geometric_ceil_expectation(p: float, m: int, n: int) -> float:
    """E[max(0, ceil((G - m) / n))] for G geometric on {1, 2, ...}.

    Closed form (1-p)^m / (1 - (1-p)^n); the building block behind the
    particle-sampler bias bound.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    if m < 0 or n < 1:
        raise ValueError(f"need m >= 0 and n >= 1, got m={m}, n={n}")
    if p == 1.0:
        return 1.0 if m == 0 else 0.0
    q = 1.0 - p
    return q**m / (1.0 - q**n)


def smc_zhat_draw(spec: SmcProposalSpec) -> Callable[[RngStream], float]:
    """Fresh normalizing-constant draws from one importance-sampling run."""

    class _Draw:
        def __init__(self, spec):
            self.kernel = PimhKernel(spec)

        def __call__(self, rng: RngStream) -> float:
            return self.kernel.propose(rng).zhat

    return _Draw(spec)


def pimh_zhat_after_warmup(rng: RngStream, spec: SmcProposalSpec, lag: int) -> float:
    """Z estimate carried by a particle-MH chain after lag - 1 steps.

    For lag 1 this is a fresh sampler run; for larger lags the chain's Z law
    differs from a fresh run, so the bias bound's outer samples must come
    from here rather than from independent sampler runs.
    """
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    kernel = PimhKernel(spec)
    state = kernel.propose(rng)
    for _ in range(lag - 1):
        state = kernel.step_single(rng, state)
    return state.zhat


def smc_bias_bound(
    rng: RngStream,
    zhat_samples: Sequence[float],
    lag: int,
    alpha_inner_reps: int,
    draw_zhat: Callable[[RngStream], float],
) -> tuple[float, float]:
    """Bias bound for particle samplers from the geometric meeting law.

    For each outer sample z, the acceptance rate alpha(z) = E[min(1, Z*/z)]
    is estimated with ``alpha_inner_reps`` fresh draws of Z*, plugged into
    (1 - alpha) / (1 - (1 - alpha)^lag), and averaged. Returns the average
    and its standard error over the outer samples. The nested estimate
    carries an O(1 / alpha_inner_reps) bias on top of the outer noise.
    """
    if alpha_inner_reps < 1:
        raise ValueError("alpha_inner_reps must be >= 1")
    zs = np.asarray(list(zhat_samples), dtype=float)
    if zs.size == 0:
        raise ValueError("no zhat samples supplied")
    if np.any(zs <= 0):
        raise ValueError("all zhat samples must be positive")
    values = np.empty(zs.size)
    for i, z in enumerate(zs):
        acc = 0.0
        for _ in range(alpha_inner_reps):
            acc += min(1.0, draw_zhat(rng) / z)
        alpha = acc / alpha_inner_reps
        q = 1.0 - alpha
        values[i] = 0.0 if q == 0.0 else q / (1.0 - q**lag)
    bound = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return bound, std_error


def _require_trajectory(record: MeetingRecord):
    if record.censored:
        raise CensoredRecordsError("estimator needs an uncensored record")
    if not record.has_trajectory:
        raise ValueError("estimator needs a record with keep_trajectory=True")


def unbiased_estimator_h(record: MeetingRecord, h: Callable[[object], float], t: int) -> float:
    """Single-time estimator of the stationary mean of h.

    h(x_t) plus the coupled correction sum; unbiased for the invariant
    expectation of h across independent replicates.
    """
    _require_trajectory(record)
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    xs, ys = record.x_path, record.y_path
    lag = record.lag
    terms = _n_terms(record.tau, lag, t)
    top = max(t, t + terms * lag)
    if top >= len(xs):
        raise ValueError(
            f"trajectory covers times up to {len(xs) - 1} but t={t} needs {top}; "
            "rerun with min_steps at least that large"
        )
    value = h(xs[t])
    for j in range(1, terms + 1):
        value += h(xs[t + j * lag]) - h(ys[t + (j - 1) * lag])
    return float(value)


def unbiased_estimator_h_avg(
    record: MeetingRecord, h: Callable[[object], float], k: int, m: int
) -> float:
    """Time-averaged variant over t = k..m (inclusive)."""
    if m < k:
        raise ValueError(f"need m >= k, got k={k}, m={m}")
    total = 0.0
    for t in range(k, m + 1):
        total += unbiased_estimator_h(record, h, t)
    return total / (m - k + 1)
