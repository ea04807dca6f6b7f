"""Shared test machinery: statistical helpers and kernel property suites."""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from lagcoupling import derive_stream


def batch_means(samples, n_batches: int = 20):
    """Mean and autocorrelation-robust standard error via batch means."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0] // n_batches
    batches = samples[: n * n_batches].reshape(n_batches, n, *samples.shape[1:])
    means = batches.mean(axis=1)
    se = means.std(axis=0, ddof=1) / math.sqrt(n_batches)
    return samples.mean(axis=0), se


def finite_difference_gradient(f, x, h: float = 1e-5):
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        up = x.copy()
        down = x.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (f(up) - f(down)) / (2.0 * h)
    return grad


def assert_gradient_matches(target, points, rtol: float = 1e-4):
    for x in points:
        analytic = target.grad_log_density(np.asarray(x, dtype=float))
        numeric = finite_difference_gradient(target.log_density, x)
        scale = np.maximum(np.abs(numeric), 1.0)
        assert np.all(np.abs(analytic - numeric) <= rtol * scale), (
            f"gradient mismatch at {x}: {analytic} vs {numeric}"
        )


# ---------------------------------------------------------------------------
# kernel property suites (used by unit tests and the acceptance module)
# ---------------------------------------------------------------------------


def run_faithfulness_suite(kernel, state_sampler, n_states: int, seed: int = 101) -> int:
    """step_pair on an equal pair must return a bitwise-equal pair."""
    rng_states = derive_stream(seed, 0)
    rng_steps = derive_stream(seed, 1)
    failures = 0
    for _ in range(n_states):
        s = state_sampler(rng_states)
        out_x, out_y = kernel.step_pair(rng_steps, s, _clone(s))
        if not kernel.states_equal(out_x, out_y):
            failures += 1
    return failures


def _clone(state):
    if isinstance(state, np.ndarray):
        return state.copy()
    if isinstance(state, tuple):
        return tuple(_clone(part) for part in state)
    return state


def marginal_agreement_pvalue(
    kernel, x0, y0, n_samples: int, statistic, discrete: bool = False, seed: int = 202
) -> float:
    """Compare step_pair's first component against step_single, same start.

    Returns the p-value of a two-sample KS test (continuous statistic) or of
    a chi-square test over pooled bins (discrete statistic).
    """
    rng_pair = derive_stream(seed, 0)
    rng_single = derive_stream(seed, 1)
    paired = np.array(
        [statistic(kernel.step_pair(rng_pair, x0, y0)[0]) for _ in range(n_samples)]
    )
    single = np.array(
        [statistic(kernel.step_single(rng_single, x0)) for _ in range(n_samples)]
    )
    if not discrete:
        return float(stats.ks_2samp(paired, single).pvalue)
    return _chi_square_two_sample(paired, single)


def _chi_square_two_sample(a, b, min_expected: float = 5.0) -> float:
    values = np.unique(np.concatenate([a, b]))
    counts_a = np.array([np.sum(a == v) for v in values], dtype=float)
    counts_b = np.array([np.sum(b == v) for v in values], dtype=float)
    # pool sparse cells so chi-square expectations stay above the threshold
    pooled_a, pooled_b = [], []
    acc_a = acc_b = 0.0
    for ca, cb in zip(counts_a, counts_b):
        acc_a += ca
        acc_b += cb
        if acc_a + acc_b >= 2 * min_expected:
            pooled_a.append(acc_a)
            pooled_b.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a + acc_b > 0:
        if pooled_a:
            pooled_a[-1] += acc_a
            pooled_b[-1] += acc_b
        else:
            pooled_a.append(acc_a)
            pooled_b.append(acc_b)
    table = np.array([pooled_a, pooled_b])
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2:
        return 1.0  # identical degenerate distributions
    return float(stats.chi2_contingency(table).pvalue)
