"""Exact-meeting coupling primitives.

Three ways to draw a pair (x, y) with prescribed marginals such that the
event {x == y} has maximal (or structurally useful) probability:

* :func:`maximal_coupling` -- generic rejection construction, needs samplers
  and log-densities of both marginals;
* :func:`reflection_maximal_gaussian` -- maximal coupling of two Gaussians
  sharing a covariance, with deterministic cost;
* :func:`discrete_maximal_coupling` -- maximal coupling of two finite
  distributions.

Meeting means bitwise equality: the meet branch always copies the value, so
faithfulness never depends on a tolerance. Log-densities are used throughout
to stay finite in high dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .rng import RngStream

__all__ = [
    "CoupledDraw",
    "CouplingFailureError",
    "maximal_coupling",
    "maximal_coupling_logratio",
    "reflection_maximal_gaussian",
    "discrete_maximal_coupling",
]

DEFAULT_MAX_TRIALS = 10**6


class CouplingFailureError(RuntimeError):
    """The rejection loop exceeded its cap; almost surely mis-specified densities."""


@dataclass
class CoupledDraw:
    """One coupled pair. ``met`` implies x and y are bitwise identical."""

    x: Any
    y: Any
    met: bool


def _copy_state(value):
    return value.copy() if isinstance(value, np.ndarray) else value


def _log_uniform(rng: RngStream) -> float:
    u = rng.uniform()
    return math.log(u) if u > 0.0 else -math.inf


def maximal_coupling(
    rng: RngStream,
    sampler_p: Callable[[RngStream], Any],
    logpdf_p: Callable[[Any], float],
    sampler_q: Callable[[RngStream], Any],
    logpdf_q: Callable[[Any], float],
    max_trials: int = DEFAULT_MAX_TRIALS,
) -> CoupledDraw:
    """Maximal coupling of p and q from samplers and log-densities.

    Returns x ~ p and y ~ q with P(x = y) = 1 - d_TV(p, q). The densities
    must share a dominating measure.
    """
    return maximal_coupling_logratio(
        rng,
        sampler_p,
        sampler_q,
        lambda v: logpdf_p(v) - logpdf_q(v),
        max_trials=max_trials,
    )


def maximal_coupling_logratio(
    rng: RngStream,
    sampler_p: Callable[[RngStream], Any],
    sampler_q: Callable[[RngStream], Any],
    log_ratio_pq: Callable[[Any], float],
    max_trials: int = DEFAULT_MAX_TRIALS,
) -> CoupledDraw:
    """Maximal coupling needing only the log density ratio log(p/q).

    Useful when the marginals share an intractable base factor that cancels,
    as for Polya-Gamma pairs.
    """
    x = sampler_p(rng)
    if _log_uniform(rng) <= -log_ratio_pq(x):
        return CoupledDraw(x=x, y=_copy_state(x), met=True)
    for _ in range(max_trials):
        y = sampler_q(rng)
        if _log_uniform(rng) > log_ratio_pq(y):
            return CoupledDraw(x=x, y=y, met=False)
    raise CouplingFailureError(
        f"maximal coupling rejection loop exceeded {max_trials} trials"
    )


def reflection_maximal_gaussian(
    rng: RngStream,
    mu1: np.ndarray,
    mu2: np.ndarray,
    sigma_sqrt: float | np.ndarray,
) -> CoupledDraw:
    """Reflection-maximal coupling of N(mu1, S) and N(mu2, S).

    ``sigma_sqrt`` is a square root of the shared covariance S: either a
    scalar s (meaning s^2 I) or an invertible (d, d) matrix A with S = A A^T.
    The meet probability equals 1 - d_TV of the two Gaussians and the cost is
    deterministic (no rejection loop).
    """
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    if mu1.shape != mu2.shape:
        raise ValueError(f"mean shapes differ: {mu1.shape} vs {mu2.shape}")
    d = mu1.shape[0]
    scalar_root = np.isscalar(sigma_sqrt)
    if not scalar_root:
        sigma_sqrt = np.asarray(sigma_sqrt, dtype=float)
        if sigma_sqrt.shape != (d, d):
            raise ValueError(
                f"sigma_sqrt must be scalar or ({d}, {d}), got {sigma_sqrt.shape}"
            )

    delta = mu1 - mu2
    if scalar_root:
        z = delta / sigma_sqrt
    else:
        z = np.linalg.solve(sigma_sqrt, delta)
    z_norm = float(np.linalg.norm(z))

    xdot = rng.std_normals(d)
    if scalar_root:
        x = mu1 + sigma_sqrt * xdot
    else:
        x = mu1 + sigma_sqrt @ xdot

    if z_norm == 0.0:
        return CoupledDraw(x=x, y=x.copy(), met=True)

    # accept test in standardized space: compare N(0, I) density at xdot + z
    log_accept = -float(np.dot(xdot + z, xdot + z) - np.dot(xdot, xdot)) / 2.0
    if _log_uniform(rng) <= log_accept:
        return CoupledDraw(x=x, y=x.copy(), met=True)
    e = z / z_norm
    ydot = xdot - 2.0 * float(np.dot(e, xdot)) * e
    if scalar_root:
        y = mu2 + sigma_sqrt * ydot
    else:
        y = mu2 + sigma_sqrt @ ydot
    return CoupledDraw(x=x, y=y, met=False)


def _sample_index(rng: RngStream, weights: np.ndarray, total: float) -> int:
    """Index draw proportional to non-negative weights summing to ``total``."""
    target = rng.uniform() * total
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if target < acc:
            return i
    return int(len(weights) - 1)  # guard against rounding at the top end


def discrete_maximal_coupling(
    rng: RngStream, p: np.ndarray, q: np.ndarray
) -> CoupledDraw:
    """Maximal coupling of two finite distributions; returns index pairs.

    Meets with probability sum_n min(p_n, q_n); otherwise x and y come from
    the normalized residuals, which have disjoint supports.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"probability vectors must share a 1-d shape: {p.shape} vs {q.shape}")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probability vectors must be non-negative")
    if abs(p.sum() - 1.0) > 1e-12 or abs(q.sum() - 1.0) > 1e-12:
        raise ValueError("probability vectors must sum to 1 within 1e-12")

    overlap = np.minimum(p, q)
    s = float(overlap.sum())
    if rng.uniform() < s or s >= 1.0 - 1e-15:
        idx = _sample_index(rng, overlap, s)
        return CoupledDraw(x=idx, y=idx, met=True)
    res_p = p - overlap
    res_q = q - overlap
    x = _sample_index(rng, res_p, float(res_p.sum()))
    y = _sample_index(rng, res_q, float(res_q.sum()))
    return CoupledDraw(x=x, y=y, met=False)
