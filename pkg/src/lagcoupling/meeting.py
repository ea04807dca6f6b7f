"""Lagged meeting-time driver.

One replicate advances a chain ``lag`` steps from the initial distribution,
starts an independent lagged copy, then evolves the pair jointly until they
are bitwise equal or a step cap is reached. Hitting the cap produces a
censored record, never an exception: downstream estimators must see
censoring because a truncated meeting time silently turns the bound
estimates into lower bounds of the intended upper bound.

Replicate i always runs on the stream derived from (master_seed, name, i),
so results are identical for any worker count or scheduling order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Optional

from joblib import Parallel, delayed

from .kernels.base import CoupledKernel
from .rng import RngStream, stream_for

__all__ = [
    "MeetingRecord",
    "ExperimentConfig",
    "ReplicateError",
    "sample_meeting",
    "run_replicates",
]


class ReplicateError(RuntimeError):
    """A replicate failed; carries the replicate index for diagnosis."""

    def __init__(self, replicate: int, cause: BaseException):
        super().__init__(f"replicate {replicate} failed: {cause}")
        self.replicate = replicate


@dataclass
class MeetingRecord:
    """Outcome of one coupled run.

    ``tau`` is the meeting time; for a censored record it holds the step cap
    at which the run gave up. When trajectories were kept, ``x_path[t]`` is
    the leading chain at time t (0 <= t <= tau, or further if the run was
    extended) and ``y_path[s]`` the lagged chain at time s (so the meeting
    pairs x_path[t] with y_path[t - lag]).
    """

    lag: int
    tau: int
    censored: bool
    x_path: Optional[list] = None
    y_path: Optional[list] = None

    @property
    def has_trajectory(self) -> bool:
        return self.x_path is not None


def sample_meeting(
    rng: RngStream,
    kernel: CoupledKernel,
    pi0_sampler: Callable[[RngStream], Any],
    lag: int,
    t_max: int,
    keep_trajectory: bool = False,
    min_steps: int = 0,
) -> MeetingRecord:
    """Run one lagged coupled replicate to meeting (or to the cap).

    With ``min_steps`` the leading chain is extended marginally past the
    meeting; by faithfulness the lagged chain mirrors it, which keeps
    trajectories long enough for estimators that read fixed time points.
    """
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    if t_max <= lag:
        raise ValueError(f"t_max must exceed the lag, got t_max={t_max}, lag={lag}")

    x, y, x_path = kernel.init_lagged_pair(rng, pi0_sampler, lag, keep_trajectory)
    y_path = [y] if keep_trajectory else None

    t = lag
    tau = None
    if kernel.meeting_at_lag and kernel.states_equal(x, y):
        tau = lag
    while tau is None and t < t_max:
        t += 1
        x, y = kernel.step_pair(rng, x, y)
        if keep_trajectory:
            x_path.append(x)
            y_path.append(y)
        if kernel.states_equal(x, y):
            tau = t
    if tau is None:
        return MeetingRecord(lag=lag, tau=t_max, censored=True, x_path=x_path, y_path=y_path)

    # faithful continuation: one marginal chain stands in for both
    while t < min_steps:
        t += 1
        x = kernel.step_single(rng, x)
        if keep_trajectory:
            x_path.append(x)
            y_path.append(x)
    return MeetingRecord(lag=lag, tau=tau, censored=False, x_path=x_path, y_path=y_path)


@dataclass
class ExperimentConfig:
    """Resolved settings for a batch of replicates plus curve extraction."""

    name: str
    kernel: CoupledKernel
    pi0_sampler: Callable[[RngStream], Any]
    lag: int
    n_replicates: int
    t_max: int
    master_seed: int
    t_grid: tuple[int, ...] = ()
    keep_trajectories: bool = False
    min_steps: int = 0
    n_workers: int = 1
    metrics: tuple[str, ...] = ("tv",)

    def __post_init__(self):
        if self.lag < 1 or self.n_replicates < 1:
            raise ValueError("lag and n_replicates must be >= 1")
        if self.t_max <= self.lag:
            raise ValueError("t_max must exceed the lag")


def _run_one(config: ExperimentConfig, replicate: int) -> MeetingRecord:
    rng = stream_for(config.master_seed, config.name, replicate)
    try:
        return sample_meeting(
            rng,
            config.kernel,
            config.pi0_sampler,
            config.lag,
            config.t_max,
            keep_trajectory=config.keep_trajectories,
            min_steps=config.min_steps,
        )
    except Exception as exc:
        raise ReplicateError(replicate, exc) from exc


def run_replicates(config: ExperimentConfig) -> list[MeetingRecord]:
    """All replicates of an experiment, ordered by replicate index.

    The output is a pure function of the config: each replicate owns a
    stream keyed by its index, so worker count and scheduling cannot change
    the result.
    """
    indices = range(config.n_replicates)
    if config.n_workers <= 1:
        return [_run_one(config, i) for i in indices]
    results = Parallel(n_jobs=config.n_workers)(
        delayed(_run_one)(config, i) for i in indices
    )
    return list(results)
