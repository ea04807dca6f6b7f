"""Coupled particle independent Metropolis-Hastings.

Both chains share every proposal (one importance-sampling run per step) and
the acceptance uniform; a chain accepts when the uniform clears the ratio of
normalizing-constant estimates. The warmup differs from the other kernels:
the proposal made at the lag step also initializes the lagged chain, so the
meeting time can equal the lag itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import RngStream
from ..targets import SmcProposalSpec, smc_sampler_run
from .base import CoupledKernel

__all__ = ["pimh_coupled", "PimhKernel", "PimhState"]


@dataclass(frozen=True)
class PimhState:
    """Particle plus its run's normalizing-constant estimate."""

    particle: np.ndarray
    zhat: float

    def __post_init__(self):
        if not self.zhat > 0:
            raise ValueError(f"zhat must be positive, got {self.zhat}")


class PimhKernel(CoupledKernel):
    meeting_at_lag = True

    def __init__(self, spec: SmcProposalSpec):
        self.spec = spec
        self.descriptor = f"pimh(particles={spec.n_particles})"

    def propose(self, rng: RngStream) -> PimhState:
        particle, zhat = smc_sampler_run(rng, self.spec)
        return PimhState(particle=particle, zhat=zhat)

    @staticmethod
    def _accepts(logu: float, proposal: PimhState, current: PimhState) -> bool:
        return logu <= math.log(proposal.zhat) - math.log(current.zhat)

    def step_single(self, rng, state: PimhState) -> PimhState:
        proposal = self.propose(rng)
        logu = _log_uniform(rng)
        return proposal if self._accepts(logu, proposal, state) else state

    def step_pair(self, rng, state_x: PimhState, state_y: PimhState):
        proposal = self.propose(rng)
        logu = _log_uniform(rng)
        new_x = proposal if self._accepts(logu, proposal, state_x) else state_x
        new_y = proposal if self._accepts(logu, proposal, state_y) else state_y
        return new_x, new_y

    def states_equal(self, state_x: PimhState, state_y: PimhState) -> bool:
        return state_x.zhat == state_y.zhat and np.array_equal(
            state_x.particle, state_y.particle
        )

    def init_lagged_pair(self, rng, pi0_sampler, lag, keep_path):
        """Warmup per the seeded construction: the lag-step proposal starts y.

        ``pi0_sampler`` is ignored; the sampler's own importance run is the
        initial distribution.
        """
        x = self.propose(rng)
        path = [x] if keep_path else None
        for _ in range(lag - 1):
            x = self.step_single(rng, x)
            if keep_path:
                path.append(x)
        proposal = self.propose(rng)
        logu = _log_uniform(rng)
        if self._accepts(logu, proposal, x):
            x = proposal
        if keep_path:
            path.append(x)
        return x, proposal, path


def _log_uniform(rng: RngStream) -> float:
    u = rng.uniform()
    return math.log(u) if u > 0.0 else -math.inf


def pimh_coupled(spec: SmcProposalSpec) -> PimhKernel:
    return PimhKernel(spec)
