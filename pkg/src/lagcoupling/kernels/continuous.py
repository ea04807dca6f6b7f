"""Coupled kernels on R^d: random walk MH, MALA, ULA, and HMC.

All joint transitions share the acceptance uniform between the two chains,
so equal proposals with equal thresholds produce identical outcomes. The
proposal pairs come from maximal or reflection-maximal couplings; meetings
are bitwise by construction.
"""

from __future__ import annotations

import math

import numpy as np

from ..couplings import CoupledDraw, maximal_coupling, reflection_maximal_gaussian
from ..rng import RngStream
from ..targets import ContinuousTarget
from .base import CoupledKernel

__all__ = ["rwmh_coupled", "mala_coupled", "ula_coupled", "hmc_coupled"]

COUPLING_MODES = ("maximal", "reflection-maximal")


def _log_uniform(rng: RngStream) -> float:
    u = rng.uniform()
    return math.log(u) if u > 0.0 else -math.inf


class _GaussianProposalSampler:
    def __init__(self, center: np.ndarray, sigma: float):
        self.center = center
        self.sigma = sigma

    def __call__(self, rng: RngStream) -> np.ndarray:
        return self.center + self.sigma * rng.std_normals(self.center.shape[0])


class _GaussianLogPdf:
    def __init__(self, center: np.ndarray, sigma: float):
        self.center = center
        self.two_var = 2.0 * sigma * sigma

    def __call__(self, v: np.ndarray) -> float:
        dev = v - self.center
        return -float(np.dot(dev, dev)) / self.two_var


def _coupled_gaussian_proposals(
    rng: RngStream, mean_x: np.ndarray, mean_y: np.ndarray, sigma: float, mode: str
) -> CoupledDraw:
    if mode == "reflection-maximal":
        return reflection_maximal_gaussian(rng, mean_x, mean_y, sigma)
    return maximal_coupling(
        rng,
        _GaussianProposalSampler(mean_x, sigma),
        _GaussianLogPdf(mean_x, sigma),
        _GaussianProposalSampler(mean_y, sigma),
        _GaussianLogPdf(mean_y, sigma),
    )


class RandomWalkMhKernel(CoupledKernel):
    """Gaussian random walk Metropolis-Hastings with coupled proposals."""

    def __init__(
        self,
        target: ContinuousTarget,
        sigma_mh: float,
        coupling_mode: str = "reflection-maximal",
    ):
        if sigma_mh <= 0:
            raise ValueError(f"sigma_mh must be positive, got {sigma_mh}")
        if coupling_mode not in COUPLING_MODES:
            raise ValueError(f"coupling_mode must be one of {COUPLING_MODES}")
        self.target = target
        self.sigma = float(sigma_mh)
        self.coupling_mode = coupling_mode
        self.descriptor = f"rwmh(d={target.dim}, sigma={sigma_mh}, {coupling_mode})"

    def step_single(self, rng: RngStream, x: np.ndarray) -> np.ndarray:
        proposal = x + self.sigma * rng.std_normals(x.shape[0])
        logpi = self.target.log_density
        if _log_uniform(rng) <= logpi(proposal) - logpi(x):
            return proposal
        return x

    def step_pair(self, rng, x, y):
        draw = _coupled_gaussian_proposals(rng, x, y, self.sigma, self.coupling_mode)
        logpi = self.target.log_density
        logu = _log_uniform(rng)
        new_x = draw.x if logu <= logpi(draw.x) - logpi(x) else x
        new_y = draw.y if logu <= logpi(draw.y) - logpi(y) else y
        return new_x, new_y


class LangevinKernel(CoupledKernel):
    """Langevin proposals coupled by reflection; adjusted (MALA) or not (ULA)."""

    def __init__(self, target: ContinuousTarget, sigma: float, adjusted: bool):
        if target.grad_log_density is None:
            raise ValueError("Langevin kernels need a target gradient")
        if sigma <= 0:
            raise ValueError(f"sigma must be positive, got {sigma}")
        self.target = target
        self.sigma = float(sigma)
        self.adjusted = adjusted
        name = "mala" if adjusted else "ula"
        self.descriptor = f"{name}(d={target.dim}, sigma={sigma})"

    def _drift_mean(self, x: np.ndarray) -> np.ndarray:
        return x + 0.5 * self.sigma**2 * self.target.grad_log_density(x)

    def _log_q(self, mean_from: np.ndarray, to: np.ndarray) -> float:
        dev = to - mean_from
        return -float(np.dot(dev, dev)) / (2.0 * self.sigma**2)

    def _accept(self, rng, x, proposal) -> bool:
        logpi = self.target.log_density
        log_ratio = (
            logpi(proposal)
            + self._log_q(self._drift_mean(proposal), x)
            - logpi(x)
            - self._log_q(self._drift_mean(x), proposal)
        )
        return _log_uniform(rng) <= log_ratio

    def step_single(self, rng, x):
        proposal = self._drift_mean(x) + self.sigma * rng.std_normals(x.shape[0])
        if not self.adjusted:
            return proposal
        return proposal if self._accept(rng, x, proposal) else x

    def step_pair(self, rng, x, y):
        draw = reflection_maximal_gaussian(
            rng, self._drift_mean(x), self._drift_mean(y), self.sigma
        )
        if not self.adjusted:
            return draw.x, draw.y
        logpi = self.target.log_density
        logu = _log_uniform(rng)

        def ratio(state, proposal):
            return (
                logpi(proposal)
                + self._log_q(self._drift_mean(proposal), state)
                - logpi(state)
                - self._log_q(self._drift_mean(state), proposal)
            )

        new_x = draw.x if logu <= ratio(x, draw.x) else x
        new_y = draw.y if logu <= ratio(y, draw.y) else y
        return new_x, new_y


class HmcKernel(CoupledKernel):
    """Hamiltonian Monte Carlo mixed with a small-step coupled RWMH move.

    With probability 1 - gamma both chains integrate the same momentum draw
    and share the acceptance uniform (this contracts the pair); with
    probability gamma one coupled RWMH step at step size sigma_mh supplies
    the exact-meeting mechanism. The marginal transition uses the same
    mixture, so both phases of a lagged run follow one kernel.
    """

    def __init__(
        self,
        target: ContinuousTarget,
        eps_hmc: float,
        steps_hmc: int,
        gamma: float,
        sigma_mh: float,
        rwmh_coupling_mode: str = "maximal",
    ):
        if target.grad_log_density is None:
            raise ValueError("HMC needs a target gradient")
        if eps_hmc <= 0 or steps_hmc < 1:
            raise ValueError("leapfrog parameters must be positive")
        if not 0.0 < gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
        self.target = target
        self.eps = float(eps_hmc)
        self.steps = int(steps_hmc)
        self.gamma = float(gamma)
        self.rwmh = RandomWalkMhKernel(target, sigma_mh, rwmh_coupling_mode)
        self.descriptor = (
            f"hmc(d={target.dim}, eps={eps_hmc}, steps={steps_hmc}, gamma={gamma})"
        )

    def leapfrog(self, q: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grad = self.target.grad_log_density
        eps = self.eps
        q = q.copy()
        p = p + 0.5 * eps * grad(q)
        for step in range(self.steps):
            q = q + eps * p
            g = grad(q)
            p = p + (eps if step < self.steps - 1 else 0.5 * eps) * g
        return q, p

    def _hamiltonian(self, q: np.ndarray, p: np.ndarray) -> float:
        return -self.target.log_density(q) + 0.5 * float(np.dot(p, p))

    def _hmc_move(self, x: np.ndarray, momentum: np.ndarray, logu: float) -> np.ndarray:
        h0 = self._hamiltonian(x, momentum)
        q_new, p_new = self.leapfrog(x, momentum)
        h1 = self._hamiltonian(q_new, p_new)
        if not math.isfinite(h1):  # divergence guard
            return x
        return q_new if logu <= h0 - h1 else x

    def step_single(self, rng, x):
        if rng.uniform() <= self.gamma:
            return self.rwmh.step_single(rng, x)
        momentum = rng.std_normals(x.shape[0])
        return self._hmc_move(x, momentum, _log_uniform(rng))

    def step_pair(self, rng, x, y):
        if rng.uniform() <= self.gamma:
            return self.rwmh.step_pair(rng, x, y)
        momentum = rng.std_normals(x.shape[0])
        logu = _log_uniform(rng)
        return self._hmc_move(x, momentum, logu), self._hmc_move(y, momentum, logu)


def rwmh_coupled(
    target: ContinuousTarget,
    sigma_mh: float,
    coupling_mode: str = "reflection-maximal",
) -> RandomWalkMhKernel:
    return RandomWalkMhKernel(target, sigma_mh, coupling_mode)


def mala_coupled(target: ContinuousTarget, sigma: float) -> LangevinKernel:
    return LangevinKernel(target, sigma, adjusted=True)


def ula_coupled(target: ContinuousTarget, sigma: float) -> LangevinKernel:
    return LangevinKernel(target, sigma, adjusted=False)


def hmc_coupled(
    target: ContinuousTarget,
    eps_hmc: float,
    steps_hmc: int,
    gamma: float = 0.05,
    sigma_mh: float = 0.001,
    rwmh_coupling_mode: str = "maximal",
) -> HmcKernel:
    return HmcKernel(target, eps_hmc, steps_hmc, gamma, sigma_mh, rwmh_coupling_mode)
