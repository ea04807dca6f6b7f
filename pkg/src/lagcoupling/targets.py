"""Target distributions and problem generators.

Continuous targets expose a log-density and, where the kernels need one, an
analytic gradient. Discrete machinery for the spin-lattice model and the
importance-sampling spec backing the particle kernels also lives here.
Targets are immutable after construction and safe to share across replicate
workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .rng import RngStream

__all__ = [
    "ContinuousTarget",
    "std_normal_target",
    "bimodal_target",
    "ar1_mvn_target",
    "LogisticDataset",
    "logistic_posterior",
    "synthetic_logistic_dataset",
    "IsingState",
    "random_ising_state",
    "ising_conditional",
    "ising_energy",
    "SmcProposalSpec",
    "smc_sampler_run",
    "gaussian_importance_spec",
    "SmcDegeneracyError",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class ContinuousTarget:
    """A target on R^d: log-density up to a constant, optional gradient."""

    dim: int
    log_density: Callable[[np.ndarray], float]
    grad_log_density: Optional[Callable[[np.ndarray], np.ndarray]] = None


class _IidNormal:
    def __init__(self, dim: int):
        self.dim = dim

    def log_density(self, x: np.ndarray) -> float:
        return -0.5 * float(np.dot(x, x)) - 0.5 * self.dim * _LOG_2PI

    def grad_log_density(self, x: np.ndarray) -> np.ndarray:
        return -x


def std_normal_target(dim: int = 1) -> ContinuousTarget:
    """Standard normal N(0, I_dim); the univariate case by default."""
    t = _IidNormal(dim)
    return ContinuousTarget(dim=dim, log_density=t.log_density, grad_log_density=t.grad_log_density)


class _GaussianMixture1d:
    def __init__(self, means, weights, var=1.0):
        self.means = np.asarray(means, dtype=float)
        self.log_weights = np.log(np.asarray(weights, dtype=float))
        self.var = var

    def _component_logs(self, x: np.ndarray) -> np.ndarray:
        z = x[0] - self.means
        return self.log_weights - 0.5 * z * z / self.var - 0.5 * math.log(2.0 * math.pi * self.var)

    def log_density(self, x: np.ndarray) -> float:
        return float(np.logaddexp.reduce(self._component_logs(x)))

    def grad_log_density(self, x: np.ndarray) -> np.ndarray:
        logs = self._component_logs(x)
        w = np.exp(logs - np.logaddexp.reduce(logs))
        return np.array([float(np.sum(w * (self.means - x[0]) / self.var))])


def bimodal_target() -> ContinuousTarget:
    """Equal mixture of N(-4, 1) and N(4, 1)."""
    t = _GaussianMixture1d(means=[-4.0, 4.0], weights=[0.5, 0.5])
    return ContinuousTarget(dim=1, log_density=t.log_density, grad_log_density=t.grad_log_density)


class _Ar1Gaussian:
    """N(0, S) with S_ij = rho^|i-j|; the precision is tridiagonal.

    Applying the precision costs O(d), which keeps the dimension-sweep
    experiments linear per step.
    """

    def __init__(self, dim: int, rho: float):
        self.dim = dim
        self.rho = rho
        self.log_det_cov = (dim - 1) * math.log1p(-rho * rho)

    def apply_precision(self, x: np.ndarray) -> np.ndarray:
        d, rho = self.dim, self.rho
        if d == 1:
            return x.copy()
        scale = 1.0 / (1.0 - rho * rho)
        out = (1.0 + rho * rho) * x
        out[0] = x[0]
        out[-1] = x[-1]
        out[:-1] -= rho * x[1:]
        out[1:] -= rho * x[:-1]
        return scale * out

    def log_density(self, x: np.ndarray) -> float:
        return (
            -0.5 * float(np.dot(x, self.apply_precision(x)))
            - 0.5 * self.dim * _LOG_2PI
            - 0.5 * self.log_det_cov
        )

    def grad_log_density(self, x: np.ndarray) -> np.ndarray:
        return -self.apply_precision(x)


def ar1_mvn_target(dim: int, rho: float = 0.5) -> ContinuousTarget:
    """Multivariate normal with covariance S_ij = rho^|i-j|."""
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    t = _Ar1Gaussian(dim, rho)
    return ContinuousTarget(dim=dim, log_density=t.log_density, grad_log_density=t.grad_log_density)


# ---------------------------------------------------------------------------
# Bayesian logistic regression
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogisticDataset:
    """Binary responses in {-1, +1}, covariates, and a Gaussian prior on beta."""

    responses: np.ndarray
    covariates: np.ndarray
    prior_mean: np.ndarray
    prior_cov: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.responses)
        x = np.asarray(self.covariates)
        if not np.all(np.isin(y, (-1, 1))):
            raise ValueError("responses must take values in {-1, +1}")
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError("covariates must be (n, d) with one row per response")
        if not np.all(np.isfinite(x)):
            raise ValueError("covariates must be finite")
        b = np.asarray(self.prior_cov)
        if b.shape != (x.shape[1], x.shape[1]) or not np.allclose(b, b.T):
            raise ValueError("prior covariance must be a symmetric (d, d) matrix")
        np.linalg.cholesky(b)  # raises if not positive definite

    @property
    def n(self) -> int:
        return self.responses.shape[0]

    @property
    def dim(self) -> int:
        return self.covariates.shape[1]


class _LogisticPosterior:
    def __init__(self, dataset: LogisticDataset):
        self.y = np.asarray(dataset.responses, dtype=float)
        self.x = np.asarray(dataset.covariates, dtype=float)
        self.b = np.asarray(dataset.prior_mean, dtype=float)
        cov = np.asarray(dataset.prior_cov, dtype=float)
        self.prior_prec = np.linalg.inv(cov)
        sign, logdet = np.linalg.slogdet(cov)
        self.prior_log_norm = -0.5 * (self.x.shape[1] * _LOG_2PI + logdet)

    def log_density(self, beta: np.ndarray) -> float:
        t = self.y * (self.x @ beta)
        loglik = -float(np.sum(np.logaddexp(0.0, -t)))
        dev = beta - self.b
        logprior = self.prior_log_norm - 0.5 * float(dev @ self.prior_prec @ dev)
        return loglik + logprior

    def grad_log_density(self, beta: np.ndarray) -> np.ndarray:
        t = self.y * (self.x @ beta)
        grad_lik = self.x.T @ (self.y * expit(-t))
        return grad_lik - self.prior_prec @ (beta - self.b)


def logistic_posterior(dataset: LogisticDataset) -> ContinuousTarget:
    """Posterior of the logistic regression coefficients under the dataset's prior."""
    t = _LogisticPosterior(dataset)
    return ContinuousTarget(
        dim=dataset.dim, log_density=t.log_density, grad_log_density=t.grad_log_density
    )


def synthetic_logistic_dataset(
    rng: RngStream,
    n: int,
    dim: int,
    prior_variance: float = 10.0,
) -> LogisticDataset:
    """Synthetic problem: true beta ~ N(0, I), standard normal covariates."""
    beta_true = rng.std_normals(dim)
    covariates = rng.std_normals((n, dim))
    probs = expit(covariates @ beta_true)
    responses = np.where(rng.uniforms(n) < probs, 1, -1)
    return LogisticDataset(
        responses=responses,
        covariates=covariates,
        prior_mean=np.zeros(dim),
        prior_cov=prior_variance * np.eye(dim),
    )


# ---------------------------------------------------------------------------
# Square-lattice spin model
# ---------------------------------------------------------------------------


@dataclass
class IsingState:
    """Spins on an n-by-n periodic lattice, entries in {-1, +1}."""

    spins: np.ndarray
    n: int

    def __post_init__(self):
        if self.spins.shape != (self.n, self.n):
            raise ValueError(f"spins must be ({self.n}, {self.n}), got {self.spins.shape}")
        if not np.all(np.isin(self.spins, (-1, 1))):
            raise ValueError("spins must take values in {-1, +1}")


def random_ising_state(rng: RngStream, n: int) -> np.ndarray:
    """Independent fair spins on each site (the usual diffuse initialization)."""
    return np.where(rng.uniforms((n, n)) < 0.5, 1, -1).astype(np.int8)


def ising_conditional(state: IsingState, site: tuple[int, int], beta: float) -> float:
    """P(spin at ``site`` = +1 | all other spins) under inverse temperature beta.

    Depends only on the four periodic neighbors: 1 / (1 + exp(-2 beta s))
    with s their spin sum.
    """
    r, c = site
    n = state.n
    if not (0 <= r < n and 0 <= c < n):
        raise ValueError(f"site {site} outside {n}x{n} lattice")
    s = int(
        state.spins[(r - 1) % n, c]
        + state.spins[(r + 1) % n, c]
        + state.spins[r, (c - 1) % n]
        + state.spins[r, (c + 1) % n]
    )
    return 1.0 / (1.0 + math.exp(-2.0 * beta * s))


def ising_energy(spins: np.ndarray) -> int:
    """Sum of x_i x_j over neighboring pairs with periodic boundaries."""
    return int(
        np.sum(spins * np.roll(spins, 1, axis=0)) + np.sum(spins * np.roll(spins, 1, axis=1))
    )


# ---------------------------------------------------------------------------
# Self-normalized importance sampling (the simplest SMC sampler)
# ---------------------------------------------------------------------------


class SmcDegeneracyError(RuntimeError):
    """All particle weights vanished."""


@dataclass(frozen=True)
class SmcProposalSpec:
    """Importance-sampling spec: proposal, unnormalized target, particle count.

    ``proposal_sampler(rng, n)`` returns an (n, d) batch; the log-density
    callables are vectorized over rows. The proposal must dominate the
    target so the weights stay finite.
    """

    proposal_sampler: Callable[[RngStream, int], np.ndarray]
    proposal_log_density: Callable[[np.ndarray], np.ndarray]
    target_log_density: Callable[[np.ndarray], np.ndarray]
    n_particles: int


def smc_sampler_run(rng: RngStream, spec: SmcProposalSpec) -> tuple[np.ndarray, float]:
    """One importance-sampling pass: a selected particle and the Z estimate.

    The estimate (1/N) sum_n w(xi_n) is unbiased for the target's
    normalizing constant; the particle is drawn with probabilities
    proportional to the weights.
    """
    if spec.n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    particles = spec.proposal_sampler(rng, spec.n_particles)
    logw = spec.target_log_density(particles) - spec.proposal_log_density(particles)
    m = float(np.max(logw))
    if not np.isfinite(m):
        raise SmcDegeneracyError("all importance weights are zero")
    w = np.exp(logw - m)
    zhat = math.exp(m) * float(np.mean(w))
    total = float(np.sum(w))
    target = rng.uniform() * total
    acc = 0.0
    idx = spec.n_particles - 1
    for i, wi in enumerate(w):
        acc += wi
        if target < acc:
            idx = i
            break
    return particles[idx].copy(), zhat


class _ScaledNormalDensity:
    """log of scale * N(0, var) density, vectorized over (n, 1) batches."""

    def __init__(self, scale: float, var: float):
        self.log_scale = math.log(scale)
        self.var = var

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.log_scale - 0.5 * x[:, 0] ** 2 / self.var - 0.5 * math.log(2.0 * math.pi * self.var)


class _NormalProposal:
    def __init__(self, var: float):
        self.sd = math.sqrt(var)

    def __call__(self, rng: RngStream, n: int) -> np.ndarray:
        return self.sd * rng.std_normals((n, 1))


def gaussian_importance_spec(
    n_particles: int,
    target_scale: float = 2.0,
    proposal_variance: float = 2.0,
) -> SmcProposalSpec:
    """Tractable univariate spec: target scale * N(0,1), proposal N(0, v).

    The true normalizing constant is ``target_scale``, so everything about
    the Z estimator can be checked in closed form.
    """
    return SmcProposalSpec(
        proposal_sampler=_NormalProposal(proposal_variance),
        proposal_log_density=_ScaledNormalDensity(1.0, proposal_variance),
        target_log_density=_ScaledNormalDensity(target_scale, 1.0),
        n_particles=n_particles,
    )
