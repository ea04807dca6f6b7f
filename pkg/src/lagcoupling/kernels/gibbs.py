"""Coupled Polya-Gamma Gibbs sampler for Bayesian logistic regression.

The sampler alternates PG(1, |x_i' beta|) auxiliaries with a Gaussian full
conditional for beta. The joint transition maximally couples each auxiliary
pair through the tractable PG density ratio, then maximally couples the two
Gaussian conditionals, so an exact meeting of the beta chains has positive
probability at every step.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from ..couplings import maximal_coupling, maximal_coupling_logratio
from ..rng import RngStream, pg_log_density_ratio
from ..targets import LogisticDataset
from .base import CoupledKernel

__all__ = ["pg_gibbs_coupled", "PolyaGammaGibbsKernel"]


class _PgSampler:
    def __init__(self, c: float):
        self.c = c

    def __call__(self, rng: RngStream) -> float:
        return rng.polya_gamma(self.c)


class _PgLogRatio:
    def __init__(self, c1: float, c2: float):
        self.c1 = c1
        self.c2 = c2

    def __call__(self, x: float) -> float:
        return pg_log_density_ratio(x, self.c1, self.c2)


class _GaussianConditional:
    """N(mean, A^{-1}) from its precision Cholesky factor A = L L'."""

    def __init__(self, mean: np.ndarray, chol_precision: np.ndarray):
        self.mean = mean
        self.chol = chol_precision
        self.log_norm = float(np.sum(np.log(np.diag(chol_precision))))

    def sample(self, rng: RngStream) -> np.ndarray:
        noise = rng.std_normals(self.mean.shape[0])
        return self.mean + solve_triangular(self.chol.T, noise, lower=False)

    def log_pdf(self, v: np.ndarray) -> float:
        dev = self.chol.T @ (v - self.mean)
        return self.log_norm - 0.5 * float(np.dot(dev, dev))


class PolyaGammaGibbsKernel(CoupledKernel):
    def __init__(self, dataset: LogisticDataset):
        self.dataset = dataset
        self.x = np.asarray(dataset.covariates, dtype=float)
        # responses live on {-1, +1}; the conditional mean uses y01 - 1/2
        self.prior_prec = np.linalg.inv(np.asarray(dataset.prior_cov, dtype=float))
        y_shift = np.asarray(dataset.responses, dtype=float) / 2.0
        self.linear = self.x.T @ y_shift + self.prior_prec @ np.asarray(
            dataset.prior_mean, dtype=float
        )
        self.descriptor = f"pg-gibbs(n={dataset.n}, d={dataset.dim})"

    def _conditional(self, w: np.ndarray) -> _GaussianConditional:
        precision = self.x.T @ (self.x * w[:, None]) + self.prior_prec
        try:
            chol = np.linalg.cholesky(precision)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(
                f"beta conditional precision is not positive definite "
                f"(auxiliary range [{w.min():.3g}, {w.max():.3g}])"
            ) from exc
        mean = solve_triangular(
            chol.T, solve_triangular(chol, self.linear, lower=True), lower=False
        )
        return _GaussianConditional(mean, chol)

    def step_single(self, rng: RngStream, beta: np.ndarray) -> np.ndarray:
        c = np.abs(self.x @ beta)
        w = np.array([rng.polya_gamma(ci) for ci in c])
        return self._conditional(w).sample(rng)

    def step_pair(self, rng, beta_x, beta_y):
        cx = np.abs(self.x @ beta_x)
        cy = np.abs(self.x @ beta_y)
        n = cx.shape[0]
        wx = np.empty(n)
        wy = np.empty(n)
        for i in range(n):
            draw = maximal_coupling_logratio(
                rng,
                _PgSampler(cx[i]),
                _PgSampler(cy[i]),
                _PgLogRatio(cx[i], cy[i]),
            )
            wx[i] = draw.x
            wy[i] = draw.y
        cond_x = self._conditional(wx)
        cond_y = self._conditional(wy)
        draw = maximal_coupling(
            rng, cond_x.sample, cond_x.log_pdf, cond_y.sample, cond_y.log_pdf
        )
        return draw.x, draw.y


def pg_gibbs_coupled(dataset: LogisticDataset) -> PolyaGammaGibbsKernel:
    return PolyaGammaGibbsKernel(dataset)
