"""Coupled MCMC kernels: marginal step plus faithful joint step."""

from .base import CoupledKernel
from .continuous import (
    HmcKernel,
    LangevinKernel,
    RandomWalkMhKernel,
    hmc_coupled,
    mala_coupled,
    rwmh_coupled,
    ula_coupled,
)
from .gibbs import PolyaGammaGibbsKernel, pg_gibbs_coupled
from .ising import (
    ParallelTemperingKernel,
    SingleSiteGibbsKernel,
    pt_coupled,
    ssg_coupled,
)
from .pimh import PimhKernel, PimhState, pimh_coupled

__all__ = [
    "CoupledKernel",
    "rwmh_coupled",
    "mala_coupled",
    "ula_coupled",
    "hmc_coupled",
    "pg_gibbs_coupled",
    "ssg_coupled",
    "pt_coupled",
    "pimh_coupled",
    "PimhState",
    "RandomWalkMhKernel",
    "LangevinKernel",
    "HmcKernel",
    "PolyaGammaGibbsKernel",
    "SingleSiteGibbsKernel",
    "ParallelTemperingKernel",
    "PimhKernel",
]
