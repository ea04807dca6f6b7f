"""Simulation-estimable upper bounds on MCMC convergence via lagged couplings.

Run two copies of a Markov chain, one started ``lag`` steps ahead, under a
joint kernel that makes them coincide exactly after a random meeting time.
The distribution of that meeting time (plus, for Wasserstein-type metrics,
the pre-meeting trajectories) turns into computable upper bounds on the
distance between the chain's time-t marginal and its invariant law.
"""

from .bounds import (
    BoundCurve,
    CensoredRecordsError,
    geometric_ceil_expectation,
    ipm_bound_curve,
    mixing_time,
    pimh_zhat_after_warmup,
    smc_bias_bound,
    smc_zhat_draw,
    tv_bound_curve,
    unbiased_estimator_h,
    unbiased_estimator_h_avg,
    w1_bound_curve,
)
from .couplings import (
    CoupledDraw,
    CouplingFailureError,
    discrete_maximal_coupling,
    maximal_coupling,
    maximal_coupling_logratio,
    reflection_maximal_gaussian,
)
from .kernels import (
    CoupledKernel,
    PimhState,
    hmc_coupled,
    mala_coupled,
    pg_gibbs_coupled,
    pimh_coupled,
    pt_coupled,
    rwmh_coupled,
    ssg_coupled,
    ula_coupled,
)
from .meeting import (
    ExperimentConfig,
    MeetingRecord,
    ReplicateError,
    run_replicates,
    sample_meeting,
)
from .rng import RngStream, derive_stream, pg_log_density_ratio, stream_for
from .targets import (
    ContinuousTarget,
    IsingState,
    LogisticDataset,
    SmcProposalSpec,
    ar1_mvn_target,
    bimodal_target,
    gaussian_importance_spec,
    ising_conditional,
    ising_energy,
    logistic_posterior,
    random_ising_state,
    smc_sampler_run,
    std_normal_target,
    synthetic_logistic_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCurve",
    "CensoredRecordsError",
    "ContinuousTarget",
    "CoupledDraw",
    "CoupledKernel",
    "CouplingFailureError",
    "ExperimentConfig",
    "IsingState",
    "LogisticDataset",
    "MeetingRecord",
    "PimhState",
    "ReplicateError",
    "RngStream",
    "SmcProposalSpec",
    "ar1_mvn_target",
    "bimodal_target",
    "derive_stream",
    "discrete_maximal_coupling",
    "gaussian_importance_spec",
    "geometric_ceil_expectation",
    "hmc_coupled",
    "ipm_bound_curve",
    "ising_conditional",
    "ising_energy",
    "logistic_posterior",
    "mala_coupled",
    "maximal_coupling",
    "maximal_coupling_logratio",
    "mixing_time",
    "pg_gibbs_coupled",
    "pg_log_density_ratio",
    "pimh_coupled",
    "pimh_zhat_after_warmup",
    "pt_coupled",
    "random_ising_state",
    "reflection_maximal_gaussian",
    "run_replicates",
    "rwmh_coupled",
    "sample_meeting",
    "smc_bias_bound",
    "smc_sampler_run",
    "smc_zhat_draw",
    "ssg_coupled",
    "std_normal_target",
    "stream_for",
    "synthetic_logistic_dataset",
    "tv_bound_curve",
    "ula_coupled",
    "unbiased_estimator_h",
    "unbiased_estimator_h_avg",
    "w1_bound_curve",
]
