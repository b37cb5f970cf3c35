"""Likelihood, priors, posterior sampling and convergence diagnostics."""
from .diagnostics import effective_sample_size, mcse_mean, split_rhat
from .mcmc import ESS_MIN, RHAT_MAX, NonConvergenceError, PosteriorDraws, run_mcmc
from .nuts import SamplerConfig
from .posterior import (
    LOGIT_010,
    LogPosterior,
    PriorSpec,
    log_likelihood,
    log_posterior_and_gradient,
    log_prior,
)
from .quadrature import QuadratureSummary, UnsupportedModelError, quadrature_posterior

__all__ = [
    "ESS_MIN", "RHAT_MAX", "LOGIT_010",
    "NonConvergenceError", "PosteriorDraws", "SamplerConfig", "PriorSpec", "LogPosterior",
    "QuadratureSummary", "UnsupportedModelError",
    "run_mcmc", "log_likelihood", "log_prior", "log_posterior_and_gradient",
    "quadrature_posterior", "split_rhat", "effective_sample_size", "mcse_mean",
]
