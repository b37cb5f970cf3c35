"""Bayesian logistic dose-toxicity models for drug combinations.

The single-drug model is ``logit pi = log alpha + beta log(d / d*)``.
Combinations start from the independence model ``1 - prod(1 - pi_i)`` and
add interaction terms on the logit scale, either linear in the product of
normalized doses or bounded (saturating) in it; the thall variant is provided
for comparison.

Submodules
----------
model        dose-toxicity curves and interaction variants
inference    likelihood, priors, NUTS sampler, diagnostics, quadrature
decision     toxicity-interval probabilities and overdose control
properties   numerical certification of structural model properties
scenarios    built-in historical data and combination-trial scenarios
io           YAML configuration, cohort files and result tables
"""
from .decision import (
    DEFAULT_GRID_DOSES,
    IntervalSpec,
    SurfaceRow,
    default_grid,
    evaluate_grid,
    ewoc_satisfied,
    marginal_summary,
    toxicity_category_probs,
)
from .inference import (
    NonConvergenceError,
    PosteriorDraws,
    PriorSpec,
    SamplerConfig,
    effective_sample_size,
    log_likelihood,
    log_posterior_and_gradient,
    log_prior,
    quadrature_posterior,
    run_mcmc,
    split_rhat,
)
from .model import (
    CohortRecord,
    DrugSpec,
    InvalidInputError,
    ModelSpec,
    ParameterVector,
    Variant,
    WrongVariantError,
    combined_prob,
    enumerate_interactions,
    gamma_linear,
    gamma_saturating,
    logit_prob,
    prob,
    prob_independent,
    single_drug_prob,
    thall_prob,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GRID_DOSES", "IntervalSpec", "SurfaceRow", "default_grid", "evaluate_grid",
    "ewoc_satisfied", "marginal_summary", "toxicity_category_probs",
    "NonConvergenceError", "PosteriorDraws", "PriorSpec", "SamplerConfig",
    "effective_sample_size", "log_likelihood", "log_posterior_and_gradient", "log_prior",
    "quadrature_posterior", "run_mcmc", "split_rhat",
    "CohortRecord", "DrugSpec", "InvalidInputError", "ModelSpec", "ParameterVector", "Variant",
    "WrongVariantError", "combined_prob", "enumerate_interactions", "gamma_linear",
    "gamma_saturating", "logit_prob", "prob", "prob_independent", "single_drug_prob", "thall_prob",
]
