"""Binomial log-likelihood, normal priors and the analytic log-posterior gradient."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit, log_expit

from ..model import (
    CohortRecord,
    InvalidInputError,
    ModelSpec,
    ParameterVector,
    Variant,
    _gamma_matrix,
    _prepare_doses,
    log_prob_independent_terms,
    logit_prob,
)

LOGIT_010 = math.log(0.1 / 0.9)
LOG_2PI = math.log(2.0 * math.pi)

Normal = tuple[float, float]


def _check_normal(name: str, value) -> Normal:
    mean, sd = (float(v) for v in value)
    if not math.isfinite(mean):
        raise InvalidInputError(f"{name}: mean must be finite")
    if not (math.isfinite(sd) and sd > 0):
        raise InvalidInputError(f"{name}: sd must be positive, got {sd}")
    return mean, sd


@dataclass
class PriorSpec:
    """Independent normal priors on every unconstrained parameter.

    ``log_alpha`` and ``log_beta`` hold one ``(mean, sd)`` pair per drug,
    ``eta`` one pair per interaction term. The thall variant uses
    ``log_alpha3`` and ``log_beta3`` instead of ``eta``.
    """

    log_alpha: list[Normal]
    log_beta: list[Normal]
    eta: list[Normal] = field(default_factory=list)
    log_alpha3: Normal | None = None
    log_beta3: Normal | None = None

    def __post_init__(self):
        self.log_alpha = [_check_normal("log_alpha", v) for v in self.log_alpha]
        self.log_beta = [_check_normal("log_beta", v) for v in self.log_beta]
        self.eta = [_check_normal("eta", v) for v in self.eta]
        if self.log_alpha3 is not None:
            self.log_alpha3 = _check_normal("log_alpha3", self.log_alpha3)
        if self.log_beta3 is not None:
            self.log_beta3 = _check_normal("log_beta3", self.log_beta3)

    @classmethod
    def default(
        cls,
        spec: ModelSpec,
        sigma_inter: float | None = None,
        thall_sd: tuple[float, float] | None = None,
    ) -> "PriorSpec":
        """Weakly informative defaults: 10% mean toxicity at the reference dose.

        ``log_alpha ~ N(logit(0.1), 2^2)``, ``log_beta ~ N(0, 1)``,
        ``eta ~ N(0, sigma_inter^2)`` and for thall
        ``log_alpha3 ~ N(2 logit(0.1), sd_a3^2)``, ``log_beta3 ~ N(0, sd_b3^2)``.
        The interaction widths have no default and must be given when needed.
        """
        n = spec.n_drugs
        kwargs = dict(log_alpha=[(LOGIT_010, 2.0)] * n, log_beta=[(0.0, 1.0)] * n)
        if spec.variant is Variant.THALL:
            if thall_sd is None:
                raise InvalidInputError("thall priors need (sd_log_alpha3, sd_log_beta3)")
            kwargs.update(log_alpha3=(2 * LOGIT_010, thall_sd[0]), log_beta3=(0.0, thall_sd[1]))
        elif spec.terms:
            if sigma_inter is None:
                raise InvalidInputError("interaction models need sigma_inter")
            kwargs.update(eta=[(0.0, sigma_inter)] * len(spec.terms))
        return cls(**kwargs)

    def to_arrays(self, spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
        """Prior means and sds in canonical parameter order."""
        n = spec.n_drugs
        if len(self.log_alpha) != n or len(self.log_beta) != n:
            raise InvalidInputError(f"priors need {n} log_alpha and log_beta entries")
        pairs = []
        for a, b in zip(self.log_alpha, self.log_beta):
            pairs += [a, b]
        if spec.variant is Variant.THALL:
            if self.log_alpha3 is None or self.log_beta3 is None:
                raise InvalidInputError("thall priors need log_alpha3 and log_beta3")
            pairs += [self.log_alpha3, self.log_beta3]
        else:
            if len(self.eta) != len(spec.terms):
                raise InvalidInputError(f"priors need {len(spec.terms)} eta entries, got {len(self.eta)}")
            pairs += self.eta
        arr = np.array(pairs, dtype=float).reshape(-1, 2)
        return arr[:, 0].copy(), arr[:, 1].copy()


def _as_theta(spec: ModelSpec, params) -> np.ndarray:
    if isinstance(params, ParameterVector):
        return params.to_array(spec)
    theta = np.asarray(params, dtype=float)
    if theta.shape != (spec.n_params,):
        raise InvalidInputError(f"expected {spec.n_params} parameters, got shape {theta.shape}")
    return theta


def _cohort_arrays(data: Sequence[CohortRecord], n_drugs: int):
    if any(len(c.doses) != n_drugs for c in data):
        raise InvalidInputError(f"every cohort needs {n_drugs} doses")
    doses = np.array([c.doses for c in data], dtype=float).reshape(len(data), n_drugs)
    n = np.array([c.n_patients for c in data], dtype=float)
    r = np.array([c.n_dlt for c in data], dtype=float)
    return doses, n, r


def _binomial_loglik(logit, n, r):
    with np.errstate(invalid="ignore"):
        hit = np.where(r > 0, r * log_expit(logit), 0.0)
        miss = np.where(n - r > 0, (n - r) * log_expit(-logit), 0.0)
    return hit + miss


def log_likelihood(data: Sequence[CohortRecord], spec: ModelSpec, params) -> float:
    """Binomial log-likelihood without the binomial coefficients.

    Returns ``-inf`` if a cohort with DLTs has a modelled probability of 0.
    """
    theta = _as_theta(spec, params)
    if not data:
        return 0.0
    doses, n, r = _cohort_arrays(data, spec.n_drugs)
    return float(np.sum(_binomial_loglik(logit_prob(spec, theta, doses), n, r)))


def log_prior(params, priors: PriorSpec, spec: ModelSpec) -> float:
    """Sum of normal log-densities, normalizing constants included."""
    theta = _as_theta(spec, params)
    mu, sd = priors.to_arrays(spec)
    z = (theta - mu) / sd
    return float(np.sum(-0.5 * z * z - np.log(sd) - 0.5 * LOG_2PI))


class LogPosterior:
    """Unnormalized log-posterior and its gradient for fixed data and priors.

    Dose-dependent quantities are precomputed, so each call only costs a
    handful of vector operations over the cohorts. Calling the object
    returns ``(logp, grad)``; ``logp`` is ``-inf`` (with a zero gradient)
    whenever the evaluation is not finite.
    """

    def __init__(self, data: Sequence[CohortRecord], spec: ModelSpec, priors: PriorSpec):
        self.spec = spec
        self.prior_mean, self.prior_sd = priors.to_arrays(spec)
        self._prior_prec = 1.0 / self.prior_sd**2
        self._prior_const = float(np.sum(-np.log(self.prior_sd) - 0.5 * LOG_2PI))
        doses, n, r = _cohort_arrays(list(data), spec.n_drugs)
        keep = n > 0
        doses, n, r = doses[keep], n[keep], r[keep]
        lx, active = _prepare_doses(spec, doses) if len(doses) else (np.zeros((0, spec.n_drugs)), np.zeros((0, spec.n_drugs), bool))
        if np.any(r[~active.any(axis=1)] > 0):
            raise InvalidInputError("a cohort with all doses zero cannot have DLTs")
        # cohorts with no drug at all have pi = 0 and contribute nothing
        any_active = active.any(axis=1)
        self.lx, self.active = lx[any_active], active[any_active]
        self.n, self.r = n[any_active], r[any_active]
        self.n_drugs = spec.n_drugs
        if spec.variant.is_logit_additive and spec.terms:
            self.gamma = _gamma_matrix(spec.variant, self.lx, self.active, spec.term_mask())
        else:
            self.gamma = np.zeros((len(self.n), 0))
        if spec.variant is Variant.THALL:
            self.both = self.active[:, 0] & self.active[:, 1]

    @property
    def dim(self) -> int:
        return self.spec.n_params

    def log_prior(self, theta):
        d = theta - self.prior_mean
        return -0.5 * float(np.sum(d * d * self._prior_prec)) + self._prior_const, -d * self._prior_prec

    def __call__(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        lp, grad = self.log_prior(theta)
        if len(self.n):
            # extreme proposals may overflow; they are rejected below
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                if self.spec.variant is Variant.THALL:
                    ll, g = self._thall(theta)
                else:
                    ll, g = self._additive(theta)
            lp += ll
            grad = grad + g
        if not (math.isfinite(lp) and np.all(np.isfinite(grad))):
            return -math.inf, np.zeros_like(theta)
        return lp, grad

    def _additive(self, theta):
        nd = self.n_drugs
        la = theta[0 : 2 * nd : 2]
        beta = np.exp(theta[1 : 2 * nd : 2])
        eta = theta[2 * nd :]
        act = self.active
        blx = beta * self.lx
        z = np.where(act, la + blx, -np.inf)
        log_pi_perp, log_surv = log_prob_independent_terms(z, act)
        logit = log_pi_perp - log_surv
        if eta.size:
            logit = logit + self.gamma @ eta
        ll = float(np.sum(_binomial_loglik(logit, self.n, self.r)))
        w = self.r - self.n * expit(logit)
        # d logit / d z_i = pi_i / pi_perp
        with np.errstate(invalid="ignore"):
            dz = np.where(act, np.exp(log_expit(z) - log_pi_perp[:, None]), 0.0)
        wdz = w[:, None] * dz
        g = np.empty_like(theta)
        g[0 : 2 * nd : 2] = wdz.sum(axis=0)
        g[1 : 2 * nd : 2] = (wdz * blx).sum(axis=0)
        g[2 * nd :] = w @ self.gamma
        return ll, g

    def _thall(self, theta):
        la = theta[0:4:2]
        beta = np.exp(theta[1:4:2])
        la3, b3 = theta[4], math.exp(theta[5])
        act = self.active
        blx = beta * self.lx
        a12 = np.where(act, la + blx, -np.inf)
        log_u = blx[:, 0] + blx[:, 1]
        a3 = np.where(self.both, la3 + b3 * log_u, -np.inf)
        a = np.column_stack([a12, a3])
        logit = np.logaddexp.reduce(a, axis=1)
        ll = float(np.sum(_binomial_loglik(logit, self.n, self.r)))
        w = self.r - self.n * expit(logit)
        sm = np.exp(a - logit[:, None])
        g = np.empty_like(theta)
        g[0:4:2] = w @ sm[:, :2]
        g[1:4:2] = w @ (sm[:, :2] * blx + sm[:, 2:3] * b3 * blx)
        g[4] = w @ sm[:, 2]
        g[5] = w @ (sm[:, 2] * b3 * log_u)
        return ll, g


def log_posterior_and_gradient(data, spec: ModelSpec, priors: PriorSpec, params) -> tuple[float, np.ndarray]:
    """Unnormalized log-posterior and its exact gradient at ``params``."""
    return LogPosterior(data, spec, priors)(_as_theta(spec, params))
