"""Deterministic tensor-grid quadrature of single-drug posteriors.

Serves as an independent check on the sampler: no random numbers and no
gradients, only the log-likelihood evaluated on a dense grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit, log_expit

from ..model import CohortRecord, InvalidInputError, ModelSpec, Variant
from .posterior import PriorSpec


class UnsupportedModelError(InvalidInputError):
    pass


@dataclass
class QuadratureSummary:
    mean: np.ndarray          # (log_alpha, log_beta)
    sd: np.ndarray
    doses: np.ndarray
    prob_mean: np.ndarray     # posterior mean of pi(d) per dose
    prob_sd: np.ndarray
    log_evidence: float


def _trapezoid_weights(x: np.ndarray) -> np.ndarray:
    w = np.empty_like(x)
    dx = np.diff(x)
    w[0], w[-1] = dx[0] / 2, dx[-1] / 2
    w[1:-1] = (dx[:-1] + dx[1:]) / 2
    return w


def quadrature_posterior(
    data: Sequence[CohortRecord],
    spec: ModelSpec,
    priors: PriorSpec,
    doses: Sequence[float] = (),
    n_nodes: int = 401,
    width: float = 6.0,
) -> QuadratureSummary:
    """Posterior moments of a single-drug model by the trapezoid rule.

    The grid spans ``prior mean +/- width * prior sd`` on both
    ``log_alpha`` and ``log_beta`` with ``n_nodes`` points per axis.
    """
    if spec.n_params > 3:
        raise UnsupportedModelError(f"quadrature supports at most 3 parameters, model has {spec.n_params}")
    if spec.n_drugs != 1 or spec.variant is not Variant.NO_INTERACTION:
        raise UnsupportedModelError("quadrature is implemented for single-drug models only")
    if n_nodes < 400:
        raise InvalidInputError("use at least 400 nodes per axis")
    mu, sd = priors.to_arrays(spec)
    axes = [np.linspace(m - width * s, m + width * s, n_nodes) for m, s in zip(mu, sd)]
    la, lb = np.meshgrid(*axes, indexing="ij")
    beta = np.exp(lb)

    logpost = -0.5 * (((la - mu[0]) / sd[0]) ** 2 + ((lb - mu[1]) / sd[1]) ** 2)
    for c in data:
        if c.n_patients == 0:
            continue
        d = c.doses[0]
        if d == 0:
            if c.n_dlt:
                raise InvalidInputError("zero-dose cohort with DLTs")
            continue
        z = la + beta * np.log(d / spec.drugs[0].ref_dose)
        logpost = logpost + c.n_dlt * log_expit(z) + (c.n_patients - c.n_dlt) * log_expit(-z)

    w = np.outer(*[_trapezoid_weights(a) for a in axes])
    shift = logpost.max()
    dens = np.exp(logpost - shift) * w
    norm = dens.sum()
    if not (np.isfinite(norm) and norm > 0):
        raise ArithmeticError("posterior normalization constant is not finite and positive")
    dens /= norm

    def moments(f):
        m = float(np.sum(dens * f))
        return m, float(np.sqrt(max(np.sum(dens * (f - m) ** 2), 0.0)))

    ma, sa = moments(la)
    mb, sb = moments(lb)
    doses = np.asarray(doses, dtype=float)
    pm, ps = [], []
    for d in doses:
        if d == 0:
            pm.append(0.0), ps.append(0.0)
            continue
        m, s = moments(expit(la + beta * np.log(d / spec.drugs[0].ref_dose)))
        pm.append(m), ps.append(s)
    log_ev = float(np.log(norm) + shift - np.sum(np.log(sd)) - np.log(2 * np.pi))
    return QuadratureSummary(np.array([ma, mb]), np.array([sa, sb]), doses, np.array(pm), np.array(ps), log_ev)
