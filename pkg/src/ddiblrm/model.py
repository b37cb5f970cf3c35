"""Dose-toxicity models for single drugs and drug combinations.

All models are evaluated on the logit scale and converted to probabilities
at the boundary. Four model variants are supported:

``none``
    Drugs cause DLTs independently; no interaction parameters.
``linear``
    Logit-additive interaction with ``gamma = prod(d_i / d_i*)``.
``saturating``
    Logit-additive interaction with ``gamma = 2 p / (1 + p)``,
    ``p = prod(d_i / d_i*)``. Bounded by 2, so single-drug toxicity always
    dominates at extreme doses.
``thall``
    Two-drug model of Thall et al. (2003) with interaction ``(alpha3, beta3)``.

Parameters are unconstrained: per drug ``log_alpha`` and ``log_beta``, then one
``eta`` per interaction term (or ``log_alpha3``, ``log_beta3`` for ``thall``).
The flat parameter vector is ordered
``[log_alpha_1, log_beta_1, ..., log_alpha_N, log_beta_N, extra...]``.

A zero dose means the drug is absent. Its single-drug probability is defined
as the limit value 0 and every interaction term containing it contributes 0,
so setting a dose to zero reproduces the lower-order model exactly.

Drug indices are 0-based throughout.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.special import expit, log_expit

__all__ = [
    "InvalidInputError",
    "WrongVariantError",
    "Variant",
    "DrugSpec",
    "ModelSpec",
    "ParameterVector",
    "CohortRecord",
    "enumerate_interactions",
    "single_drug_prob",
    "prob_independent",
    "gamma_linear",
    "gamma_saturating",
    "combined_prob",
    "thall_prob",
    "logit_prob",
    "prob",
    "drop_drug",
]


class InvalidInputError(ValueError):
    """Raised for malformed doses, parameters or model definitions."""


class WrongVariantError(InvalidInputError):
    """Raised when an operation is called with an unsupported model variant."""


class Variant(str, Enum):
    NO_INTERACTION = "none"
    LINEAR = "linear"
    SATURATING = "saturating"
    THALL = "thall"

    @property
    def is_logit_additive(self) -> bool:
        return self in (Variant.LINEAR, Variant.SATURATING)


@dataclass(frozen=True)
class DrugSpec:
    name: str
    ref_dose: float

    def __post_init__(self):
        if not self.name:
            raise InvalidInputError("drug name must be non-empty")
        if not (math.isfinite(self.ref_dose) and self.ref_dose > 0):
            raise InvalidInputError(f"ref_dose of drug {self.name!r} must be positive, got {self.ref_dose}")


def enumerate_interactions(n_drugs: int) -> list[tuple[int, ...]]:
    """All subsets of ``range(n_drugs)`` with at least two members.

    Ordered by subset size, then lexicographically. The result has
    ``2**n_drugs - n_drugs - 1`` entries.

    >>> enumerate_interactions(3)
    [(0, 1), (0, 2), (1, 2), (0, 1, 2)]
    """
    if not isinstance(n_drugs, (int, np.integer)) or n_drugs < 1:
        raise InvalidInputError(f"number of drugs must be a positive integer, got {n_drugs!r}")
    return [c for k in range(2, n_drugs + 1) for c in itertools.combinations(range(n_drugs), k)]


def _canonical_key(term: tuple[int, ...]):
    return (len(term), term)


@dataclass(frozen=True)
class ModelSpec:
    """Drugs, interaction variant and interaction terms of a model.

    ``terms`` defaults to every interaction for the logit-additive variants,
    to nothing for ``none`` and to the single pair for ``thall``. Explicit
    terms are sorted into canonical order.
    """

    drugs: tuple[DrugSpec, ...]
    variant: Variant = Variant.NO_INTERACTION
    terms: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        drugs = tuple(self.drugs)
        variant = Variant(self.variant)
        if not drugs:
            raise InvalidInputError("a model needs at least one drug")
        names = [d.name for d in drugs]
        if len(set(names)) != len(names):
            raise InvalidInputError(f"drug names must be unique, got {names}")
        n = len(drugs)

        if variant is Variant.THALL:
            if n != 2:
                raise InvalidInputError(f"the thall variant requires exactly 2 drugs, got {n}")
            if self.terms not in (None, ((0, 1),), [(0, 1)], [[0, 1]]):
                raise InvalidInputError("the thall variant has the fixed interaction term (0, 1)")
            terms = ((0, 1),)
        elif variant is Variant.NO_INTERACTION:
            if self.terms:
                raise InvalidInputError("the no-interaction variant takes no interaction terms")
            terms = ()
        elif self.terms is None:
            terms = tuple(enumerate_interactions(n))
        else:
            terms = []
            for t in self.terms:
                t = tuple(sorted(int(i) for i in t))
                if len(t) < 2 or len(set(t)) != len(t) or t[0] < 0 or t[-1] >= n:
                    raise InvalidInputError(f"invalid interaction term {t} for {n} drugs")
                terms.append(t)
            if len(set(terms)) != len(terms):
                raise InvalidInputError("interaction terms must be distinct")
            terms = tuple(sorted(terms, key=_canonical_key))

        object.__setattr__(self, "drugs", drugs)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "terms", terms)

    @property
    def n_drugs(self) -> int:
        return len(self.drugs)

    @property
    def drug_names(self) -> list[str]:
        return [d.name for d in self.drugs]

    @property
    def ref_doses(self) -> np.ndarray:
        return np.array([d.ref_dose for d in self.drugs], dtype=float)

    @property
    def n_params(self) -> int:
        if self.variant is Variant.THALL:
            return 6
        return 2 * self.n_drugs + len(self.terms)

    def term_label(self, term: tuple[int, ...]) -> str:
        return "*".join(self.drugs[i].name for i in term)

    @property
    def param_names(self) -> list[str]:
        names = []
        for d in self.drugs:
            names += [f"log_alpha[{d.name}]", f"log_beta[{d.name}]"]
        if self.variant is Variant.THALL:
            names += ["log_alpha3", "log_beta3"]
        else:
            names += [f"eta[{self.term_label(t)}]" for t in self.terms]
        return names

    def term_mask(self) -> np.ndarray:
        """Boolean ``(K, N)`` membership matrix of the interaction terms."""
        mask = np.zeros((len(self.terms), self.n_drugs), dtype=bool)
        for k, t in enumerate(self.terms):
            mask[k, list(t)] = True
        return mask


@dataclass
class ParameterVector:
    """Unconstrained model parameters.

    ``eta`` holds one entry per interaction term of a logit-additive model;
    ``log_alpha3``/``log_beta3`` are only used by the thall variant.
    """

    log_alpha: np.ndarray
    log_beta: np.ndarray
    eta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    log_alpha3: float | None = None
    log_beta3: float | None = None

    def __post_init__(self):
        self.log_alpha = np.atleast_1d(np.asarray(self.log_alpha, dtype=float))
        self.log_beta = np.atleast_1d(np.asarray(self.log_beta, dtype=float))
        self.eta = np.atleast_1d(np.asarray(self.eta, dtype=float))

    def to_array(self, spec: ModelSpec) -> np.ndarray:
        n = spec.n_drugs
        if self.log_alpha.shape != (n,) or self.log_beta.shape != (n,):
            raise InvalidInputError(f"expected {n} log_alpha and log_beta entries")
        out = np.empty(spec.n_params)
        out[0 : 2 * n : 2] = self.log_alpha
        out[1 : 2 * n : 2] = self.log_beta
        if spec.variant is Variant.THALL:
            if self.log_alpha3 is None or self.log_beta3 is None:
                raise InvalidInputError("thall parameters need log_alpha3 and log_beta3")
            out[4:] = (self.log_alpha3, self.log_beta3)
        else:
            if self.eta.shape != (len(spec.terms),):
                raise InvalidInputError(f"expected {len(spec.terms)} eta entries, got {self.eta.shape[0]}")
            out[2 * n :] = self.eta
        if not np.all(np.isfinite(out)):
            raise InvalidInputError("parameters must be finite")
        return out

    @classmethod
    def from_array(cls, spec: ModelSpec, theta) -> "ParameterVector":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (spec.n_params,):
            raise InvalidInputError(f"expected {spec.n_params} parameters, got shape {theta.shape}")
        n = spec.n_drugs
        if spec.variant is Variant.THALL:
            return cls(theta[0:4:2], theta[1:4:2], log_alpha3=float(theta[4]), log_beta3=float(theta[5]))
        return cls(theta[0 : 2 * n : 2], theta[1 : 2 * n : 2], eta=theta[2 * n :])


@dataclass(frozen=True)
class CohortRecord:
    """One observed cohort: ``n_dlt`` DLTs among ``n_patients`` at ``doses``."""

    doses: tuple[float, ...]
    n_patients: int
    n_dlt: int
    label: str = ""

    def __post_init__(self):
        doses = tuple(float(d) for d in self.doses)
        if any(not math.isfinite(d) or d < 0 for d in doses):
            raise InvalidInputError(f"doses must be finite and non-negative, got {doses}")
        if int(self.n_patients) != self.n_patients or int(self.n_dlt) != self.n_dlt:
            raise InvalidInputError("n_patients and n_dlt must be integers")
        if not 0 <= self.n_dlt <= self.n_patients:
            raise InvalidInputError(f"need 0 <= n_dlt <= n_patients, got {self.n_dlt}/{self.n_patients}")
        object.__setattr__(self, "doses", doses)
        object.__setattr__(self, "n_patients", int(self.n_patients))
        object.__setattr__(self, "n_dlt", int(self.n_dlt))


# --------------------------------------------------------------------------
# scalar building blocks


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("parameters must be finite")


def single_drug_prob(d: float, log_alpha: float, log_beta: float, ref_dose: float) -> float:
    """DLT probability of one drug, ``expit(log_alpha + beta * log(d / ref_dose))``.

    Returns exactly 0 at ``d == 0``.
    """
    _check_finite(d, log_alpha, log_beta, ref_dose)
    if d < 0:
        raise InvalidInputError(f"dose must be non-negative, got {d}")
    if ref_dose <= 0:
        raise InvalidInputError(f"ref_dose must be positive, got {ref_dose}")
    if d == 0:
        return 0.0
    return float(expit(log_alpha + math.exp(log_beta) * math.log(d / ref_dose)))


def prob_independent(doses, per_drug_params, drugs: Sequence[DrugSpec]) -> float:
    """DLT probability when every drug acts independently.

    ``per_drug_params`` is a sequence of ``(log_alpha, log_beta)`` pairs.
    Computed as ``-expm1(sum(log1p(-pi_i)))``.
    """
    doses = np.asarray(doses, dtype=float)
    if not (len(doses) == len(per_drug_params) == len(drugs)):
        raise InvalidInputError("doses, parameters and drugs must have equal length")
    log_surv = 0.0
    for d, (la, lb), drug in zip(doses, per_drug_params, drugs):
        p = single_drug_prob(d, la, lb, drug.ref_dose)
        log_surv += math.log1p(-p)
    return -math.expm1(log_surv)


def _normalized_log_doses(doses_s, refs_s):
    doses_s = np.asarray(doses_s, dtype=float)
    refs_s = np.asarray(refs_s, dtype=float)
    if doses_s.shape != refs_s.shape or doses_s.ndim != 1 or len(doses_s) < 2:
        raise InvalidInputError("need equal-length dose and reference lists with at least two entries")
    if np.any(~np.isfinite(refs_s)) or np.any(refs_s <= 0):
        raise InvalidInputError("reference doses must be positive")
    if np.any(~np.isfinite(doses_s)) or np.any(doses_s < 0):
        raise InvalidInputError("doses must be finite and non-negative")
    if np.any(doses_s == 0):
        return None
    return float(np.sum(np.log(doses_s / refs_s)))


def gamma_linear(doses_s, refs_s) -> float:
    """Linear interaction basis ``prod(d_i / d_i*)``; unbounded above."""
    s = _normalized_log_doses(doses_s, refs_s)
    return 0.0 if s is None else math.exp(s)


def gamma_saturating(doses_s, refs_s) -> float:
    """Saturating interaction basis ``2 p / (1 + p)`` with ``p = prod(d_i / d_i*)``.

    Evaluated as ``2 * expit(sum(log(d_i / d_i*)))``; lies in ``[0, 2)``.
    """
    s = _normalized_log_doses(doses_s, refs_s)
    return 0.0 if s is None else float(2.0 * expit(s))


# --------------------------------------------------------------------------
# vectorized evaluation

# below this magnitude, log(-expm1(S)) is evaluated through log(-S)
_SMALL_LOG_SURV = 1e-8


def _prepare_doses(spec: ModelSpec, doses) -> tuple[np.ndarray, np.ndarray]:
    doses = np.asarray(doses, dtype=float)
    if doses.ndim == 1:
        doses = doses[None, :]
    if doses.ndim != 2 or doses.shape[1] != spec.n_drugs:
        raise InvalidInputError(f"expected {spec.n_drugs} doses per combination, got shape {doses.shape}")
    if np.any(~np.isfinite(doses)) or np.any(doses < 0):
        raise InvalidInputError("doses must be finite and non-negative")
    active = doses > 0
    with np.errstate(divide="ignore"):
        lx = np.where(active, np.log(np.where(active, doses, 1.0) / spec.ref_doses), 0.0)
    return lx, active


def _log_softplus(z):
    # log(log1p(exp(z))), exact to double precision for very negative z
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(z < -37.0, z, np.log(np.logaddexp(0.0, np.maximum(z, -37.0))))


def log_prob_independent_terms(z: np.ndarray, active: np.ndarray):
    """Return ``(log pi_perp, log(1 - pi_perp))`` from per-drug logits ``z``.

    ``z`` and ``active`` broadcast to ``(..., N)``; inactive drugs are ignored.
    """
    zz = np.where(active, z, -np.inf)
    log_surv = np.sum(np.where(active, log_expit(-np.where(active, z, 0.0)), 0.0), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.log(-np.expm1(log_surv))
        # logsumexp of log(softplus(z_i)) gives log(-log_surv) without underflow
        lsp = np.where(active, _log_softplus(np.where(active, zz, 0.0)), -np.inf)
        log_neg_surv = np.logaddexp.reduce(lsp, axis=-1)
        small = log_neg_surv + np.log1p(-0.5 * np.exp(log_neg_surv))
    log_pi = np.where(log_neg_surv < math.log(_SMALL_LOG_SURV), small, direct)
    return log_pi, log_surv


def _unpack(spec: ModelSpec, theta: np.ndarray):
    n = spec.n_drugs
    la = theta[:, 0 : 2 * n : 2]
    lb = theta[:, 1 : 2 * n : 2]
    return la, lb, theta[:, 2 * n :]


def logit_prob(spec: ModelSpec, theta, doses) -> np.ndarray:
    """Logit of the DLT probability, vectorized over draws and doses.

    Parameters
    ----------
    spec : ModelSpec
    theta : array_like, shape (P,) or (S, P)
        Flat parameter vectors in canonical order.
    doses : array_like, shape (N,) or (M, N)

    Returns
    -------
    ndarray of shape (S, M); leading/trailing axes are dropped when the
    corresponding input was one-dimensional. ``-inf`` where every dose is 0.
    """
    theta = np.asarray(theta, dtype=float)
    single_theta = theta.ndim == 1
    theta = np.atleast_2d(theta)
    if theta.shape[1] != spec.n_params:
        raise InvalidInputError(f"expected {spec.n_params} parameters, got {theta.shape[1]}")
    if not np.all(np.isfinite(theta)):
        raise InvalidInputError("parameters must be finite")
    single_dose = np.asarray(doses).ndim == 1
    lx, active = _prepare_doses(spec, doses)

    la, lb, extra = _unpack(spec, theta)
    beta = np.exp(lb)
    # (S, M, N)
    z = la[:, None, :] + beta[:, None, :] * lx[None, :, :]
    z = np.where(active[None], z, -np.inf)

    if spec.variant is Variant.THALL:
        la3, b3 = extra[:, 0], np.exp(extra[:, 1])
        both = active[:, 0] & active[:, 1]
        log_u = beta[:, None, :] * lx[None, :, :]
        a3 = la3[:, None] + b3[:, None] * (log_u[..., 0] + log_u[..., 1])
        a3 = np.where(both[None], a3, -np.inf)
        out = np.logaddexp(np.logaddexp(z[..., 0], z[..., 1]), a3)
    else:
        log_pi, log_surv = log_prob_independent_terms(z, active[None])
        out = log_pi - log_surv
        if spec.terms:
            mask = spec.term_mask()
            gamma = _gamma_matrix(spec.variant, lx, active, mask)
            eta = extra
            with np.errstate(invalid="ignore"):
                contrib = eta[:, None, :] * gamma[None, :, :]
            contrib = np.where(eta[:, None, :] == 0, 0.0, contrib)
            with np.errstate(invalid="ignore"):
                out = out + contrib.sum(axis=-1)
            # an inactive combination stays at -inf
            out = np.where(np.isneginf(log_pi), -np.inf, out)

    if single_dose:
        out = out[:, 0]
    if single_theta:
        out = out[0]
    return out


def _gamma_matrix(variant: Variant, lx, active, mask) -> np.ndarray:
    """``(M, K)`` interaction basis for normalized log-doses ``lx``."""
    log_p = lx @ mask.T.astype(float)
    member_zero = (~active).astype(float) @ mask.T.astype(float) > 0
    if variant is Variant.LINEAR:
        with np.errstate(over="ignore"):
            g = np.exp(log_p)
    elif variant is Variant.SATURATING:
        g = 2.0 * expit(log_p)
    else:
        raise WrongVariantError(f"no interaction basis for variant {variant.value!r}")
    return np.where(member_zero, 0.0, g)


def prob(spec: ModelSpec, theta, doses) -> np.ndarray:
    """DLT probability; see :func:`logit_prob` for shapes."""
    return expit(logit_prob(spec, theta, doses))


def combined_prob(spec: ModelSpec, params: ParameterVector, doses) -> float:
    """DLT probability of a no-interaction or logit-additive model at one dose combination."""
    if spec.variant is Variant.THALL:
        raise WrongVariantError("combined_prob does not evaluate the thall variant; use thall_prob")
    doses = np.asarray(doses, dtype=float)
    if doses.shape != (spec.n_drugs,):
        raise InvalidInputError(f"expected {spec.n_drugs} doses, got {doses.shape}")
    return float(prob(spec, params.to_array(spec), doses))


def thall_prob(d1: float, d2: float, params: ParameterVector, refs=(1.0, 1.0)) -> float:
    """DLT probability of the two-drug Thall model.

    ``logit(pi) = log(a1 u1 + a2 u2 + a3 (u1 u2)**b3)`` with
    ``u_i = (d_i / d_i*)**b_i``.
    """
    refs = tuple(float(r) for r in refs)
    spec = ModelSpec((DrugSpec("d1", refs[0]), DrugSpec("d2", refs[1])), Variant.THALL)
    if d1 < 0 or d2 < 0:
        raise InvalidInputError("doses must be non-negative")
    return float(prob(spec, params.to_array(spec), [d1, d2]))


def drop_drug(spec: ModelSpec, theta, i: int) -> tuple[ModelSpec, np.ndarray]:
    """Lower-order model obtained by removing drug ``i``.

    Interaction terms containing ``i`` are dropped; the remaining parameters
    keep their values. ``theta`` may be ``(P,)`` or ``(S, P)``.
    """
    theta = np.asarray(theta, dtype=float)
    n = spec.n_drugs
    if n < 2:
        raise InvalidInputError("cannot drop the only drug of a model")
    if not 0 <= i < n:
        raise InvalidInputError(f"drug index {i} out of range")
    keep = [j for j in range(n) if j != i]
    drugs = tuple(spec.drugs[j] for j in keep)
    cols = [c for j in keep for c in (2 * j, 2 * j + 1)]
    if spec.variant is Variant.THALL or spec.variant is Variant.NO_INTERACTION:
        sub = ModelSpec(drugs, Variant.NO_INTERACTION)
        return sub, theta[..., cols]
    remap = {j: k for k, j in enumerate(keep)}
    kept_terms = [(k, t) for k, t in enumerate(spec.terms) if i not in t]
    if not kept_terms:
        sub = ModelSpec(drugs, Variant.NO_INTERACTION)
        return sub, theta[..., cols]
    new_terms = [tuple(remap[j] for j in t) for _, t in kept_terms]
    sub = ModelSpec(drugs, spec.variant, new_terms)
    # canonical order is preserved under the index remapping
    eta_cols = [2 * n + k for k, _ in kept_terms]
    order = sorted(range(len(new_terms)), key=lambda a: _canonical_key(new_terms[a]))
    return sub, theta[..., cols + [eta_cols[a] for a in order]]
