"""Numerical certification of interaction-model properties.

Six properties are checked for each model variant:

========================  =====================================================
ZeroDoseReduction         a zero dose reproduces the model without that drug
IndependenceReduction     neutral interaction parameters reproduce pi_perp
AsymptoticToxicity        pi -> 1 when any dose -> infinity, for any interaction
SynergyOrdering           one positive interaction term gives pi > pi_perp
AntagonismOrdering        one negative interaction term gives pi < pi_perp
NonMonotonicity           some parameters give a local decrease in pi
========================  =====================================================

Random checks draw parameters with ``numpy.random.default_rng(seed)``:
``log_alpha ~ U(-3, 1)``, ``log_beta ~ U(-0.25, 0.5)``, ``eta ~ U(-4, 4)``,
``log_alpha3 ~ U(-6, 1)``, ``log_beta3 ~ U(-0.5, 0.5)`` and doses
``ref_dose * 2**U(-4, 4)``. Every failed report carries a witness with the
seed and the exact inputs, which :func:`replay_witness` re-evaluates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from .model import DrugSpec, ModelSpec, Variant, drop_drug, prob

VARIANT_ORDER = (Variant.NO_INTERACTION, Variant.THALL, Variant.LINEAR, Variant.SATURATING)

ZERO_DOSE_TOL = 1e-12
ASYMPTOTIC_THRESHOLD = 1 - 1e-3
LADDER_STEPS = 40
MONOTONE_TOL = 1e-9
NONMONOTONE_ETAS = (-0.5, -1.0, -2.0, -4.0)


class Property(str, Enum):
    ZERO_DOSE_REDUCTION = "ZeroDoseReduction"
    INDEPENDENCE_REDUCTION = "IndependenceReduction"
    ASYMPTOTIC_TOXICITY = "AsymptoticToxicity"
    SYNERGY_ORDERING = "SynergyOrdering"
    ANTAGONISM_ORDERING = "AntagonismOrdering"
    NON_MONOTONICITY = "NonMonotonicity"


PROPERTY_LABELS = {
    Property.ZERO_DOSE_REDUCTION: "Model reduces to lower-order model at 0 dose",
    Property.INDEPENDENCE_REDUCTION: "Model compatible with no-interaction model",
    Property.ASYMPTOTIC_TOXICITY: "pi -> 1 as d -> infinity",
    Property.SYNERGY_ORDERING: "Can model synergistic drug-drug interactions",
    Property.ANTAGONISM_ORDERING: "Can model antagonistic drug-drug interactions",
    Property.NON_MONOTONICITY: "Can model non-monotonic antagonistic interactions",
}

#: Expected pass/fail matrix, ``EXPECTED_MATRIX[property][variant]``.
EXPECTED_MATRIX: dict[Property, dict[Variant, bool]] = {
    Property.ZERO_DOSE_REDUCTION: dict.fromkeys(VARIANT_ORDER, True),
    Property.INDEPENDENCE_REDUCTION: dict.fromkeys(VARIANT_ORDER, True),
    Property.ASYMPTOTIC_TOXICITY: {
        Variant.NO_INTERACTION: True, Variant.THALL: True, Variant.LINEAR: False, Variant.SATURATING: True,
    },
    Property.SYNERGY_ORDERING: {
        Variant.NO_INTERACTION: False, Variant.THALL: True, Variant.LINEAR: True, Variant.SATURATING: True,
    },
    Property.ANTAGONISM_ORDERING: {
        Variant.NO_INTERACTION: False, Variant.THALL: True, Variant.LINEAR: True, Variant.SATURATING: True,
    },
    Property.NON_MONOTONICITY: {
        Variant.NO_INTERACTION: False, Variant.THALL: False, Variant.LINEAR: True, Variant.SATURATING: True,
    },
}


@dataclass
class PropertyReport:
    property_id: Property
    variant: Variant
    passed: bool
    tolerance: float
    witness: dict[str, Any] | None = None
    seed: int | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and self.witness is None:
            raise ValueError("failed property reports must carry a witness")


def _drugs(n: int) -> tuple[DrugSpec, ...]:
    refs = (200.0, 200.0, 100.0)
    return tuple(DrugSpec(f"drug{i + 1}", refs[i]) for i in range(n))


def _spec(variant: Variant, n: int) -> ModelSpec:
    return ModelSpec(_drugs(n), variant)


def _drug_counts(variant: Variant) -> tuple[int, ...]:
    return (2,) if variant is Variant.THALL else (2, 3)


def random_theta(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    theta = np.empty(spec.n_params)
    n = spec.n_drugs
    theta[0 : 2 * n : 2] = rng.uniform(-3.0, 1.0, n)
    theta[1 : 2 * n : 2] = rng.uniform(-0.25, 0.5, n)
    if spec.variant is Variant.THALL:
        theta[4] = rng.uniform(-6.0, 1.0)
        theta[5] = rng.uniform(-0.5, 0.5)
    else:
        theta[2 * n :] = rng.uniform(-4.0, 4.0, len(spec.terms))
    return theta


def random_doses(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    return spec.ref_doses * 2.0 ** rng.uniform(-4.0, 4.0, spec.n_drugs)


def independence_theta(spec: ModelSpec, theta: np.ndarray) -> np.ndarray:
    """Interaction parameters set to their no-interaction values.

    ``eta = 0`` for logit-additive models; ``alpha3 = alpha1 * alpha2`` and
    ``beta3 = 1`` for the thall model, whose odds then factor as
    ``(1 + o1)(1 + o2) - 1``.
    """
    theta = np.array(theta, dtype=float)
    if spec.variant is Variant.THALL:
        theta[4] = theta[0] + theta[2]
        theta[5] = 0.0
    else:
        theta[2 * spec.n_drugs :] = 0.0
    return theta


def _perp(spec: ModelSpec, theta, doses) -> float:
    base = ModelSpec(spec.drugs, Variant.NO_INTERACTION)
    return float(prob(base, theta[: 2 * spec.n_drugs], doses))


def _witness(spec, theta, doses, seed, **extra) -> dict[str, Any]:
    return dict(
        variant=spec.variant.value, n_drugs=spec.n_drugs, seed=seed,
        theta=[float(x) for x in theta], doses=[float(x) for x in doses], **extra,
    )


def check_zero_dose_reduction(
    variant: Variant, n_random_trials: int = 200, tol: float = ZERO_DOSE_TOL, seed: int = 0
) -> PropertyReport:
    """Zero out each dose in turn and compare with the reduced model."""
    variant = Variant(variant)
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    for n in _drug_counts(variant):
        spec = _spec(variant, n)
        for trial in range(n_random_trials):
            theta, doses = random_theta(spec, rng), random_doses(spec, rng)
            for i in range(n):
                d0 = doses.copy()
                d0[i] = 0.0
                sub, sub_theta = drop_drug(spec, theta, i)
                diff = abs(float(prob(spec, theta, d0)) - float(prob(sub, sub_theta, np.delete(d0, i))))
                if diff > worst:
                    worst = diff
                if diff > tol and witness is None:
                    witness = _witness(spec, theta, d0, seed, trial=trial, dropped=i, abs_diff=diff)
    return PropertyReport(Property.ZERO_DOSE_REDUCTION, variant, witness is None, tol, witness, seed,
                          dict(max_abs_diff=worst))


def check_independence_reduction(
    variant: Variant, n_random_trials: int = 200, tol: float = ZERO_DOSE_TOL, seed: int = 0
) -> PropertyReport:
    """Neutral interaction parameters must reproduce the independence model."""
    variant = Variant(variant)
    rng = np.random.default_rng(seed)
    worst, witness = 0.0, None
    for n in _drug_counts(variant):
        spec = _spec(variant, n)
        for trial in range(n_random_trials):
            theta = independence_theta(spec, random_theta(spec, rng))
            doses = random_doses(spec, rng)
            diff = abs(float(prob(spec, theta, doses)) - _perp(spec, theta, doses))
            worst = max(worst, diff)
            if diff > tol and witness is None:
                witness = _witness(spec, theta, doses, seed, trial=trial, abs_diff=diff)
    return PropertyReport(Property.INDEPENDENCE_REDUCTION, variant, witness is None, tol, witness, seed,
                          dict(max_abs_diff=worst))


def doubling_ladder(ref_dose: float, steps: int = LADDER_STEPS) -> np.ndarray:
    return ref_dose * 2.0 ** np.arange(steps + 1)


def check_asymptotic_toxicity(
    variant: Variant,
    n_random_trials: int = 100,
    steps: int = LADDER_STEPS,
    threshold: float = ASYMPTOTIC_THRESHOLD,
    seed: int = 0,
) -> PropertyReport:
    """pi at the top of a doubling ladder (``2**steps * ref``) must reach ``threshold``.

    Two-drug models; each drug is escalated alone (the other held at a
    random positive dose) and both are escalated together. Besides random
    parameters, the fixed interaction values ``eta = -1, -2, -4`` (thall:
    ``alpha3 = alpha1 * alpha2 * exp(eta)``) are always included.
    """
    variant = Variant(variant)
    if steps < LADDER_STEPS:
        raise ValueError(f"the ladder needs at least {LADDER_STEPS} doubling steps")
    rng = np.random.default_rng(seed)
    spec = _spec(variant, 2)
    thetas = [random_theta(spec, rng) for _ in range(n_random_trials)]
    base = np.array([math.log(1 / 9), 0.0, math.log(1 / 9), 0.0])
    for eta in (-1.0, -2.0, -4.0):
        if variant is Variant.THALL:
            thetas.append(np.r_[base, base[0] + base[2] + eta, 0.0])
        elif variant is Variant.NO_INTERACTION:
            thetas.append(base.copy())
        else:
            thetas.append(np.r_[base, eta])
    worst, witness = 1.0, None
    for trial, theta in enumerate(thetas):
        fixed = random_doses(spec, rng)
        for mode in ("drug1", "drug2", "both"):
            ladder = np.column_stack([doubling_ladder(r, steps) for r in spec.ref_doses])
            if mode == "drug1":
                ladder[:, 1] = fixed[1]
            elif mode == "drug2":
                ladder[:, 0] = fixed[0]
            p = prob(spec, theta, ladder)
            top = float(p[-1])
            worst = min(worst, top)
            if top < threshold and witness is None:
                witness = _witness(spec, theta, ladder[-1], seed, trial=trial, escalated=mode, pi=top)
    return PropertyReport(Property.ASYMPTOTIC_TOXICITY, variant, witness is None, threshold, witness, seed,
                          dict(min_final_pi=worst, steps=steps))


def check_ordering(
    variant: Variant, sign: str, n_random_trials: int = 200, seed: int = 0
) -> PropertyReport:
    """Strict ordering against pi_perp with a single active interaction term.

    ``sign`` is ``"synergy"`` (pi > pi_perp) or ``"antagonism"`` (pi < pi_perp).
    Interaction magnitudes are ``U(0.1, 3)``; for thall the magnitude is the
    log-ratio ``log(alpha3 / (alpha1 alpha2))`` with ``beta3 = 1``.
    """
    variant = Variant(variant)
    if sign not in ("synergy", "antagonism"):
        raise ValueError(f"sign must be 'synergy' or 'antagonism', got {sign!r}")
    prop = Property.SYNERGY_ORDERING if sign == "synergy" else Property.ANTAGONISM_ORDERING
    if variant is Variant.NO_INTERACTION:
        return PropertyReport(prop, variant, False, 0.0, dict(reason="no interaction parameter"), seed)
    s = 1.0 if sign == "synergy" else -1.0
    rng = np.random.default_rng(seed)
    witness = None
    for n in _drug_counts(variant):
        spec = _spec(variant, n)
        for trial in range(n_random_trials):
            theta = independence_theta(spec, random_theta(spec, rng))
            doses = spec.ref_doses * 2.0 ** rng.uniform(-3.0, 3.0, n)
            mag = s * rng.uniform(0.1, 3.0)
            if variant is Variant.THALL:
                theta[4] += mag
            else:
                k = int(rng.integers(len(spec.terms)))
                theta[2 * n + k] = mag
            p, p0 = float(prob(spec, theta, doses)), _perp(spec, theta, doses)
            ok = p > p0 if s > 0 else p < p0
            if not ok and witness is None:
                witness = _witness(spec, theta, doses, seed, trial=trial, pi=p, pi_perp=p0)
    return PropertyReport(prop, variant, witness is None, 0.0, witness, seed)


def check_nonmonotonicity(variant: Variant, eps_fraction: float = 0.05) -> PropertyReport:
    """Search for ``pi(d + eps) < pi(d) - 1e-9`` with both doses increased.

    Deterministic grid: ``log_alpha`` in ``{logit(0.1), logit(0.3)}`` for both
    drugs, ``log_beta`` in ``{-0.5, 0}``, interaction ``eta`` in
    ``{-0.5, -1, -2, -4}`` (thall: ``log(alpha3 / (alpha1 alpha2))`` over the
    same values and ``log_beta3`` in ``{-0.5, 0, 0.5}``), doses
    ``ref * 2**k`` for ``k = -3..2`` and increments ``eps = eps_fraction * d``.
    """
    variant = Variant(variant)
    spec = _spec(variant, 2)
    refs = spec.ref_doses
    levels = 2.0 ** np.arange(-3, 3)
    d = np.array([(refs[0] * a, refs[1] * b) for a in levels for b in levels])
    d_eps = d * (1.0 + eps_fraction)
    thetas = []
    for la in (math.log(1 / 9), math.log(3 / 7)):
        for lb in (-0.5, 0.0):
            base = np.array([la, lb, la, lb])
            if variant is Variant.NO_INTERACTION:
                thetas.append(base)
            elif variant is Variant.THALL:
                thetas += [np.r_[base, 2 * la + eta, lb3] for eta in NONMONOTONE_ETAS for lb3 in (-0.5, 0.0, 0.5)]
            else:
                thetas += [np.r_[base, eta] for eta in NONMONOTONE_ETAS]
    thetas = np.array(thetas)
    p0 = prob(spec, thetas, d)
    p1 = prob(spec, thetas, d_eps)
    drop = p0 - p1
    idx = np.unravel_index(np.argmax(drop), drop.shape)
    if drop[idx] > MONOTONE_TOL:
        witness = _witness(spec, thetas[idx[0]], d[idx[1]], None,
                           doses_eps=[float(x) for x in d_eps[idx[1]]],
                           pi=float(p0[idx]), pi_eps=float(p1[idx]))
        return PropertyReport(Property.NON_MONOTONICITY, variant, True, MONOTONE_TOL, witness)
    return PropertyReport(
        Property.NON_MONOTONICITY, variant, False, MONOTONE_TOL,
        dict(reason="no local decrease found on the search grid", max_drop=float(drop[idx])),
    )


def replay_witness(witness: dict[str, Any]) -> float:
    """Re-evaluate pi at a witness' parameters and doses."""
    spec = _spec(Variant(witness["variant"]), witness["n_drugs"])
    return float(prob(spec, np.array(witness["theta"]), np.array(witness["doses"])))


def property_matrix(seed: int = 0, n_random_trials: int = 200) -> dict[Property, dict[Variant, PropertyReport]]:
    """Run every check for every variant."""
    out: dict[Property, dict[Variant, PropertyReport]] = {p: {} for p in Property}
    for v in VARIANT_ORDER:
        out[Property.ZERO_DOSE_REDUCTION][v] = check_zero_dose_reduction(v, n_random_trials, seed=seed)
        out[Property.INDEPENDENCE_REDUCTION][v] = check_independence_reduction(v, n_random_trials, seed=seed)
        out[Property.ASYMPTOTIC_TOXICITY][v] = check_asymptotic_toxicity(v, seed=seed)
        out[Property.SYNERGY_ORDERING][v] = check_ordering(v, "synergy", n_random_trials, seed=seed)
        out[Property.ANTAGONISM_ORDERING][v] = check_ordering(v, "antagonism", n_random_trials, seed=seed)
        out[Property.NON_MONOTONICITY][v] = check_nonmonotonicity(v)
    return out


def matrix_matches_expected(matrix) -> bool:
    return all(matrix[p][v].passed == EXPECTED_MATRIX[p][v] for p in Property for v in VARIANT_ORDER)


def render_matrix(matrix) -> str:
    """Plain-text table, one row per property and one column per variant."""
    headers = ["No interaction", "Thall", "Linear", "Saturating"]
    width = max(len(s) for s in PROPERTY_LABELS.values())
    lines = [" " * width + " | " + " | ".join(f"{h:^14}" for h in headers)]
    lines.append("-" * len(lines[0]))
    for p in Property:
        cells = ["pass" if matrix[p][v].passed else "FAIL" for v in VARIANT_ORDER]
        lines.append(f"{PROPERTY_LABELS[p]:>{width}} | " + " | ".join(f"{c:^14}" for c in cells))
    return "\n".join(lines)
