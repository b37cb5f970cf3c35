"""Built-in historical data and the combination-trial data scenarios.

Two drugs, A and B, both with reference dose 200 mg. Historical single-drug
data are pooled with the first combination cohort (no between-trial
heterogeneity). Each scenario is fitted with seven model settings: the
no-interaction model, and the thall, linear and saturating models each with
a narrow and a wide interaction prior.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .decision import (
    DEFAULT_GRID_DOSES,
    IntervalSpec,
    SurfaceRow,
    default_grid,
    evaluate_grid,
    marginal_summary,
)
from .inference import PosteriorDraws, PriorSpec, SamplerConfig, run_mcmc
from .model import CohortRecord, DrugSpec, InvalidInputError, ModelSpec, Variant

REF_DOSE = 200.0
DRUGS = (DrugSpec("A", REF_DOSE), DrugSpec("B", REF_DOSE))
HISTORICAL_DOSES = (50.0, 100.0, 200.0, 300.0, 400.0, 600.0)
HISTORICAL = {
    0: (10, (0, 1, 1, 2, 3, 6)),
    1: (5, (0, 0, 1, 1, 1, 3)),
}
MARGINAL_TOLERANCE = 0.02

SIGMA_INTER = {"narrow": 0.5, "wide": 1.5}
THALL_SD = {"narrow": (0.5 * math.sqrt(2 * 2**2), 0.5), "wide": (math.sqrt(2 * 2**2), 1.0)}


@dataclass(frozen=True)
class VariantSetting:
    """A model variant together with its interaction-prior width."""

    label: str
    variant: Variant
    width: str | None = None

    def spec(self, drugs: Sequence[DrugSpec] = DRUGS) -> ModelSpec:
        return ModelSpec(tuple(drugs), self.variant)

    def priors(self, spec: ModelSpec) -> PriorSpec:
        if self.variant is Variant.THALL:
            return PriorSpec.default(spec, thall_sd=THALL_SD[self.width])
        if self.variant.is_logit_additive:
            return PriorSpec.default(spec, sigma_inter=SIGMA_INTER[self.width])
        return PriorSpec.default(spec)


VARIANT_SETTINGS = (
    VariantSetting("none", Variant.NO_INTERACTION),
    VariantSetting("thall_narrow", Variant.THALL, "narrow"),
    VariantSetting("thall_wide", Variant.THALL, "wide"),
    VariantSetting("linear_0.5", Variant.LINEAR, "narrow"),
    VariantSetting("linear_1.5", Variant.LINEAR, "wide"),
    VariantSetting("saturating_0.5", Variant.SATURATING, "narrow"),
    VariantSetting("saturating_1.5", Variant.SATURATING, "wide"),
)


@dataclass(frozen=True)
class ScenarioDef:
    id: str
    use_historical: bool
    combo_dose: tuple[float, float] | None = None
    combo_n: int | None = None
    combo_dlt: int | None = None
    model_variants: tuple[VariantSetting, ...] = VARIANT_SETTINGS

    def __post_init__(self):
        combo = (self.combo_dose, self.combo_n, self.combo_dlt)
        if any(c is None for c in combo) and any(c is not None for c in combo):
            raise InvalidInputError(f"scenario {self.id}: combination fields must be all present or all absent")

    @property
    def has_combo(self) -> bool:
        return self.combo_dose is not None

    @property
    def slug(self) -> str:
        """Filesystem-safe identifier, e.g. ``5of5_at_200`` for ``5/5@200``."""
        return self.id.replace("/", "of").replace("@", "_at_")

    def data(self) -> list[CohortRecord]:
        out = builtin_historical_data() if self.use_historical else []
        if self.has_combo:
            out.append(CohortRecord(self.combo_dose, self.combo_n, self.combo_dlt, "trial"))
        return out


def builtin_historical_data() -> list[CohortRecord]:
    """Single-drug DLT data for drugs A (10 patients per dose) and B (5 per dose)."""
    out = []
    for i, (n, dlts) in HISTORICAL.items():
        for d, r in zip(HISTORICAL_DOSES, dlts):
            doses = [0.0, 0.0]
            doses[i] = d
            out.append(CohortRecord(tuple(doses), n, r, f"historical-drug-{i + 1}"))
    return out


def builtin_scenarios() -> list[ScenarioDef]:
    return [
        ScenarioDef("prior", use_historical=False),
        ScenarioDef("historical", use_historical=True),
        ScenarioDef("0/5@200", True, (200.0, 200.0), 5, 0),
        ScenarioDef("5/5@200", True, (200.0, 200.0), 5, 5),
        ScenarioDef("5/5@100", True, (100.0, 100.0), 5, 5),
    ]


def get_scenario(key: str) -> ScenarioDef:
    for s in builtin_scenarios():
        if key in (s.id, s.slug):
            return s
    raise InvalidInputError(f"unknown scenario {key!r}")


def variant_seed(master_seed: int, setting_index: int) -> int:
    """Sampler seed of one variant setting, shared by all scenarios."""
    ss = np.random.SeedSequence([int(master_seed), int(setting_index)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class VariantOutcome:
    setting: VariantSetting
    spec: ModelSpec
    draws: PosteriorDraws
    surface: list[SurfaceRow]
    marginals: dict[str, list[SurfaceRow]]
    flags: dict = field(default_factory=dict)


@dataclass
class ScenarioResult:
    scenario: ScenarioDef
    outcomes: dict[str, VariantOutcome]


def fit_setting(
    setting: VariantSetting,
    data: Sequence[CohortRecord],
    sampler: SamplerConfig,
    setting_index: int,
) -> tuple[ModelSpec, PosteriorDraws]:
    spec = setting.spec()
    cfg = SamplerConfig(**{**sampler.__dict__, "seed": variant_seed(sampler.seed, setting_index)})
    return spec, run_mcmc(data, spec, setting.priors(spec), cfg)


def _marginal_means(spec, draws) -> np.ndarray:
    return np.array([
        [row.mean_pi for row in marginal_summary(draws, spec, i, HISTORICAL_DOSES, force=True)]
        for i in range(spec.n_drugs)
    ])


def run_scenario(
    scenario: ScenarioDef,
    sampler: SamplerConfig | None = None,
    intervals: IntervalSpec = IntervalSpec(),
    reference: ScenarioResult | None = None,
    force: bool = False,
    marginal_flags: bool = True,
) -> ScenarioResult:
    """Fit every variant setting of ``scenario`` and summarize the posteriors.

    Flags per setting:

    ``ewoc_at_combo``
        EWOC status at the combination dose (``None`` without a combination cohort).
    ``marginal_preserved``
        Marginal posterior mean pi of both drugs over the historical dose
        ladder stays within 0.02 of the historical-only fit. Needs the
        historical-only fit, taken from ``reference`` or fitted here.
    ``n_ewoc_ok``
        Number of EWOC-admissible points on the default grid.

    ``marginal_flags=False`` skips the historical-only reference fit and
    leaves ``marginal_preserved`` unset.

    Raises :class:`NonConvergenceError` naming the setting unless ``force``.
    """
    sampler = sampler or SamplerConfig()
    grid = default_grid(2, DEFAULT_GRID_DOSES)
    data = scenario.data()
    needs_reference = marginal_flags and scenario.use_historical and scenario.has_combo
    if needs_reference and reference is None:
        reference = run_scenario(get_scenario("historical"), sampler, intervals, force=force)

    outcomes = {}
    for k, setting in enumerate(VARIANT_SETTINGS):
        if setting not in scenario.model_variants:
            continue
        spec, draws = fit_setting(setting, data, sampler, k)
        draws.require_converged(force, what=f"scenario {scenario.id}, variant {setting.label}")
        surface = evaluate_grid(draws, spec, grid, intervals, force=True)
        marginals = {
            d.name: marginal_summary(draws, spec, i, DEFAULT_GRID_DOSES, intervals, force=True)
            for i, d in enumerate(spec.drugs)
        }
        flags = dict(
            converged=draws.converged,
            max_rhat=float(np.max(draws.rhat)),
            min_ess=float(np.min(draws.ess)),
            divergences=draws.divergences,
            n_ewoc_ok=sum(r.ewoc_ok for r in surface),
            ewoc_at_combo=None,
            p_over_at_combo=None,
            marginal_max_diff=None,
            marginal_preserved=None,
        )
        if scenario.has_combo:
            row = evaluate_grid(draws, spec, [scenario.combo_dose], intervals, force=True)[0]
            flags.update(ewoc_at_combo=row.ewoc_ok, p_over_at_combo=row.p_over)
        if needs_reference:
            ref = reference.outcomes[setting.label]
            diff = np.max(np.abs(_marginal_means(spec, draws) - _marginal_means(ref.spec, ref.draws)))
            flags.update(marginal_max_diff=float(diff), marginal_preserved=bool(diff <= MARGINAL_TOLERANCE))
        outcomes[setting.label] = VariantOutcome(setting, spec, draws, surface, marginals, flags)
    return ScenarioResult(scenario, outcomes)


def run_all(
    sampler: SamplerConfig | None = None,
    intervals: IntervalSpec = IntervalSpec(),
    scenarios: Sequence[ScenarioDef] | None = None,
    force: bool = False,
) -> list[ScenarioResult]:
    """Run scenarios in order, fitting the historical-only reference once."""
    scenarios = list(scenarios or builtin_scenarios())
    reference = None
    results = []
    for s in scenarios:
        if s.use_historical and s.has_combo and reference is None:
            hist = next((r for r in results if r.scenario.id == "historical"), None)
            reference = hist or run_scenario(get_scenario("historical"), sampler, intervals, force=force)
        result = run_scenario(s, sampler, intervals, reference, force)
        if s.id == "historical":
            reference = result
        results.append(result)
    return results
