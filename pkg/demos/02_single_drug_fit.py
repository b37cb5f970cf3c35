"""Posterior for one drug: NUTS draws against a deterministic quadrature.

Fits the built-in historical data of drug B with the no-interaction model,
then compares posterior mean and sd of the DLT rate at each dose with a
two-dimensional trapezoid-rule integral over (log alpha, log beta).

Run with ``python3 demos/02_single_drug_fit.py`` (a few seconds).
"""
import numpy as np

from ddiblrm import CohortRecord, DrugSpec, ModelSpec, PriorSpec, SamplerConfig, prob, quadrature_posterior, run_mcmc
from ddiblrm.scenarios import HISTORICAL_DOSES, builtin_historical_data

spec = ModelSpec((DrugSpec("B", 200.0),))
data = [CohortRecord((c.doses[1],), c.n_patients, c.n_dlt) for c in builtin_historical_data() if c.doses[0] == 0]
for c in data:
    print(f"dose {c.doses[0]:5.0f}: {c.n_dlt}/{c.n_patients} DLT")

priors = PriorSpec.default(spec)
draws = run_mcmc(data, spec, priors, SamplerConfig(seed=1))
print(f"\nconverged={draws.converged} max R-hat={np.max(draws.rhat):.4f} "
      f"min ESS={np.min(draws.ess):.0f} divergences={draws.divergences}")

quad = quadrature_posterior(data, spec, priors, doses=HISTORICAL_DOSES)
pi = prob(spec, draws.draws, np.array(HISTORICAL_DOSES)[:, None])
print(f"\n{'dose':>6} {'mcmc mean':>10} {'quad mean':>10} {'mcmc sd':>8} {'quad sd':>8}")
for d, m, qm, s, qs in zip(HISTORICAL_DOSES, pi.mean(0), quad.prob_mean, pi.std(0), quad.prob_sd):
    print(f"{d:6.0f} {m:10.4f} {qm:10.4f} {s:8.4f} {qs:8.4f}")
