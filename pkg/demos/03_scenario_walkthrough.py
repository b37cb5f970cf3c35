"""Escalation decision after a first combination cohort.

Fits the 5/5@100 scenario (historical data plus 5 DLTs in 5 patients at
100 mg + 100 mg) under every model setting and prints the posterior
overdose probability at the combination dose together with the EWOC verdict
(overdose probability at most 0.25).

Run with ``python3 demos/03_scenario_walkthrough.py`` (about a minute).
"""
from ddiblrm import SamplerConfig
from ddiblrm.scenarios import get_scenario, run_scenario

scenario = get_scenario("5/5@100")
result = run_scenario(scenario, SamplerConfig(seed=1), marginal_flags=False)

print(f"scenario {scenario.id}: combination dose {scenario.combo_dose}")
print(f"{'setting':<16} {'P(overdose)':>12} {'EWOC':>6} {'admissible grid points':>24}")
for label, outcome in result.outcomes.items():
    f = outcome.flags
    print(f"{label:<16} {f['p_over_at_combo']:12.3f} {'ok' if f['ewoc_at_combo'] else 'no':>6} {f['n_ewoc_ok']:24d}")
