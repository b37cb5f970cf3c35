"""Shape of the two-drug toxicity surface under each interaction variant.

Walks both doses up a doubling ladder from the reference dose with a negative
(protective) interaction coefficient. The linear interaction drives the
combination toxicity towards zero even though each drug alone approaches
certain toxicity; under the saturating interaction the protective effect is
bounded, so the combination still tends to certain toxicity at high doses.

Run with ``python3 demos/01_interaction_shapes.py``.
"""
import math

import numpy as np

from ddiblrm import DrugSpec, ModelSpec, Variant, prob

la = math.log(0.1 / 0.9)  # 10% DLT at the reference dose
drugs = (DrugSpec("A", 200.0), DrugSpec("B", 200.0))
ladder = 200.0 * 2.0 ** np.arange(0, 12)
doses = np.column_stack([ladder, ladder])

# theta: (log alpha, log beta) per drug, then one interaction coefficient
theta = np.array([la, 0.0, la, 0.0, -1.0])
single = prob(ModelSpec(drugs[:1]), theta[:2], doses[:, :1])

print(f"{'dose':>8} {'single':>8} {'indep':>8} {'linear':>10} {'saturating':>10}")
indep = prob(ModelSpec(drugs, Variant.NO_INTERACTION), theta[:4], doses)
lin = prob(ModelSpec(drugs, Variant.LINEAR), theta, doses)
sat = prob(ModelSpec(drugs, Variant.SATURATING), theta, doses)
for d, p1, p0, pl, ps in zip(ladder, single, indep, lin, sat):
    print(f"{d:8.0f} {p1:8.4f} {p0:8.4f} {pl:10.2e} {ps:10.4f}")

# the thall model with log alpha3 = log alpha1 + log alpha2 and log beta3 = 0
# is independence on a product scale; check on a small grid
g = np.array([(a, b) for a in (25.0, 100.0, 400.0) for b in (25.0, 100.0, 400.0)])
th = np.array([la, 0.0, la, 0.0, 2 * la, 0.0])
gap = np.max(np.abs(prob(ModelSpec(drugs, Variant.THALL), th, g) - prob(ModelSpec(drugs), th[:4], g)))
print(f"\nthall vs independence, max abs difference: {gap:.1e}")
