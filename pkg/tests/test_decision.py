import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ddiblrm.decision import (
    DEFAULT_GRID_DOSES,
    IntervalSpec,
    category_probs_from_pi,
    default_grid,
    evaluate_grid,
    ewoc_satisfied,
    marginal_summary,
    toxicity_category_probs,
)
from ddiblrm.inference import NonConvergenceError, PosteriorDraws
from ddiblrm.model import DrugSpec, InvalidInputError, ModelSpec, Variant, prob

from conftest import two_drugs

ONE = ModelSpec((DrugSpec("A", 200.0),), Variant.NO_INTERACTION)


def draws_with_pi(values):
    """Single-drug draws giving the requested pi at the reference dose."""
    la = np.log(np.asarray(values) / (1 - np.asarray(values)))
    return np.column_stack([la, np.zeros_like(la)])


def test_category_examples():
    assert toxicity_category_probs(draws_with_pi([0.2] * 10), ONE, [200.0]) == (0.0, 1.0, 0.0)
    u, t, o = toxicity_category_probs(draws_with_pi([0.1, 0.2, 0.4] * 5), ONE, [200.0])
    assert (u, t, o) == pytest.approx((1 / 3, 1 / 3, 1 / 3), abs=1e-15)


def test_interval_boundaries():
    iv = IntervalSpec()
    pi = np.array([0.16, 0.33, np.nextafter(0.16, 0), np.nextafter(0.33, 0)])
    res = [category_probs_from_pi(pi[[k]], iv) for k in range(4)]
    assert res[0] == (0.0, 1.0, 0.0)
    assert res[1] == (0.0, 0.0, 1.0)
    assert res[2] == (1.0, 0.0, 0.0)
    assert res[3] == (0.0, 1.0, 0.0)


def test_ewoc_examples():
    assert ewoc_satisfied(0.25)
    assert not ewoc_satisfied(0.251)
    assert ewoc_satisfied(0.0)


@given(st.floats(0, 1), st.floats(0, 1))
def test_ewoc_monotone(a, b):
    lo, hi = sorted((a, b))
    assert ewoc_satisfied(hi) <= ewoc_satisfied(lo)


def test_interval_spec_validation():
    with pytest.raises(InvalidInputError):
        IntervalSpec(0.4, 0.33)
    with pytest.raises(InvalidInputError):
        IntervalSpec(feasibility=1.0)


def test_evaluate_grid_examples():
    rows = evaluate_grid(draws_with_pi([0.4] * 8), ONE, [[200.0]])
    assert rows[0].p_over == 1.0 and not rows[0].ewoc_ok
    with pytest.raises(InvalidInputError):
        evaluate_grid(draws_with_pi([0.4]), ONE, [])


def test_zero_dose_point_equals_marginal(rng):
    spec = two_drugs(Variant.SATURATING)
    theta = rng.normal(scale=0.5, size=(500, spec.n_params))
    row = evaluate_grid(theta, spec, [[0.0, 300.0]])[0]
    marg = marginal_summary(theta, spec, 1, [300.0])[0]
    assert row == marg
    assert marginal_summary(theta, spec, 0, [0.0])[0].p_under == 1.0


def test_thall_marginal_equals_single_drug(rng):
    spec = two_drugs(Variant.THALL)
    theta = rng.normal(scale=0.5, size=(300, spec.n_params))
    ladder = [50.0, 200.0, 600.0]
    rows = marginal_summary(theta, spec, 0, ladder)
    pi = prob(ONE, theta[:, :2], np.array(ladder)[:, None])
    np.testing.assert_allclose([r.mean_pi for r in rows], pi.mean(0), rtol=0, atol=1e-15)


def test_rows_partition_and_quantiles(rng):
    spec = two_drugs(Variant.LINEAR)
    theta = rng.normal(scale=0.7, size=(400, spec.n_params))
    grid = default_grid(2)
    rows = evaluate_grid(theta, spec, grid)
    pi = prob(spec, theta, grid)
    for m, r in enumerate(rows):
        assert abs(r.p_under + r.p_target + r.p_over - 1) <= 1e-12
        assert r.ewoc_ok == (r.p_over <= 0.25)
        assert r.q50 == np.quantile(pi[:, m], 0.5, method="linear")
        assert r.q025 <= r.q50 <= r.q975


def test_permutation_equivariant(rng):
    spec = two_drugs(Variant.SATURATING)
    theta = rng.normal(scale=0.5, size=(200, spec.n_params))
    grid = default_grid(2)
    perm = rng.permutation(len(grid))
    a = evaluate_grid(theta, spec, grid)
    b = evaluate_grid(theta, spec, grid[perm])
    assert [a[i] for i in perm] == b


@pytest.mark.parametrize("variant", [Variant.NO_INTERACTION, Variant.LINEAR, Variant.SATURATING])
def test_p_over_monotone_along_dose_rays(variant, rng):
    spec = two_drugs(variant)
    theta = rng.normal(scale=0.6, size=(300, spec.n_params))
    if spec.n_params > 4:
        theta[:, 4] = np.abs(theta[:, 4])  # positive interaction keeps pi monotone
    rows = evaluate_grid(theta, spec, default_grid(2))
    n = len(DEFAULT_GRID_DOSES)
    p_over = np.array([r.p_over for r in rows]).reshape(n, n)
    assert np.all(np.diff(p_over, axis=0) >= 0)
    assert np.all(np.diff(p_over, axis=1) >= 0)


def test_default_grid_order():
    g = default_grid(2, [0.0, 1.0, 2.0])
    assert g.tolist()[:4] == [[0, 0], [0, 1], [0, 2], [1, 0]]
    assert default_grid(2).shape == (100, 2)


def test_unconverged_draws_are_refused():
    spec = ONE
    bad = PosteriorDraws(draws_with_pi([0.2] * 8), spec.param_names, 2,
                         rhat=np.array([1.2, 1.0]), ess=np.array([500.0, 500.0]), divergences=0)
    with pytest.raises(NonConvergenceError):
        evaluate_grid(bad, spec, [[200.0]])
    with pytest.raises(NonConvergenceError):
        toxicity_category_probs(bad, spec, [200.0])
    assert evaluate_grid(bad, spec, [[200.0]], force=True)[0].p_target == 1.0


def test_marginal_index_validation():
    with pytest.raises(InvalidInputError):
        marginal_summary(draws_with_pi([0.2]), ONE, 1)
