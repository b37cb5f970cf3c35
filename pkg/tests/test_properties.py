import time

import numpy as np
import pytest

from ddiblrm.model import Variant
from ddiblrm.properties import (
    EXPECTED_MATRIX,
    VARIANT_ORDER,
    Property,
    PropertyReport,
    check_asymptotic_toxicity,
    check_independence_reduction,
    check_nonmonotonicity,
    check_ordering,
    check_zero_dose_reduction,
    doubling_ladder,
    matrix_matches_expected,
    property_matrix,
    render_matrix,
    replay_witness,
)


@pytest.mark.parametrize("variant", VARIANT_ORDER)
def test_reductions_pass_everywhere(variant):
    assert check_zero_dose_reduction(variant, 50).passed
    assert check_independence_reduction(variant, 50).passed


def test_asymptotic_examples():
    sat = check_asymptotic_toxicity(Variant.SATURATING, 30)
    assert sat.passed
    assert check_asymptotic_toxicity(Variant.NO_INTERACTION, 30).passed
    lin = check_asymptotic_toxicity(Variant.LINEAR, 30)
    assert not lin.passed
    assert replay_witness(lin.witness) < 1e-3


def test_ordering_examples():
    for sign in ("synergy", "antagonism"):
        assert check_ordering(Variant.SATURATING, sign, 50).passed
        assert check_ordering(Variant.THALL, sign, 50).passed
        r = check_ordering(Variant.NO_INTERACTION, sign, 50)
        assert not r.passed and r.witness is not None


def test_nonmonotonicity_witnesses():
    for v in (Variant.SATURATING, Variant.LINEAR):
        r = check_nonmonotonicity(v)
        assert r.passed
        w = r.witness
        lo = replay_witness(w)
        hi = replay_witness({**w, "doses": w["doses_eps"]})
        assert all(b > a for a, b in zip(w["doses"], w["doses_eps"]))
        assert hi < lo - 1e-9
    assert not check_nonmonotonicity(Variant.THALL).passed
    assert not check_nonmonotonicity(Variant.NO_INTERACTION).passed


def test_failed_report_needs_witness():
    with pytest.raises(ValueError):
        PropertyReport(Property.SYNERGY_ORDERING, Variant.LINEAR, False, 0.0)


def test_doubling_ladder():
    lad = doubling_ladder(200.0)
    assert lad[0] == 200.0 and lad[-1] == 200.0 * 2.0**40
    assert np.all(lad[1:] / lad[:-1] == 2.0)


def test_full_matrix_and_render():
    t = time.perf_counter()
    m = property_matrix(seed=3)
    assert time.perf_counter() - t < 10
    assert matrix_matches_expected(m)
    for p in Property:
        for v in VARIANT_ORDER:
            r = m[p][v]
            assert r.passed == EXPECTED_MATRIX[p][v]
            if not r.passed:
                assert r.witness is not None
    text = render_matrix(m)
    assert "Saturating" in text and text.count("FAIL") == 5
