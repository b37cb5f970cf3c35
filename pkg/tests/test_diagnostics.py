import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ddiblrm.inference import effective_sample_size, split_rhat
from ddiblrm.inference.mcmc import diagnose
from ddiblrm.model import InvalidInputError


def test_constant_chains_give_infinite_rhat():
    x = np.ones((4, 100))
    assert split_rhat(x) == math.inf
    rhat, ess = diagnose(x[:, :, None])
    assert rhat[0] == math.inf and ess[0] == 0


def test_independent_normal_draws(rng):
    x = rng.standard_normal((4, 1000))
    assert split_rhat(x) < 1.01
    assert effective_sample_size(x) > 2000


def test_separated_chains(rng):
    x = rng.standard_normal((2, 1000)) + np.array([[-10.0], [10.0]])
    assert split_rhat(x) > 2


def test_ar1_ess_matches_theory(rng):
    # AR(1) with coefficient phi has ESS/N = (1 - phi) / (1 + phi)
    phi, n = 0.8, 20000
    x = np.empty((4, n))
    x[:, 0] = rng.standard_normal(4) / math.sqrt(1 - phi**2)
    eps = rng.standard_normal((4, n))
    for t in range(1, n):
        x[:, t] = phi * x[:, t - 1] + eps[:, t]
    expected = 4 * n * (1 - phi) / (1 + phi)
    assert effective_sample_size(x) == pytest.approx(expected, rel=0.1)


def test_drift_within_chain_inflates_rhat(rng):
    x = rng.standard_normal((4, 1000)) + np.linspace(0, 5, 1000)
    assert split_rhat(x) > 1.1


def test_shape_validation():
    with pytest.raises(InvalidInputError):
        split_rhat(np.zeros((1, 100)))
    with pytest.raises(InvalidInputError):
        effective_sample_size(np.zeros((4, 3)))


@given(arrays(float, (3, 40), elements=st.floats(-1e3, 1e3)))
def test_rhat_and_ess_bounds(x):
    if np.ptp(x) < 1e-6:
        return
    r = split_rhat(x)
    assert r >= 1.0
    ess = effective_sample_size(x)
    if not math.isnan(ess):
        assert 0 < ess <= x.size * math.log10(x.size) + 1e-9
