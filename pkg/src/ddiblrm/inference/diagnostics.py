"""Split-chain R-hat and autocorrelation-based effective sample size.

Both functions take an array of shape ``(n_chains, n_draws)``. Chains are
split in half before computing, so within-chain drift also shows up as
between-chain variance.
"""
from __future__ import annotations

import math

import numpy as np

from ..model import InvalidInputError


def _split(chains) -> np.ndarray:
    x = np.asarray(chains, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 4:
        raise InvalidInputError("need at least 2 chains of at least 4 draws")
    half = x.shape[1] // 2
    # the middle draw of odd-length chains is dropped
    return np.concatenate([x[:, :half], x[:, -half:]], axis=0)


def split_rhat(chains) -> float:
    """Potential scale reduction factor on split chains; ``inf`` for constant chains.

    Floored at 1: values below 1 only arise from the ``(n - 1) / n`` factor
    on short chains and carry no extra information.
    """
    x = _split(chains)
    n = x.shape[1]
    w = np.mean(np.var(x, axis=1, ddof=1))
    b_over_n = np.var(np.mean(x, axis=1), ddof=1)
    if not w > 0:
        return math.inf
    var_plus = (n - 1) / n * w + b_over_n
    return float(max(1.0, math.sqrt(var_plus / w)))


def _autocov(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    nfft = 1 << (2 * n - 1).bit_length()
    xc = x - x.mean(axis=-1, keepdims=True)
    f = np.fft.rfft(xc, n=nfft, axis=-1)
    return np.fft.irfft(f * np.conj(f), n=nfft, axis=-1)[..., :n] / n


def effective_sample_size(chains) -> float:
    """Effective sample size using Geyer's initial monotone sequence.

    Capped at ``N log10(N)`` for ``N`` total draws; returns ``nan`` for
    constant chains.
    """
    x = _split(chains)
    m, n = x.shape
    acov = _autocov(x)
    mean_var = np.mean(acov[:, 0]) * n / (n - 1.0)
    var_plus = mean_var * (n - 1.0) / n + np.var(x.mean(axis=1), ddof=1)
    if not var_plus > 0:
        return math.nan
    mean_acov = acov.mean(axis=0)

    rho = np.zeros(n)
    rho[0] = rho_even = 1.0
    rho[1] = rho_odd = 1.0 - (mean_var - mean_acov[1]) / var_plus
    t = 1
    while t < n - 2 and rho_even + rho_odd >= 0.0:
        rho_even = 1.0 - (mean_var - mean_acov[t + 1]) / var_plus
        rho_odd = 1.0 - (mean_var - mean_acov[t + 2]) / var_plus
        rho[t + 1] = rho_even
        if rho_even + rho_odd >= 0:
            rho[t + 2] = rho_odd
        t += 2
    max_t = t
    t = 1
    while t <= max_t - 2:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = rho[t + 2] = (rho[t - 1] + rho[t]) / 2.0
        t += 2
    total = m * n
    tau = -1.0 + 2.0 * np.sum(rho[:max_t]) + np.sum(rho[max_t + 1 : max_t + 2])
    tau = max(tau, 1.0 / math.log10(total))
    return float(total / tau)


def mcse_mean(chains) -> float:
    """Monte-Carlo standard error of the posterior mean estimate."""
    x = np.asarray(chains, dtype=float)
    return float(np.std(x, ddof=1) / math.sqrt(effective_sample_size(x)))
