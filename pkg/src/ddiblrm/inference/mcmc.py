"""Posterior sampling for the dose-toxicity models."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..model import CohortRecord, ModelSpec
from .diagnostics import effective_sample_size, split_rhat
from .nuts import SamplerConfig, chain_rng, sample_chain
from .posterior import LogPosterior, PriorSpec

RHAT_MAX = 1.01
ESS_MIN = 100.0


class NonConvergenceError(RuntimeError):
    """Raised when unconverged draws are used for decisions without an override."""


@dataclass
class PosteriorDraws:
    """Post-warmup draws, chain-major, with per-parameter diagnostics.

    ``draws`` has shape ``(chains * sampling_iters, n_params)``; rows
    ``c * sampling_iters : (c + 1) * sampling_iters`` belong to chain ``c``.
    """

    draws: np.ndarray
    param_names: list[str]
    n_chains: int
    rhat: np.ndarray
    ess: np.ndarray
    divergences: int
    step_sizes: tuple[float, ...] = ()

    @property
    def converged(self) -> bool:
        return bool(np.all(self.rhat <= RHAT_MAX) and np.all(self.ess >= ESS_MIN))

    def by_chain(self) -> np.ndarray:
        """Draws reshaped to ``(chains, iters, n_params)``."""
        return self.draws.reshape(self.n_chains, -1, self.draws.shape[1])

    def require_converged(self, force: bool = False, what: str = "posterior"):
        if not (force or self.converged):
            bad = [
                f"{n} (rhat={r:.4f}, ess={e:.0f})"
                for n, r, e in zip(self.param_names, self.rhat, self.ess)
                if not (r <= RHAT_MAX and e >= ESS_MIN)
            ]
            raise NonConvergenceError(f"{what} not converged: " + ", ".join(bad))

    def summary(self) -> list[dict]:
        rows = []
        for j, name in enumerate(self.param_names):
            x = self.draws[:, j]
            q = np.quantile(x, [0.025, 0.5, 0.975])
            rows.append(
                dict(param=name, mean=float(x.mean()), sd=float(x.std(ddof=1)),
                     q025=float(q[0]), q50=float(q[1]), q975=float(q[2]),
                     rhat=float(self.rhat[j]), ess=float(self.ess[j]))
            )
        return rows


def diagnose(chains: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split-Rhat and ESS per parameter for ``(chains, iters, params)`` draws."""
    p = chains.shape[2]
    rhat = np.array([split_rhat(chains[:, :, j]) for j in range(p)])
    ess = np.array([effective_sample_size(chains[:, :, j]) for j in range(p)])
    ess = np.where(np.isnan(ess), 0.0, ess)
    return rhat, ess


def initial_point(mean: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Chain start: prior mean jittered by ``Uniform(-2, 2)`` per coordinate."""
    return mean + rng.uniform(-2.0, 2.0, size=mean.shape)


def run_mcmc(
    data: Sequence[CohortRecord],
    spec: ModelSpec,
    priors: PriorSpec,
    config: SamplerConfig | None = None,
) -> PosteriorDraws:
    """Sample the posterior with NUTS; deterministic given ``config.seed``.

    Convergence is reported via :attr:`PosteriorDraws.converged`
    (split-Rhat <= 1.01 and ESS >= 100 for every parameter) rather than
    raised here; decision functions enforce it.
    """
    config = config or SamplerConfig()
    target = LogPosterior(data, spec, priors)
    chains, steps, divergences = [], [], 0
    for c in range(config.chains):
        rng = chain_rng(config.seed, c)
        res = sample_chain(target, initial_point(target.prior_mean, rng), config, rng)
        chains.append(res.draws)
        steps.append(res.step_size)
        divergences += res.divergences
    stacked = np.stack(chains)
    if config.chains >= 2 and config.sampling_iters >= 4:
        rhat, ess = diagnose(stacked)
    else:
        rhat = np.full(spec.n_params, math.inf)
        ess = np.zeros(spec.n_params)
    return PosteriorDraws(
        draws=stacked.reshape(-1, spec.n_params),
        param_names=spec.param_names,
        n_chains=config.chains,
        rhat=rhat,
        ess=ess,
        divergences=divergences,
        step_sizes=tuple(steps),
    )
