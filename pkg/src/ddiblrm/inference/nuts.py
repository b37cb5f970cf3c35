"""No-U-turn Hamiltonian Monte Carlo with warmup adaptation.

The transition is the multinomial variant of NUTS: trajectories double in a
random direction until the generalized no-U-turn criterion fires, the
energy error diverges, or ``max_leapfrog_depth`` doublings have been made.
The new state is drawn with biased progressive sampling across subtrees and
uniform progressive sampling within them.

Warmup adapts the step size by dual averaging towards ``target_acceptance``
and the inverse metric from windowed sample covariances (fast, slow, fast
schedule with windows doubling from 25 iterations). The metric is dense by
default; ``metric="diag"`` keeps only the variances.

Randomness: chain ``c`` draws from ``numpy.random.SeedSequence(seed,
spawn_key=(c,))``, so adding chains never changes existing ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..model import InvalidInputError

LogDensity = Callable[[np.ndarray], tuple[float, np.ndarray]]

_MAX_ENERGY_ERROR = 1000.0


@dataclass(frozen=True)
class SamplerConfig:
    chains: int = 4
    warmup_iters: int = 1000
    sampling_iters: int = 1000
    seed: int = 0
    target_acceptance: float = 0.8
    max_leapfrog_depth: int = 10
    metric: str = "dense"

    def __post_init__(self):
        if self.metric not in ("dense", "diag"):
            raise InvalidInputError(f"metric must be 'dense' or 'diag', got {self.metric!r}")
        for name in ("chains", "warmup_iters", "sampling_iters", "max_leapfrog_depth"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise InvalidInputError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise InvalidInputError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not 0 < self.target_acceptance < 1:
            raise InvalidInputError(f"target_acceptance must lie in (0, 1), got {self.target_acceptance}")


@dataclass
class ChainResult:
    draws: np.ndarray
    step_size: float
    inv_metric: np.ndarray
    divergences: int
    mean_accept: float
    n_leapfrog: np.ndarray = field(repr=False)


class _DualAveraging:
    def __init__(self, step_size, target, gamma=0.05, t0=10.0, kappa=0.75):
        self.target, self.gamma, self.t0, self.kappa = target, gamma, t0, kappa
        self.restart(step_size)

    def restart(self, step_size):
        self.mu = math.log(10.0 * step_size)
        self.counter = 0
        self.s_bar = 0.0
        self.x_bar = 0.0

    def update(self, accept_stat) -> float:
        self.counter += 1
        accept_stat = min(1.0, accept_stat)
        eta = 1.0 / (self.counter + self.t0)
        self.s_bar = (1.0 - eta) * self.s_bar + eta * (self.target - accept_stat)
        x = self.mu - self.s_bar * math.sqrt(self.counter) / self.gamma
        x_eta = self.counter ** (-self.kappa)
        self.x_bar = (1.0 - x_eta) * self.x_bar + x_eta * x
        return math.exp(x)

    @property
    def final(self) -> float:
        return math.exp(self.x_bar)


def _adaptation_windows(n_warmup: int) -> tuple[int, list[int]]:
    """First metric-window iteration and the (exclusive) window ends."""
    init, term, base = 75, 50, 25
    if n_warmup < 20:
        return 0, []
    if init + term + base > n_warmup:
        init, term = int(0.15 * n_warmup), int(0.1 * n_warmup)
        base = n_warmup - init - term
    ends = []
    start, size = init, base
    last = n_warmup - term
    while start < last:
        end = start + size
        if end + 2 * size > last:
            end = last
        ends.append(end)
        start, size = end, 2 * size
    return init, ends


class _State:
    __slots__ = ("theta", "logp", "grad")

    def __init__(self, theta, logp, grad):
        self.theta, self.logp, self.grad = theta, logp, grad


class _Tree:
    __slots__ = (
        "minus", "p_minus", "plus", "p_plus", "proposal", "log_w", "rho",
        "n_leapfrog", "sum_accept", "diverging", "turning",
    )


class NUTS:
    """Single-chain NUTS kernel for a log density returning ``(logp, grad)``."""

    def __init__(self, log_density: LogDensity, dim: int, max_depth: int = 10):
        self.f = log_density
        self.dim = dim
        self.max_depth = max_depth
        self.step_size = 1.0
        self.set_inv_metric(np.ones(dim))

    def set_inv_metric(self, inv_metric: np.ndarray):
        """Install a diagonal (1-d) or dense (2-d) inverse metric."""
        self.inv_metric = inv_metric
        if inv_metric.ndim == 1:
            self._momentum_scale = 1.0 / np.sqrt(inv_metric)
        else:
            chol = np.linalg.cholesky(inv_metric)
            # p = chol^-T z has covariance inv_metric^-1
            self._momentum_scale = np.linalg.inv(chol).T

    def _velocity(self, p):
        return self.inv_metric * p if self.inv_metric.ndim == 1 else self.inv_metric @ p

    def _kinetic(self, p):
        return 0.5 * float(np.dot(p, self._velocity(p)))

    def _draw_momentum(self, rng):
        z = rng.standard_normal(self.dim)
        return self._momentum_scale * z if self.inv_metric.ndim == 1 else self._momentum_scale @ z

    def _leapfrog(self, s: _State, p, eps):
        p = p + 0.5 * eps * s.grad
        theta = s.theta + eps * self._velocity(p)
        logp, grad = self.f(theta)
        p = p + 0.5 * eps * grad
        return _State(theta, logp, grad), p

    def _uturn(self, p_minus, p_plus, rho) -> bool:
        return not (np.dot(self._velocity(p_minus), rho) > 0 and np.dot(self._velocity(p_plus), rho) > 0)

    def _build(self, s: _State, p, direction, depth, h0, rng) -> _Tree:
        if depth == 0:
            s1, p1 = self._leapfrog(s, p, direction * self.step_size)
            h1 = -s1.logp + self._kinetic(p1)
            if not math.isfinite(h1):
                h1 = math.inf
            t = _Tree()
            t.minus = t.plus = t.proposal = s1
            t.p_minus = t.p_plus = t.rho = p1
            t.log_w = h0 - h1
            t.n_leapfrog = 1
            t.sum_accept = min(1.0, math.exp(h0 - h1)) if h1 < math.inf else 0.0
            t.diverging = h1 - h0 > _MAX_ENERGY_ERROR
            t.turning = False
            return t

        inner = self._build(s, p, direction, depth - 1, h0, rng)
        if inner.diverging or inner.turning:
            return inner
        if direction > 0:
            outer = self._build(inner.plus, inner.p_plus, direction, depth - 1, h0, rng)
        else:
            outer = self._build(inner.minus, inner.p_minus, direction, depth - 1, h0, rng)

        t = _Tree()
        t.n_leapfrog = inner.n_leapfrog + outer.n_leapfrog
        t.sum_accept = inner.sum_accept + outer.sum_accept
        t.diverging, t.turning = outer.diverging, outer.turning
        if t.diverging or t.turning:
            t.minus = t.plus = t.proposal = inner.proposal
            return t
        t.log_w = np.logaddexp(inner.log_w, outer.log_w)
        t.proposal = outer.proposal if math.log(rng.uniform()) < outer.log_w - t.log_w else inner.proposal
        if direction > 0:
            t.minus, t.p_minus, t.plus, t.p_plus = inner.minus, inner.p_minus, outer.plus, outer.p_plus
        else:
            t.minus, t.p_minus, t.plus, t.p_plus = outer.minus, outer.p_minus, inner.plus, inner.p_plus
        t.rho = inner.rho + outer.rho
        t.turning = self._uturn(t.p_minus, t.p_plus, t.rho)
        return t

    def transition(self, s: _State, rng: np.random.Generator):
        """One NUTS step. Returns ``(state, accept_stat, n_leapfrog, diverged)``."""
        p0 = self._draw_momentum(rng)
        h0 = -s.logp + self._kinetic(p0)
        minus = plus = s
        p_minus = p_plus = rho = p0
        log_w = 0.0
        sample = s
        n_leapfrog, sum_accept, diverged = 0, 0.0, False
        for depth in range(self.max_depth):
            direction = 1 if rng.uniform() < 0.5 else -1
            if direction > 0:
                sub = self._build(plus, p_plus, 1, depth, h0, rng)
            else:
                sub = self._build(minus, p_minus, -1, depth, h0, rng)
            n_leapfrog += sub.n_leapfrog
            sum_accept += sub.sum_accept
            if sub.diverging:
                diverged = True
                break
            if sub.turning:
                break
            if math.log(rng.uniform()) < sub.log_w - log_w:
                sample = sub.proposal
            log_w = np.logaddexp(log_w, sub.log_w)
            if direction > 0:
                plus, p_plus = sub.plus, sub.p_plus
            else:
                minus, p_minus = sub.minus, sub.p_minus
            rho = rho + sub.rho
            if self._uturn(p_minus, p_plus, rho):
                break
        return sample, sum_accept / max(n_leapfrog, 1), n_leapfrog, diverged

    def find_step_size(self, s: _State, rng: np.random.Generator, start: float = 1.0) -> float:
        """Heuristic initial step size: double or halve until acceptance crosses 0.8."""
        eps = start
        p = self._draw_momentum(rng)
        h0 = -s.logp + self._kinetic(p)

        def delta(eps):
            s1, p1 = self._leapfrog(s, p, eps)
            h1 = -s1.logp + self._kinetic(p1)
            return h0 - h1 if math.isfinite(h1) else -math.inf

        direction = 1 if delta(eps) > math.log(0.8) else -1
        for _ in range(100):
            eps = eps * 2.0 if direction > 0 else eps / 2.0
            d = delta(eps)
            if (direction > 0 and not d > math.log(0.8)) or (direction < 0 and d > math.log(0.8)):
                break
        return eps


def _regularized_metric(w: np.ndarray, kind: str) -> np.ndarray:
    # shrink towards 1e-3 * I so short windows still give a usable metric
    k, dim = w.shape
    if kind == "diag":
        var = np.var(w, axis=0, ddof=1) if k > 1 else np.ones(dim)
        return (k / (k + 5.0)) * var + 1e-3 * (5.0 / (k + 5.0))
    cov = np.atleast_2d(np.cov(w, rowvar=False)) if k > 1 else np.eye(dim)
    return (k / (k + 5.0)) * cov + 1e-3 * (5.0 / (k + 5.0)) * np.eye(dim)


def sample_chain(
    log_density: LogDensity,
    theta0: np.ndarray,
    config: SamplerConfig,
    rng: np.random.Generator,
) -> ChainResult:
    """Run warmup and sampling for one chain started at ``theta0``."""
    dim = len(theta0)
    kernel = NUTS(log_density, dim, config.max_leapfrog_depth)
    logp, grad = log_density(np.asarray(theta0, dtype=float))
    if not math.isfinite(logp):
        raise InvalidInputError("log density is not finite at the initial point")
    state = _State(np.asarray(theta0, dtype=float), logp, grad)

    kernel.step_size = kernel.find_step_size(state, rng)
    adapter = _DualAveraging(kernel.step_size, config.target_acceptance)
    window_start, window_ends = _adaptation_windows(config.warmup_iters)
    window_draws: list[np.ndarray] = []

    for it in range(config.warmup_iters):
        state, accept, _, _ = kernel.transition(state, rng)
        kernel.step_size = adapter.update(accept)
        if window_ends and window_start <= it < window_ends[-1]:
            window_draws.append(state.theta)
            if it + 1 in window_ends:
                kernel.set_inv_metric(_regularized_metric(np.array(window_draws), config.metric))
                window_draws = []
                kernel.step_size = kernel.find_step_size(state, rng, kernel.step_size)
                adapter.restart(kernel.step_size)
    if config.warmup_iters:
        kernel.step_size = adapter.final

    draws = np.empty((config.sampling_iters, dim))
    n_leap = np.empty(config.sampling_iters, dtype=int)
    divergences = 0
    accept_sum = 0.0
    for it in range(config.sampling_iters):
        state, accept, n_leap[it], diverged = kernel.transition(state, rng)
        draws[it] = state.theta
        divergences += diverged
        accept_sum += accept
    return ChainResult(
        draws=draws,
        step_size=kernel.step_size,
        inv_metric=np.array(kernel.inv_metric),
        divergences=divergences,
        mean_accept=accept_sum / config.sampling_iters,
        n_leapfrog=n_leap,
    )


def chain_rng(seed: int, chain: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(chain,)))
