"""Posterior toxicity-interval probabilities and EWOC classification.

Interval conventions: ``pi < under_max`` is underdosing,
``under_max <= pi < over_min`` is target toxicity and ``pi >= over_min`` is
overdosing. EWOC holds when ``P(overdosing) <= feasibility`` (inclusive).

Quantiles are empirical with linear interpolation between order statistics
(``numpy.quantile(..., method="linear")``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .inference.mcmc import PosteriorDraws
from .model import InvalidInputError, ModelSpec, prob

DEFAULT_GRID_DOSES = (0.0, 12.5, 25.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 600.0)


@dataclass(frozen=True)
class IntervalSpec:
    under_max: float = 0.16
    over_min: float = 0.33
    feasibility: float = 0.25

    def __post_init__(self):
        if not 0 < self.under_max < self.over_min < 1:
            raise InvalidInputError(
                f"need 0 < under_max < over_min < 1, got {self.under_max}, {self.over_min}"
            )
        if not 0 < self.feasibility < 1:
            raise InvalidInputError(f"feasibility must lie in (0, 1), got {self.feasibility}")


@dataclass(frozen=True)
class SurfaceRow:
    doses: tuple[float, ...]
    p_under: float
    p_target: float
    p_over: float
    mean_pi: float
    q025: float
    q50: float
    q975: float
    ewoc_ok: bool


def _draw_matrix(draws) -> np.ndarray:
    return draws.draws if isinstance(draws, PosteriorDraws) else np.atleast_2d(np.asarray(draws, dtype=float))


def _check(draws, force: bool):
    if isinstance(draws, PosteriorDraws):
        draws.require_converged(force)


def category_probs_from_pi(pi: np.ndarray, intervals: IntervalSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Interval fractions along axis 0 of a ``(draws, ...)`` array of probabilities."""
    n = pi.shape[0]
    under = np.count_nonzero(pi < intervals.under_max, axis=0)
    over = np.count_nonzero(pi >= intervals.over_min, axis=0)
    target = n - under - over
    return under / n, target / n, over / n


def toxicity_category_probs(
    draws,
    spec: ModelSpec,
    doses,
    intervals: IntervalSpec = IntervalSpec(),
    force: bool = False,
) -> tuple[float, float, float]:
    """``(p_under, p_target, p_over)`` at one dose combination.

    ``draws`` is a :class:`PosteriorDraws` (convergence enforced unless
    ``force``) or a raw ``(S, P)`` parameter matrix.
    """
    _check(draws, force)
    pi = prob(spec, _draw_matrix(draws), np.asarray(doses, dtype=float))
    u, t, o = category_probs_from_pi(pi, intervals)
    return float(u), float(t), float(o)


def ewoc_satisfied(p_over: float, intervals: IntervalSpec = IntervalSpec()) -> bool:
    return bool(p_over <= intervals.feasibility)


def evaluate_grid(
    draws,
    spec: ModelSpec,
    grid: Sequence[Sequence[float]],
    intervals: IntervalSpec = IntervalSpec(),
    force: bool = False,
) -> list[SurfaceRow]:
    """One :class:`SurfaceRow` per dose combination in ``grid``, in input order."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InvalidInputError("dose grid is empty")
    if grid.ndim != 2 or grid.shape[1] != spec.n_drugs:
        raise InvalidInputError(f"grid rows need {spec.n_drugs} doses")
    _check(draws, force)
    pi = np.atleast_2d(prob(spec, _draw_matrix(draws), grid))
    under, target, over = category_probs_from_pi(pi, intervals)
    mean = pi.mean(axis=0)
    q = np.quantile(pi, [0.025, 0.5, 0.975], axis=0, method="linear")
    return [
        SurfaceRow(
            doses=tuple(float(x) for x in grid[m]),
            p_under=float(under[m]),
            p_target=float(target[m]),
            p_over=float(over[m]),
            mean_pi=float(mean[m]),
            q025=float(q[0, m]),
            q50=float(q[1, m]),
            q975=float(q[2, m]),
            ewoc_ok=ewoc_satisfied(over[m], intervals),
        )
        for m in range(grid.shape[0])
    ]


def default_grid(n_drugs: int = 2, doses: Sequence[float] = DEFAULT_GRID_DOSES) -> np.ndarray:
    """Full factorial grid over ``doses`` for every drug, first drug varying slowest."""
    mesh = np.meshgrid(*([np.asarray(doses, dtype=float)] * n_drugs), indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def marginal_summary(
    draws,
    spec: ModelSpec,
    drug_index: int,
    ladder: Sequence[float] = DEFAULT_GRID_DOSES,
    intervals: IntervalSpec = IntervalSpec(),
    force: bool = False,
) -> list[SurfaceRow]:
    """Single-drug summaries: ``drug_index`` dosed along ``ladder``, all other doses 0."""
    if not 0 <= drug_index < spec.n_drugs:
        raise InvalidInputError(f"drug index {drug_index} out of range for {spec.n_drugs} drugs")
    ladder = np.asarray(ladder, dtype=float)
    grid = np.zeros((len(ladder), spec.n_drugs))
    grid[:, drug_index] = ladder
    return evaluate_grid(draws, spec, grid, intervals, force)
