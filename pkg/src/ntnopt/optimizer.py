"""Bayesian search over integer constellation parameters.

The surrogate is a Gaussian process with a Matern-5/2 kernel on inputs
scaled to the unit cube. Expected improvement is maximized by enumerating
every untried grid point, which is exact for grids of a few tens of
thousands of points.
"""
from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.stats import norm

logger = logging.getLogger(__name__)

STRATEGIES = ("gp-ei", "random", "grid")
JITTER = 1e-6
LENGTH_SCALES = np.geomspace(0.05, 2.0, 8)
SIGNAL_SCALES = np.geomspace(0.1, 10.0, 8)  # multiples of var(y)


class GridExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    """Inclusive integer bounds per dimension, in a fixed dimension order."""

    names: tuple[str, ...]
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        if not len(self.names) == len(self.lower) == len(self.upper):
            raise ValueError("names, lower and upper must have equal length")
        for name, lo, hi in zip(self.names, self.lower, self.upper):
            if lo > hi:
                raise ValueError(f"{name}: lower bound {lo} exceeds upper bound {hi}")

    @classmethod
    def from_bounds(cls, bounds: dict[str, Sequence[int]]) -> "SearchSpace":
        names = tuple(bounds)
        return cls(names, tuple(int(bounds[n][0]) for n in names), tuple(int(bounds[n][1]) for n in names))

    @property
    def size(self) -> int:
        return int(np.prod([hi - lo + 1 for lo, hi in zip(self.lower, self.upper)]))

    def grid(self) -> np.ndarray:
        """All points in lexicographic order, shape (size, dims)."""
        axes = [range(lo, hi + 1) for lo, hi in zip(self.lower, self.upper)]
        return np.array(list(itertools.product(*axes)), dtype=int).reshape(-1, len(self.names))

    def scale(self, x) -> np.ndarray:
        lo = np.asarray(self.lower, dtype=float)
        span = np.asarray(self.upper, dtype=float) - lo
        span[span == 0] = 1.0
        return (np.asarray(x, dtype=float) - lo) / span


@dataclass
class Trial:
    configuration: tuple[int, ...]
    objective: float
    seed: int | None
    elapsed_s: float


@dataclass
class TrialHistory:
    trials: list[Trial] = field(default_factory=list)

    def __len__(self):
        return len(self.trials)

    @property
    def best(self) -> Trial:
        if not self.trials:
            raise ValueError("empty history")
        # first maximum wins
        return max(self.trials, key=lambda tr: tr.objective)

    def tried(self) -> set[tuple[int, ...]]:
        return {tr.configuration for tr in self.trials}


def matern52(a: np.ndarray, b: np.ndarray, length_scale, signal_var: float) -> np.ndarray:
    ls = np.broadcast_to(np.asarray(length_scale, dtype=float), (a.shape[1],))
    diff = (a[:, None, :] - b[None, :, :]) / ls
    r = np.sqrt(np.sum(diff**2, axis=2)) * np.sqrt(5.0)
    return signal_var * (1.0 + r + r**2 / 3.0) * np.exp(-r)


def _chol(k: np.ndarray, jitter: float):
    for attempt in range(4):
        try:
            return cho_factor(k + (jitter * 10**attempt) * np.eye(len(k)), lower=True)
        except LinAlgError:
            continue
    raise LinAlgError("kernel matrix is singular even after jitter escalation")


def gp_posterior(x_obs, y_obs, x_query, length_scale=0.3, signal_var: float | None = None,
                 jitter: float = JITTER):
    """Posterior mean and variance at ``x_query``.

    The prior mean is the constant ``mean(y_obs)``. ``signal_var`` defaults
    to ``var(y_obs)`` (or 1 when the observations are constant).
    """
    x_obs = np.atleast_2d(np.asarray(x_obs, dtype=float))
    x_query = np.atleast_2d(np.asarray(x_query, dtype=float))
    y_obs = np.asarray(y_obs, dtype=float)
    if len(y_obs) < 1:
        raise ValueError("need at least one observation")
    if signal_var is None:
        signal_var = float(np.var(y_obs)) or 1.0
    prior = float(np.mean(y_obs))
    factor = _chol(matern52(x_obs, x_obs, length_scale, signal_var), jitter)
    alpha = cho_solve(factor, y_obs - prior)
    k_star = matern52(x_query, x_obs, length_scale, signal_var)
    mean = prior + k_star @ alpha
    v = cho_solve(factor, k_star.T)
    var = signal_var - np.sum(k_star * v.T, axis=1)
    return mean, np.maximum(var, 0.0)


def log_marginal_likelihood(x_obs, y_obs, length_scale, signal_var, jitter: float = JITTER) -> float:
    y = np.asarray(y_obs, dtype=float) - np.mean(y_obs)
    try:
        factor = _chol(matern52(x_obs, x_obs, length_scale, signal_var), jitter)
    except LinAlgError:
        return -np.inf
    alpha = cho_solve(factor, y)
    return float(-0.5 * y @ alpha - np.sum(np.log(np.diag(factor[0]))) - 0.5 * len(y) * np.log(2 * np.pi))


def fit_hyperparameters(x_obs, y_obs, sweeps: int = 2):
    """Grid-search the length-scales and signal variance by marginal likelihood.

    An isotropic 8x8 grid search picks the starting point, then each
    dimension's length-scale is refined over the same 8 values by
    coordinate ascent.
    """
    x_obs = np.atleast_2d(np.asarray(x_obs, dtype=float))
    base = float(np.var(y_obs)) or 1.0
    dims = x_obs.shape[1]
    best = (-np.inf, None, None)
    for ls in LENGTH_SCALES:
        for sv in SIGNAL_SCALES * base:
            lml = log_marginal_likelihood(x_obs, y_obs, ls, sv)
            if lml > best[0]:
                best = (lml, np.full(dims, ls), sv)
    lml, ls_vec, sv = best
    if ls_vec is None:
        return np.full(dims, LENGTH_SCALES[3]), base
    for _ in range(sweeps):
        for d in range(dims):
            for candidate in LENGTH_SCALES:
                trial = ls_vec.copy()
                trial[d] = candidate
                val = log_marginal_likelihood(x_obs, y_obs, trial, sv)
                if val > lml:
                    lml, ls_vec = val, trial
    return ls_vec, sv


def expected_improvement(mean, variance, incumbent: float):
    mean = np.asarray(mean, dtype=float)
    sigma = np.sqrt(np.maximum(np.asarray(variance, dtype=float), 0.0))
    improve = mean - incumbent
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, improve / np.where(sigma > 0, sigma, 1.0), 0.0)
        ei = improve * norm.cdf(z) + sigma * norm.pdf(z)
    ei = np.where(sigma > 0, ei, np.maximum(improve, 0.0))
    return np.maximum(ei, 0.0)


def propose_next(history: TrialHistory, space: SearchSpace, grid: np.ndarray | None = None):
    """Untried grid point with the largest expected improvement."""
    if len(history) == 0:
        raise ValueError("history must be non-empty")
    grid = space.grid() if grid is None else grid
    tried = history.tried()
    mask = np.array([tuple(int(v) for v in row) not in tried for row in grid])
    if not mask.any():
        raise GridExhausted("every grid point has been evaluated")
    candidates = grid[mask]
    x_obs = space.scale([tr.configuration for tr in history.trials])
    y_obs = np.array([tr.objective for tr in history.trials])
    ls, sv = fit_hyperparameters(x_obs, y_obs)
    mean, var = gp_posterior(x_obs, y_obs, space.scale(candidates), ls, sv)
    ei = expected_improvement(mean, var, float(np.max(y_obs)))
    # argmax returns the first maximum, i.e. the lexicographically smallest
    return tuple(int(v) for v in candidates[int(np.argmax(ei))])


def optimize(space: SearchSpace, evaluator: Callable[[tuple[int, ...]], float], budget: int,
             strategy: str = "gp-ei", rng: np.random.Generator | int | None = 0,
             n_init: int = 10, seed: int | None = None):
    """Maximize ``evaluator`` over the integer grid.

    Returns ``(best_configuration, history)``. No configuration is
    evaluated twice; a budget larger than the grid evaluates the whole grid.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    rng = np.random.default_rng(rng)
    grid = space.grid()
    budget = min(budget, len(grid))
    history = TrialHistory()

    def run(config):
        t0 = time.perf_counter()
        value = float(evaluator(config))
        history.trials.append(Trial(config, value, seed, time.perf_counter() - t0))
        logger.info("trial %d %s -> %.6g", len(history), config, value)

    if strategy == "grid":
        for row in grid[:budget]:
            run(tuple(int(v) for v in row))
    else:
        n_random = budget if strategy == "random" else min(n_init, budget)
        for i in rng.choice(len(grid), size=n_random, replace=False):
            run(tuple(int(v) for v in grid[i]))
        while len(history) < budget:
            run(propose_next(history, space, grid))
    return history.best.configuration, history
