"""Piecewise time-homogeneous approximation.

Rates are held at their value at the left edge of every grid cell
[k d, (k+1) d), which turns P(t, t+h) into a product of matrix
exponentials, one per cell touched by the interval.
"""

import numpy as np

from panelmsm.model.rates import RateFunction
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.cleanup import cleanup_stochastic
from panelmsm.transitions.expm import expm_batch
from panelmsm.transitions.grid import PiecewiseGrid
from panelmsm.transitions.solution import TransitionBatch, TransitionSolution


class FactorCache:
    """Matrix-exponential factors of one likelihood evaluation.

    Keyed on (cell index, width, covariate values). Interior factors
    exp(d Q(k d)) are shared by every interval crossing cell k.
    A cache belongs to one rate function and is never shared between
    processes.
    """

    def __init__(self, rate_function: RateFunction, grid: PiecewiseGrid) -> None:
        self.rate_function = rate_function
        self.grid = grid
        self.factors: dict[tuple[int, float, tuple[float, ...]], np.ndarray] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self.factors)

    def factor(self, k: int, width: float, x: np.ndarray) -> np.ndarray:
        key = (k, width, tuple(x.tolist()))
        try:
            result = self.factors[key]
        except KeyError:
            self.misses += 1
            Q = self.rate_function(np.array([k * self.grid.d]), x[None, :])[0]
            result = expm_batch(width * Q)
            self.factors[key] = result
        else:
            self.hits += 1
        return result

    def product(self, x: np.ndarray, t: float, h: float) -> tuple[np.ndarray, int]:
        """Raw P(t, t+h) and its number of factors."""
        segments = self.grid.segments(t, h)
        P = np.eye(self.rate_function.m)
        for k, width in segments:
            P = P @ self.factor(k, width, x)
        return P, len(segments)


def piecewise_batch(
    rate_function: RateFunction,
    X: np.ndarray,
    starts: np.ndarray,
    widths: np.ndarray,
    d: float,
    tol: float | None = None,
    cache: FactorCache | None = None,
) -> TransitionBatch:
    grid = PiecewiseGrid.create(d)
    if cache is None:
        cache = FactorCache(rate_function, grid)
    starts = np.asarray(starts, dtype=float).reshape(-1)
    widths = np.asarray(widths, dtype=float).reshape(-1)
    n = starts.shape[0]
    X = np.asarray(X, dtype=float).reshape(n, rate_function.gamma.shape[1])
    m = rate_function.m
    P = np.empty((n, m, m))
    steps = np.zeros(n, dtype=int)
    for i in range(n):
        P[i], steps[i] = cache.product(X[i], float(starts[i]), float(widths[i]))
    active = widths > 0
    if np.any(active):
        P[active] = cleanup_stochastic(P[active], tol)
    return TransitionBatch(P=P, steps=steps, err_estimate=np.zeros(n))


def solve_piecewise(
    spec: ModelSpec,
    theta: np.ndarray,
    covs: dict[str, float] | np.ndarray,
    t: float,
    h: float,
    d: float,
) -> TransitionSolution:
    """P(t, t+h) under rates held constant on cells of width d."""
    if not h >= 0:
        raise ValueError(f"Interval width must be nonnegative, got {h}")
    rate_function = spec.rate_function(theta)
    x = rate_function.covariate_vector(covs)
    cache = FactorCache(rate_function, PiecewiseGrid.create(d))
    P, steps = cache.product(x, float(t), float(h))
    if steps:
        P = cleanup_stochastic(P)
    return TransitionSolution(
        P=P, method="piecewise", steps=steps, err_estimate=0.0, d=float(d)
    )
