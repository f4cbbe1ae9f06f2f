"""Checks of the two projection bias results.

The slope bias |beta1 - b1| never exceeds d * |beta1| / sqrt(A_n / n).
When every time sits the same offset c past its grid point, the baseline
bias |beta0 - b0| equals c * |beta1| exactly.
"""

import math
from typing import NamedTuple

import numpy as np

from panelmsm.biaslab.projection import project_on_grid
from panelmsm.exceptions import BiasBoundViolation
from panelmsm.utils import make_rng

ROUNDING_TOL = 1e-10


class SlopeBias(NamedTuple):
    bias: float
    bound: float


def check_slope_bias(
    times: np.ndarray,
    beta1: float,
    d: float,
    beta0: float = 0.0,
) -> SlopeBias:
    result = project_on_grid(times, beta0, beta1, d)
    bias = abs(beta1 - result.b1)
    bound = d * abs(beta1) / math.sqrt(result.A_n / result.n)
    if bias > bound + ROUNDING_TOL * max(1.0, bound):
        raise BiasBoundViolation(
            f"Slope bias {bias:.6g} exceeds its bound {bound:.6g} "
            f"(n={result.n}, d={d:g})"
        )
    return SlopeBias(bias=bias, bound=bound)


def shifted_grid_times(
    c: float,
    d: float,
    n: int,
    cells: np.ndarray | None = None,
) -> np.ndarray:
    """Times c past the grid points k*d; cells default to 1..n."""
    if not 0 <= c < d:
        raise ValueError(f"Offset must lie in [0, d), got c={c}, d={d}")
    k = np.arange(1, n + 1) if cells is None else np.asarray(cells, dtype=float)
    return k * d + c


def check_baseline_bias(
    c: float,
    d: float,
    beta0: float,
    beta1: float,
    n: int,
    cells: np.ndarray | None = None,
) -> float:
    """|beta0 - b0| on shifted grid times; must equal c * |beta1|."""
    times = shifted_grid_times(c, d, n, cells)
    result = project_on_grid(times, beta0, beta1, d)
    bias = abs(beta0 - result.b0)
    expected = c * abs(beta1)
    if abs(bias - expected) > ROUNDING_TOL * max(1.0, expected):
        raise BiasBoundViolation(
            f"Baseline bias {bias:.12g} differs from c*|beta1| = {expected:.12g}"
        )
    return bias


class SweepRow(NamedTuple):
    span: float
    n: int
    bias: float
    bound: float
    A_n_per_n: float


def slope_bias_sweep(
    spans: list[float],
    n: int,
    beta1: float = 1.0,
    d: float = 1.0,
    seed: int = 0,
) -> list[SweepRow]:
    """Slope bias of uniform random designs on [0, span] for growing spans."""
    rows = []
    for i, span in enumerate(spans):
        times = make_rng(seed, i).uniform(0.0, span, n)
        result = project_on_grid(times, 0.0, beta1, d)
        bias = abs(beta1 - result.b1)
        bound = d * abs(beta1) / math.sqrt(result.A_n / n)
        rows.append(
            SweepRow(
                span=float(span),
                n=n,
                bias=bias,
                bound=bound,
                A_n_per_n=result.A_n / n,
            )
        )
    return rows
