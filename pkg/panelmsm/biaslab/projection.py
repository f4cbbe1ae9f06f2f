"""Least-squares projection of a linear trend onto a floored time axis.

Responses y_i = beta0 + beta1 * t_i are regressed on (1, g_d(t_i)).
With x_i = g_d(t_i), xbar their mean and A_n = sum (x_i - xbar)^2,

    b1 = beta1 * sum (t_i - tbar)(x_i - xbar) / A_n
    b0 = beta0 + beta1 * (tbar * sum x_i^2 - tbar_x) / A_n

where tbar_x = (1/n) * sum_i t_i x_i * sum_j x_j.
"""

from typing import NamedTuple

import numpy as np

from panelmsm.exceptions import DegenerateDesignError
from panelmsm.transitions.grid import g_d_array


class ProjectionResult(NamedTuple):
    b0: float
    b1: float
    A_n: float
    n: int
    d: float

    def line(self, t: np.ndarray) -> np.ndarray:
        return self.b0 + self.b1 * np.asarray(t, dtype=float)


def _design(times: np.ndarray, d: float) -> tuple[np.ndarray, np.ndarray, float]:
    t = np.asarray(times, dtype=float).reshape(-1)
    x = g_d_array(t, d)
    A_n = float(np.sum((x - x.mean()) ** 2)) if t.shape[0] else 0.0
    if not A_n > 0:
        raise DegenerateDesignError(
            f"Floored times take a single value at d={d:g}; "
            "the projection is not identified"
        )
    return t, x, A_n


def project_on_grid(
    times: np.ndarray,
    beta0: float,
    beta1: float,
    d: float,
) -> ProjectionResult:
    """Closed-form projection coefficients."""
    t, x, A_n = _design(times, d)
    n = t.shape[0]
    t_bar = t.mean()
    x_bar = x.mean()
    slope_ratio = float(np.sum((t - t_bar) * (x - x_bar))) / A_n
    cross = float(np.sum(t * x)) * float(np.sum(x)) / n
    baseline_shift = (t_bar * float(np.sum(x**2)) - cross) / A_n
    return ProjectionResult(
        b0=beta0 + baseline_shift * beta1,
        b1=beta1 * slope_ratio,
        A_n=A_n,
        n=n,
        d=d,
    )


def project_lstsq(
    times: np.ndarray,
    beta0: float,
    beta1: float,
    d: float,
) -> ProjectionResult:
    """Same projection through a generic least-squares solve."""
    t, x, A_n = _design(times, d)
    X = np.column_stack([np.ones_like(x), x])
    y = beta0 + beta1 * t
    (b0, b1), *_ = np.linalg.lstsq(X, y, rcond=None)
    return ProjectionResult(b0=float(b0), b1=float(b1), A_n=A_n, n=t.shape[0], d=d)
