"""Homogeneous transition matrices exp(h Q).

scipy.linalg.expm implements scaling and squaring with a Pade approximant
of degree up to 13, the scaling chosen from the 1-norm. Batched input of
shape (N, m, m) is handled matrix by matrix.
"""

import numpy as np
import scipy.linalg

from panelmsm.exceptions import IntegrationAccuracyError
from panelmsm.transitions.cleanup import cleanup_stochastic
from panelmsm.transitions.solution import TransitionBatch, TransitionSolution


def expm_batch(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise IntegrationAccuracyError("Generator has non-finite entries")
    return scipy.linalg.expm(A)


def solve_homogeneous(
    Q: np.ndarray,
    h: float,
    tol: float | None = None,
) -> TransitionSolution:
    """P(h) = exp(h Q) for a time-constant generator."""
    Q = np.asarray(Q, dtype=float)
    if not h >= 0:
        raise ValueError(f"Interval width must be nonnegative, got {h}")
    m = Q.shape[0]
    if h == 0:
        return TransitionSolution(
            P=np.eye(m), method="homogeneous", steps=0, err_estimate=0.0
        )
    P = cleanup_stochastic(expm_batch(h * Q), tol)
    return TransitionSolution(P=P, method="homogeneous", steps=1, err_estimate=0.0)


def homogeneous_batch(
    Q: np.ndarray,
    widths: np.ndarray,
    tol: float | None = None,
) -> TransitionBatch:
    """exp(h_n Q_n) for generators frozen at each interval start."""
    widths = np.asarray(widths, dtype=float)
    n, m, _ = Q.shape
    P = np.broadcast_to(np.eye(m), (n, m, m)).copy()
    active = widths > 0
    if np.any(active):
        P[active] = cleanup_stochastic(
            expm_batch(widths[active, None, None] * Q[active]), tol
        )
    return TransitionBatch(
        P=P,
        steps=active.astype(int),
        err_estimate=np.zeros(n),
    )
