import numpy as np

from panelmsm.config import msmconfig
from panelmsm.exceptions import IntegrationAccuracyError


def cleanup_stochastic(P_raw: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Clip to [0, 1] and renormalize rows of one or a batch of matrices.

    Deviations larger than `tol` are reported, never repaired.
    """
    if tol is None:
        tol = msmconfig.stochastic_tol
    P = np.asarray(P_raw, dtype=float)
    if not np.all(np.isfinite(P)):
        raise IntegrationAccuracyError("Transition matrix has non-finite entries")
    low = float(np.max(-P, initial=0.0))
    high = float(np.max(P - 1.0, initial=0.0))
    rows = float(np.max(np.abs(P.sum(axis=-1) - 1.0), initial=0.0))
    worst = max(low, high, rows)
    if worst > tol:
        raise IntegrationAccuracyError(
            f"Transition matrix deviates from a stochastic matrix by {worst:.3g} "
            f"(tolerance {tol:.3g})"
        )
    P = np.clip(P, 0.0, 1.0)
    return P / P.sum(axis=-1, keepdims=True)
