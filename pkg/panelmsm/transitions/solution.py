from typing import NamedTuple

import numpy as np

from panelmsm.types import EngineMethod


class TransitionSolution(NamedTuple):
    """Transition matrix P(t, t+h) and solver metadata."""

    P: np.ndarray
    method: EngineMethod
    steps: int
    err_estimate: float
    d: float | None = None

    @property
    def label(self) -> str:
        if self.method == "piecewise":
            return f"piecewise({self.d:g})"
        return self.method


class TransitionBatch(NamedTuple):
    """Transition matrices of many intervals at once."""

    P: np.ndarray  # (N, m, m)
    steps: np.ndarray  # (N,)
    err_estimate: np.ndarray  # (N,)
