from typing import NamedTuple

import numpy as np

from panelmsm.empirical.counting import CountingProcessData, StratumEvents
from panelmsm.empirical.nelson_aalen import CumulativeHazard, nelson_aalen
from panelmsm.exceptions import DataConsistencyError


class TransitionEstimate(NamedTuple):
    """Product-limit estimate of P(0, t] as a step function."""

    stratum: StratumEvents
    times: np.ndarray  # (K,)
    P: np.ndarray  # (K, m, m), value right after times[k]

    @property
    def m(self) -> int:
        return self.P.shape[1]

    def at(self, t: float) -> np.ndarray:
        k = int(np.searchsorted(self.times, t, side="right"))
        if k == 0:
            return np.eye(self.m)
        return self.P[k - 1]


def product_integral(hazard: CumulativeHazard, m: int) -> TransitionEstimate:
    """prod over event times of (I + dA), with all ties in one factor."""
    source = np.array([r for r, _ in hazard.transitions], dtype=int)
    target = np.array([s for _, s in hazard.transitions], dtype=int)
    P = np.eye(m)
    result = np.empty((hazard.times.shape[0], m, m))
    for k, t in enumerate(hazard.times):
        factor = np.zeros((m, m))
        np.add.at(factor, (source, target), hazard.increments[k])
        factor[np.diag_indices(m)] = 1.0 - factor.sum(axis=1)
        if np.any(np.diag(factor) < 0):
            r = int(np.nonzero(np.diag(factor) < 0)[0][0])
            raise DataConsistencyError(
                f"Stratum {hazard.stratum.label}: more exits than subjects at "
                f"risk in state {r + 1} at {t}"
            )
        P = P @ factor
        result[k] = P
    return TransitionEstimate(stratum=hazard.stratum, times=hazard.times, P=result)


def aalen_johansen(
    data: CountingProcessData,
    hazards: list[CumulativeHazard] | None = None,
) -> list[TransitionEstimate]:
    """Aalen-Johansen estimate of P(0, t] per stratum."""
    hazards = hazards if hazards is not None else nelson_aalen(data)
    return [product_integral(hazard, data.m) for hazard in hazards]
