from typing import NamedTuple

import numpy as np

from panelmsm.empirical.counting import CountingProcessData, StratumEvents
from panelmsm.exceptions import DataConsistencyError
from panelmsm.types import transition_name


def at_risk(stratum: StratumEvents, state: int, t: np.ndarray) -> np.ndarray:
    """Number of spells in `state` with start < t <= end."""
    select = stratum.spell_states == state
    starts = np.sort(stratum.spell_starts[select])
    ends = np.sort(stratum.spell_ends[select])
    t = np.asarray(t, dtype=float)
    return np.searchsorted(starts, t, side="left") - np.searchsorted(
        ends, t, side="left"
    )


class CumulativeHazard(NamedTuple):
    """Right-continuous step functions A_j(t) of one stratum.

    `increments[k, j]` is the jump of transition j at `times[k]`.
    """

    stratum: StratumEvents
    transitions: list[tuple[int, int]]
    times: np.ndarray  # (K,) distinct event times
    increments: np.ndarray  # (K, J)

    @property
    def values(self) -> np.ndarray:
        return np.cumsum(self.increments, axis=0)

    @property
    def transition_names(self) -> list[str]:
        return [transition_name(r, s) for r, s in self.transitions]

    def at(self, t: float | np.ndarray) -> np.ndarray:
        """A(t) for every transition; zero before the first event."""
        index = np.searchsorted(self.times, t, side="right")
        padded = np.vstack([np.zeros((1, len(self.transitions))), self.values])
        return padded[index]

    def jumps(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Jump times of transition j and the values right after them."""
        select = self.increments[:, j] > 0
        return self.times[select], self.values[select, j]


def _stratum_hazard(
    stratum: StratumEvents,
    transitions: list[tuple[int, int]],
) -> CumulativeHazard:
    times = np.unique(stratum.event_times)
    increments = np.zeros((times.shape[0], len(transitions)))
    if times.shape[0]:
        index = np.searchsorted(times, stratum.event_times)
        for j, (r, s) in enumerate(transitions):
            select = (stratum.event_sources == r) & (stratum.event_targets == s)
            counts = np.bincount(index[select], minlength=times.shape[0])
            if not counts.any():
                continue
            risk = at_risk(stratum, r, times)
            bad = (counts > 0) & (risk <= 0)
            if np.any(bad):
                t = times[np.nonzero(bad)[0][0]]
                raise DataConsistencyError(
                    f"Stratum {stratum.label}: {transition_name(r, s)} event "
                    f"at {t} with nobody at risk"
                )
            increments[:, j] = np.divide(
                counts, risk, out=np.zeros(times.shape[0]), where=counts > 0
            )
    return CumulativeHazard(
        stratum=stratum,
        transitions=transitions,
        times=times,
        increments=increments,
    )


def nelson_aalen(data: CountingProcessData) -> list[CumulativeHazard]:
    """Nelson-Aalen estimate of every allowed transition, per stratum.

    Tied events share one jump dN(t) / Y(t).
    """
    return [_stratum_hazard(stratum, data.transitions) for stratum in data.strata]
