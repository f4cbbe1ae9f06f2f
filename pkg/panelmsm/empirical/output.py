import pandas as pd

from panelmsm.empirical.aalen_johansen import TransitionEstimate
from panelmsm.empirical.nelson_aalen import CumulativeHazard
from panelmsm.empirical.recovery import RateEstimate
from panelmsm.utils import atomic_write


def _write(df: pd.DataFrame, path: str) -> None:
    atomic_write(path, df.to_csv(index=False, lineterminator="\n"))


def hazards_frame(hazards: list[CumulativeHazard]) -> pd.DataFrame:
    """Cumulative hazards at every event time, one column per transition."""
    frames = []
    names: list[str] = []
    for hazard in hazards:
        names = hazard.transition_names
        df = pd.DataFrame(hazard.values, columns=names)
        df.insert(0, "time", hazard.times)
        df.insert(0, "stratum", hazard.stratum.label)
        frames.append(df)
    if not frames:
        return pd.DataFrame(columns=["stratum", "time", *names])
    return pd.concat(frames, ignore_index=True)


def transition_frame(estimates: list[TransitionEstimate]) -> pd.DataFrame:
    frames = []
    columns: list[str] = []
    for estimate in estimates:
        m = estimate.m
        columns = [f"P{r + 1}-{s + 1}" for r in range(m) for s in range(m)]
        df = pd.DataFrame(estimate.P.reshape(-1, m * m), columns=columns)
        df.insert(0, "time", estimate.times)
        df.insert(0, "stratum", estimate.stratum.label)
        frames.append(df)
    if not frames:
        return pd.DataFrame(columns=["stratum", "time", *columns])
    return pd.concat(frames, ignore_index=True)


def estimates_frame(estimates: list[RateEstimate]) -> pd.DataFrame:
    rows = [
        {"transition": e.transition, "term": term, "estimate": float(value)}
        for e in estimates
        for term, value in zip(e.terms, e.coefficients)
    ]
    return pd.DataFrame(rows, columns=["transition", "term", "estimate"])


def write_hazards_csv(hazards: list[CumulativeHazard], path: str) -> None:
    _write(hazards_frame(hazards), path)


def write_transition_csv(estimates: list[TransitionEstimate], path: str) -> None:
    _write(transition_frame(estimates), path)


def write_estimates_csv(estimates: list[RateEstimate], path: str) -> None:
    _write(estimates_frame(estimates), path)
