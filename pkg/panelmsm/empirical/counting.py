"""Event-level multistate data.

A subject contributes at-risk spells: it occupies `state` on the
interval (start, end]. A spell that ends with a transition has a matching
event at `end`; a spell that ends without one is censored.
"""

from typing import NamedTuple, Sequence

import numpy as np
from nxtools import logging

from panelmsm.exceptions import DataConsistencyError
from panelmsm.model.dataset import MISSING_LABEL, PanelDataset
from panelmsm.simulation.paths import SamplePath
from panelmsm.types import transition_name

StratumKey = tuple[float, ...]


class StratumEvents(NamedTuple):
    """Events and at-risk spells of subjects sharing one covariate value."""

    key: StratumKey
    covariates: dict[str, float]
    event_subjects: np.ndarray
    event_times: np.ndarray
    event_sources: np.ndarray
    event_targets: np.ndarray
    spell_subjects: np.ndarray
    spell_starts: np.ndarray
    spell_ends: np.ndarray
    spell_states: np.ndarray

    @property
    def n_events(self) -> int:
        return self.event_times.shape[0]

    @property
    def label(self) -> str:
        if not self.covariates:
            return "all"
        return ",".join(f"{k}={v:g}" for k, v in self.covariates.items())


class CountingProcessData(NamedTuple):
    m: int
    transitions: list[tuple[int, int]]  # 0-based, row-major
    stratify_by: tuple[str, ...]
    strata: list[StratumEvents]  # ascending key

    @property
    def transition_names(self) -> list[str]:
        return [transition_name(r, s) for r, s in self.transitions]

    @property
    def n_events(self) -> int:
        return sum(stratum.n_events for stratum in self.strata)


class _SubjectHistory(NamedTuple):
    subject_id: int
    key: StratumKey
    spells: list[tuple[float, float, int]]
    events: list[tuple[float, int, int]]


def _build(
    histories: list[_SubjectHistory],
    m: int,
    transitions: list[tuple[int, int]],
    stratify_by: tuple[str, ...],
) -> CountingProcessData:
    allowed = set(transitions)
    by_key: dict[StratumKey, list[_SubjectHistory]] = {}
    for history in histories:
        by_key.setdefault(history.key, []).append(history)

    strata = []
    for key in sorted(by_key):
        group = by_key[key]
        events = [(h.subject_id, *e) for h in group for e in h.events]
        spells = [(h.subject_id, *s) for h in group for s in h.spells]
        stratum = StratumEvents(
            key=key,
            covariates=dict(zip(stratify_by, key)),
            event_subjects=np.array([e[0] for e in events], dtype=int),
            event_times=np.array([e[1] for e in events], dtype=float),
            event_sources=np.array([e[2] for e in events], dtype=int),
            event_targets=np.array([e[3] for e in events], dtype=int),
            spell_subjects=np.array([s[0] for s in spells], dtype=int),
            spell_starts=np.array([s[1] for s in spells], dtype=float),
            spell_ends=np.array([s[2] for s in spells], dtype=float),
            spell_states=np.array([s[3] for s in spells], dtype=int),
        )
        _validate(stratum, allowed)
        strata.append(stratum)
    return CountingProcessData(
        m=m,
        transitions=list(transitions),
        stratify_by=stratify_by,
        strata=strata,
    )


def _validate(stratum: StratumEvents, allowed: set[tuple[int, int]]) -> None:
    if np.any(stratum.spell_ends <= stratum.spell_starts):
        raise DataConsistencyError("At-risk spells must have positive length")
    spells = set(
        zip(
            stratum.spell_subjects.tolist(),
            stratum.spell_ends.tolist(),
            stratum.spell_states.tolist(),
        )
    )
    for subject, t, r, s in zip(
        stratum.event_subjects.tolist(),
        stratum.event_times.tolist(),
        stratum.event_sources.tolist(),
        stratum.event_targets.tolist(),
    ):
        if r == s:
            raise DataConsistencyError(
                f"Subject {subject}: event at {t} does not change state"
            )
        if (r, s) not in allowed:
            raise DataConsistencyError(
                f"Subject {subject}: transition {transition_name(r, s)} "
                "is not allowed"
            )
        if (subject, t, r) not in spells:
            raise DataConsistencyError(
                f"Subject {subject}: event at {t} is outside an at-risk spell "
                f"in state {r + 1}"
            )


def _stratum_key(covariates: dict[str, float], stratify_by: Sequence[str]):
    try:
        return tuple(float(covariates[name]) for name in stratify_by)
    except KeyError as e:
        raise DataConsistencyError(
            f"Cannot stratify by missing covariate {e}"
        ) from None


def counting_from_paths(
    paths: dict[int, SamplePath],
    follow_up: float,
    mask: np.ndarray,
    covariates: dict[int, dict[str, float]] | None = None,
    stratify_by: Sequence[str] = (),
    absorbing: Sequence[int] = (),
) -> CountingProcessData:
    """Fully observed event data from latent paths censored at `follow_up`."""
    mask = np.asarray(mask, dtype=bool)
    m = mask.shape[0]
    transitions = [tuple(pair) for pair in np.argwhere(mask).tolist()]
    stratify_by = tuple(stratify_by)
    absorbing = set(absorbing)
    histories = []
    for subject_id, path in sorted(paths.items()):
        covs = (covariates or {}).get(subject_id, {})
        times = np.append(path.times, follow_up)
        spells = []
        events = []
        for k, state in enumerate(path.states.tolist()):
            start, end = float(times[k]), float(min(times[k + 1], follow_up))
            if end <= start or state in absorbing:
                break
            spells.append((start, end, state))
            if k + 1 < path.states.shape[0] and times[k + 1] <= follow_up:
                events.append((end, state, int(path.states[k + 1])))
        histories.append(
            _SubjectHistory(
                subject_id=int(subject_id),
                key=_stratum_key(covs, stratify_by),
                spells=spells,
                events=events,
            )
        )
    return _build(histories, m, transitions, stratify_by)  # type: ignore[arg-type]


def panel_to_counting(
    data: PanelDataset,
    mask: np.ndarray,
    stratify_by: Sequence[str] = (),
) -> CountingProcessData:
    """Treat every observed label change as a transition at the later record.

    Records without a label are skipped. A change the mask does not allow
    cannot be a single transition; it ends the source spell without an
    event and is counted in a warning.
    """
    mask = np.asarray(mask, dtype=bool)
    m = mask.shape[0]
    transitions = [tuple(pair) for pair in np.argwhere(mask).tolist()]
    stratify_by = tuple(stratify_by)
    incompatible = 0
    histories = []
    for subject in data:
        observed = subject.labels != MISSING_LABEL
        times = subject.times[observed].tolist()
        labels = subject.labels[observed].tolist()
        spells = []
        events = []
        start = times[0] if times else 0.0
        for k in range(1, len(times)):
            source, target = labels[k - 1], labels[k]
            if source == target:
                continue
            spells.append((start, times[k], source))
            if mask[source, target]:
                events.append((times[k], source, target))
            else:
                incompatible += 1
            start = times[k]
        if times and times[-1] > start:
            spells.append((start, times[-1], labels[-1]))
        histories.append(
            _SubjectHistory(
                subject_id=subject.id,
                key=_stratum_key(subject.covariates, stratify_by),
                spells=spells,
                events=events,
            )
        )
    if incompatible:
        logging.warning(
            f"{incompatible} observed label changes are not allowed by the "
            "transition mask and were treated as censoring"
        )
    result = _build(histories, m, transitions, stratify_by)  # type: ignore[arg-type]
    logging.debug(
        f"Converted {len(data)} subjects into {result.n_events} events "
        f"in {len(result.strata)} strata"
    )
    return result
