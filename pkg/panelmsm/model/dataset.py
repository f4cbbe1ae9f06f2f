"""Panel data container and its CSV format.

Long format, one row per record:

    subject_id,time,obs_state,cov_<name>...,emit_<band>...

`obs_state` holds the 1-based state index (or a state label when a state
space is supplied) and is empty for a missing label. A record whose
emit_ cells are all empty has no emission vector.
"""

from typing import Iterator, NamedTuple

import numpy as np
import pandas as pd
from nxtools import logging

from panelmsm.exceptions import DataError
from panelmsm.model.emissions import SIMPLEX_TOL
from panelmsm.model.states import StateSpace
from panelmsm.utils import atomic_write

MISSING_LABEL = -1


class Record(NamedTuple):
    time: float
    label: int | None  # 0-based
    emission: np.ndarray | None


class Subject(NamedTuple):
    """One subject's records, stored column-wise.

    `labels` uses MISSING_LABEL for records without an observed state.
    An emission row of NaN marks a record without an emission vector.
    """

    id: int
    covariates: dict[str, float]
    times: np.ndarray  # (n,)
    labels: np.ndarray  # (n,) int
    emissions: np.ndarray | None  # (n, bands), all-NaN rows are absent

    @classmethod
    def create(
        cls,
        id: int,
        times,
        labels=None,
        emissions=None,
        covariates: dict[str, float] | None = None,
    ) -> "Subject":
        times = np.asarray(times, dtype=float).reshape(-1)
        n = times.shape[0]
        if labels is None:
            labels = np.full(n, MISSING_LABEL, dtype=int)
        labels = np.array(
            [MISSING_LABEL if label is None else label for label in labels],
            dtype=int,
        )
        if labels.shape != (n,):
            raise DataError(f"Subject {id}: {n} times but {labels.shape[0]} labels")
        if n == 0:
            raise DataError(f"Subject {id} has no records")
        if not np.all(np.isfinite(times)):
            raise DataError(f"Subject {id}: record times must be finite")
        if np.any(np.diff(times) <= 0):
            k = int(np.nonzero(np.diff(times) <= 0)[0][0])
            raise DataError(
                f"Subject {id}: times must strictly increase "
                f"({times[k]} followed by {times[k + 1]})"
            )
        if emissions is not None:
            emissions = np.asarray(emissions, dtype=float)
            if emissions.ndim != 2 or emissions.shape[0] != n:
                raise DataError(f"Subject {id}: emission matrix must have {n} rows")
            blank = np.isnan(emissions)
            partial = np.any(blank, axis=1) & ~np.all(blank, axis=1)
            if np.any(partial):
                k = int(np.nonzero(partial)[0][0])
                raise DataError(
                    f"Subject {id}: emission vector at time {times[k]} "
                    "is only partly filled"
                )
            present = ~np.all(blank, axis=1)
            bad = present & (
                np.any(emissions < 0, axis=1)
                | (np.abs(emissions.sum(axis=1) - 1.0) > SIMPLEX_TOL)
            )
            if np.any(bad):
                k = int(np.nonzero(bad)[0][0])
                raise DataError(
                    f"Subject {id}: emission vector at time {times[k]} "
                    "is not on the simplex"
                )
        return cls(
            id=int(id),
            covariates={k: float(v) for k, v in (covariates or {}).items()},
            times=times,
            labels=labels,
            emissions=emissions,
        )

    @property
    def n(self) -> int:
        return self.times.shape[0]

    def emission_at(self, k: int) -> np.ndarray | None:
        if self.emissions is None or np.all(np.isnan(self.emissions[k])):
            return None
        return self.emissions[k]

    @property
    def records(self) -> Iterator[Record]:
        for k in range(self.n):
            label = int(self.labels[k])
            yield Record(
                time=float(self.times[k]),
                label=None if label == MISSING_LABEL else label,
                emission=self.emission_at(k),
            )


class PanelDataset:
    """Independent subjects observed at discrete times.

    Subjects are kept sorted by ascending id. All subjects share the same
    covariate names and emission bands.
    """

    def __init__(
        self,
        subjects: list[Subject] | tuple[Subject, ...] = (),
        covariates: list[str] | tuple[str, ...] = (),
        bands: list[str] | tuple[str, ...] = (),
    ) -> None:
        self.covariates = tuple(covariates)
        self.bands = tuple(bands)
        self.subjects = tuple(sorted(subjects, key=lambda s: s.id))
        ids = [s.id for s in self.subjects]
        if len(set(ids)) != len(ids):
            raise DataError("Subject ids must be unique")
        for subject in self.subjects:
            missing = set(self.covariates) - set(subject.covariates)
            if missing:
                raise DataError(
                    f"Subject {subject.id} lacks covariates {sorted(missing)}"
                )
            if self.bands:
                if subject.emissions is None or subject.emissions.shape[1] != len(
                    self.bands
                ):
                    raise DataError(
                        f"Subject {subject.id} needs {len(self.bands)} emission bands"
                    )

    def __len__(self) -> int:
        return len(self.subjects)

    def __iter__(self) -> Iterator[Subject]:
        return iter(self.subjects)

    def __repr__(self) -> str:
        return f"<PanelDataset subjects={len(self)} records={self.n_records}>"

    @property
    def ids(self) -> list[int]:
        return [s.id for s in self.subjects]

    @property
    def n_records(self) -> int:
        return sum(s.n for s in self.subjects)

    def covariate_vector(self, subject: Subject, names: list[str] | tuple[str, ...]):
        try:
            return np.array([subject.covariates[name] for name in names], dtype=float)
        except KeyError as e:
            raise DataError(f"Subject {subject.id} lacks covariate {e}") from None

    def subset(self, ids: list[int]) -> "PanelDataset":
        keep = set(ids)
        return PanelDataset(
            [s for s in self.subjects if s.id in keep],
            covariates=self.covariates,
            bands=self.bands,
        )

    def check_labels(self, m: int) -> None:
        for subject in self.subjects:
            labels = subject.labels
            bad = (labels != MISSING_LABEL) & ((labels < 0) | (labels >= m))
            if np.any(bad):
                raise DataError(
                    f"Subject {subject.id}: observed state out of range 1..{m}"
                )


#
# CSV
#


def _parse_label(value, states: StateSpace | None) -> int:
    if pd.isna(value) or str(value).strip() == "":
        return MISSING_LABEL
    text = str(value).strip()
    if states is not None:
        try:
            return states.index(text)
        except ValueError as e:
            raise DataError(str(e)) from None
    try:
        index = int(float(text))
    except ValueError:
        raise DataError(f"Invalid observed state '{text}'") from None
    if index < 1:
        raise DataError(f"Observed states are 1-based, got {index}")
    return index - 1


def read_panel_csv(path: str, states: StateSpace | None = None) -> PanelDataset:
    """Load a long-format panel CSV."""
    try:
        df = pd.read_csv(path, dtype={"obs_state": str}, keep_default_na=False)
    except FileNotFoundError:
        raise DataError(f"Panel file {path} not found") from None
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Unable to parse {path}: {e}") from None

    for column in ("subject_id", "time", "obs_state"):
        if column not in df.columns:
            raise DataError(f"{path}: missing column '{column}'")

    cov_columns = [c for c in df.columns if c.startswith("cov_")]
    emit_columns = [c for c in df.columns if c.startswith("emit_")]
    covariates = [c.removeprefix("cov_") for c in cov_columns]
    bands = [c.removeprefix("emit_") for c in emit_columns]

    subjects: list[Subject] = []
    # groupby sorts by subject id; rows keep their file order within a subject
    for subject_id, group in df.groupby("subject_id", sort=True):
        covs: dict[str, float] = {}
        for name, column in zip(covariates, cov_columns):
            values = pd.to_numeric(group[column], errors="coerce").to_numpy()
            if np.any(np.isnan(values)) or np.any(values != values[0]):
                raise DataError(
                    f"{path}: covariate '{name}' of subject {subject_id} "
                    "must be numeric and constant"
                )
            covs[name] = float(values[0])
        emissions = None
        if emit_columns:
            cells = group[emit_columns].astype(str).apply(lambda c: c.str.strip())
            cells = cells.mask(cells == "")
            try:
                emissions = cells.apply(pd.to_numeric).to_numpy(dtype=float)
            except (TypeError, ValueError) as e:
                raise DataError(
                    f"{path}: invalid emission value for subject {subject_id}: {e}"
                ) from None
        try:
            subject = Subject.create(
                id=int(subject_id),
                times=group["time"].to_numpy(dtype=float),
                labels=[_parse_label(v, states) for v in group["obs_state"]],
                emissions=emissions,
                covariates=covs,
            )
        except DataError as e:
            raise DataError(f"{path}: {e.detail}") from None
        subjects.append(subject)

    dataset = PanelDataset(subjects, covariates=covariates, bands=bands)
    if states is not None:
        dataset.check_labels(states.m)
    logging.debug(f"Loaded {dataset} from {path}")
    return dataset


def panel_to_frame(dataset: PanelDataset) -> pd.DataFrame:
    rows = []
    for subject in dataset:
        for k, record in enumerate(subject.records):
            row = {
                "subject_id": subject.id,
                "time": record.time,
                "obs_state": "" if record.label is None else str(record.label + 1),
            }
            for name in dataset.covariates:
                row[f"cov_{name}"] = subject.covariates[name]
            if record.emission is not None:
                for band, value in zip(dataset.bands, record.emission):
                    row[f"emit_{band}"] = float(value)
            rows.append(row)
    columns = (
        ["subject_id", "time", "obs_state"]
        + [f"cov_{name}" for name in dataset.covariates]
        + [f"emit_{band}" for band in dataset.bands]
    )
    return pd.DataFrame(rows, columns=columns)


def write_panel_csv(dataset: PanelDataset, path: str) -> None:
    content = panel_to_frame(dataset).to_csv(index=False, lineterminator="\n")
    atomic_write(path, content)
