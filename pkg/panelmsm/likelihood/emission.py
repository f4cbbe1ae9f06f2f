"""Diagonal emission matrices of observation records."""

from typing import NamedTuple

import numpy as np

from panelmsm.exceptions import DataError
from panelmsm.model.dataset import MISSING_LABEL, Record, Subject
from panelmsm.model.emissions import SIMPLEX_TOL, EmissionModel, dirichlet_logpdf
from panelmsm.model.spec import ModelSpec, RealizedModel


class EmissionMatrix(NamedTuple):
    """Diagonal of D for one record; off-diagonal entries are zero."""

    diag: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.diag)


def _check_simplex(x: np.ndarray, time: float) -> None:
    if np.any(x < 0) or abs(float(x.sum()) - 1.0) > SIMPLEX_TOL:
        raise DataError(f"Emission vector at time {time} is not on the simplex")


def emission_log_weights(
    model: EmissionModel,
    realized: RealizedModel,
    subject: Subject,
) -> np.ndarray:
    """log D diagonals of every record of a subject, shape (n, m).

    Absent channels contribute log 1 = 0; impossible states get -inf.
    """
    m = realized.misclassification.shape[0]
    n = subject.n
    result = np.zeros((n, m))

    labels = subject.labels
    observed = labels != MISSING_LABEL
    if np.any(observed):
        if np.any(labels[observed] >= m) or np.any(labels[observed] < 0):
            raise DataError(f"Subject {subject.id}: observed state out of range 1..{m}")
        with np.errstate(divide="ignore"):
            log_E = np.log(realized.misclassification)
        result[observed] += log_E[:, labels[observed]].T

    if model.has_dirichlet and subject.emissions is not None:
        assert realized.concentrations is not None
        for k in range(n):
            x = subject.emission_at(k)
            if x is None:
                continue
            _check_simplex(x, float(subject.times[k]))
            with np.errstate(invalid="ignore"):
                result[k] += dirichlet_logpdf(x, realized.concentrations)
        # a structural zero label cell stays zero under an unbounded density
        result[np.isnan(result)] = -np.inf

    return result


def emission_diag(spec: ModelSpec, record: Record, theta: np.ndarray) -> EmissionMatrix:
    """D for a single record under parameters theta."""
    realized = spec.realize(theta)
    m = spec.m
    diag = np.ones(m)
    if record.label is not None:
        if not 0 <= record.label < m:
            raise DataError(f"Observed state {record.label + 1} out of range 1..{m}")
        diag = diag * realized.misclassification[:, record.label]
    if spec.emission.has_dirichlet and record.emission is not None:
        assert realized.concentrations is not None
        x = np.asarray(record.emission, dtype=float)
        _check_simplex(x, record.time)
        diag = diag * np.exp(dirichlet_logpdf(x, realized.concentrations))
    return EmissionMatrix(diag=diag)
