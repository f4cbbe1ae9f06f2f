"""Observed-data log-likelihood by the scaled forward recursion.

For every subject

    L_i = pi' D_1 P(t_1, t_2) D_2 ... P(t_{n-1}, t_n) D_n 1

The forward row vector is renormalized after every record and the log
normalizers are accumulated, so long sequences do not underflow.
Emission log weights are shifted by their per-record maximum before
exponentiation.
"""

import time
from typing import NamedTuple

import numpy as np
from nxtools import logging

from panelmsm.likelihood.emission import emission_log_weights
from panelmsm.model.dataset import PanelDataset
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.engine import EngineSelector, transition_batch


class LogLikResult(NamedTuple):
    """Log-likelihood of a dataset.

    `per_subject` follows `subject_ids` (ascending). Subjects whose data
    are impossible under theta have -inf contributions and are listed in
    `impossible`.
    """

    total: float
    per_subject: np.ndarray
    subject_ids: list[int]
    eval_time: float
    impossible: list[int]

    @property
    def is_impossible(self) -> bool:
        return bool(self.impossible)


def _subject_loglik(
    initial: np.ndarray,
    P: np.ndarray,
    log_weights: np.ndarray,
) -> float:
    """Scaled forward pass over one subject; P has shape (n - 1, m, m)."""
    total = 0.0
    alpha = initial
    for k in range(log_weights.shape[0]):
        if k:
            alpha = alpha @ P[k - 1]
        row = log_weights[k]
        unbounded = np.isposinf(row)
        if np.any(unbounded):
            # 0 * inf is 0 for states the forward vector cannot reach
            if np.any(alpha[unbounded] > 0):
                return np.inf
            row = np.where(unbounded, -np.inf, row)
        shift = np.max(row)
        if shift == -np.inf:
            return -np.inf
        alpha = alpha * np.exp(row - shift)
        norm = alpha.sum()
        if not norm > 0:
            return -np.inf
        total += np.log(norm) + shift
        alpha = alpha / norm
    return float(total)


def loglik(
    spec: ModelSpec,
    theta: np.ndarray,
    data: PanelDataset,
    engine: EngineSelector | None = None,
) -> LogLikResult:
    """Exact log-likelihood of panel data under theta."""
    engine = engine or EngineSelector()
    start_time = time.perf_counter()
    realized = spec.realize(theta)
    rate_function = realized.rates

    subjects = data.subjects
    n_intervals = [subject.n - 1 for subject in subjects]
    total_intervals = sum(n_intervals)
    c = len(rate_function.covariates)
    starts = np.empty(total_intervals)
    widths = np.empty(total_intervals)
    X = np.empty((total_intervals, c))
    offset = 0
    for subject, count in zip(subjects, n_intervals):
        x = data.covariate_vector(subject, rate_function.covariates)
        starts[offset : offset + count] = subject.times[:-1]
        widths[offset : offset + count] = np.diff(subject.times)
        X[offset : offset + count] = x
        offset += count

    batch = transition_batch(rate_function, X, starts, widths, engine)

    per_subject = np.empty(len(subjects))
    impossible: list[int] = []
    offset = 0
    for i, (subject, count) in enumerate(zip(subjects, n_intervals)):
        log_weights = emission_log_weights(spec.emission, realized, subject)
        value = _subject_loglik(
            realized.initial, batch.P[offset : offset + count], log_weights
        )
        offset += count
        per_subject[i] = value
        if value == -np.inf:
            impossible.append(subject.id)

    if impossible:
        logging.debug(
            f"{len(impossible)} subjects have zero likelihood under theta "
            f"(first: {impossible[0]})"
        )

    total = float(np.sum(per_subject)) if len(subjects) else 0.0
    eval_time = time.perf_counter() - start_time
    logging.debug(
        f"loglik[{engine.label}] {total:.6f} over {len(subjects)} subjects "
        f"in {eval_time:.3f}s"
    )
    return LogLikResult(
        total=total,
        per_subject=per_subject,
        subject_ids=[subject.id for subject in subjects],
        eval_time=eval_time,
        impossible=impossible,
    )
