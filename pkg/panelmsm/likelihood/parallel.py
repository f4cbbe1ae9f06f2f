import time

import numpy as np
from nxtools import logging

from panelmsm.lib.pool import WorkerPool, split_chunks
from panelmsm.likelihood.forward import LogLikResult, loglik
from panelmsm.model.dataset import PanelDataset
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.engine import EngineSelector


def _chunk_loglik(
    spec: ModelSpec,
    theta: np.ndarray,
    data: PanelDataset,
    engine: EngineSelector,
) -> tuple[np.ndarray, list[int]]:
    result = loglik(spec, theta, data, engine)
    return result.per_subject, result.impossible


def loglik_parallel(
    spec: ModelSpec,
    theta: np.ndarray,
    data: PanelDataset,
    engine: EngineSelector | None = None,
    workers: int | None = None,
    pool: WorkerPool | None = None,
) -> LogLikResult:
    """`loglik` with subjects distributed over worker processes.

    Subjects are split into contiguous chunks in ascending id order and
    the per-subject contributions are summed in that order, so the total
    does not depend on the number of workers.
    """
    engine = engine or EngineSelector()
    if workers is not None and workers < 1:
        raise ValueError(f"Worker count must be positive, got {workers}")
    own_pool = pool is None
    pool = pool or WorkerPool(workers)

    start_time = time.perf_counter()
    try:
        if pool.workers == 1 or len(data) < 2:
            chunks = [data]
        else:
            chunks = [
                data.subset(ids) for ids in split_chunks(data.ids, pool.workers)
            ]
        n = len(chunks)
        results = pool.map(_chunk_loglik, [spec] * n, [theta] * n, chunks, [engine] * n)
    finally:
        if own_pool:
            pool.shutdown()

    per_subject = (
        np.concatenate([values for values, _ in results])
        if results
        else np.zeros(0)
    )
    impossible = [sid for _, chunk_impossible in results for sid in chunk_impossible]
    total = float(np.sum(per_subject)) if per_subject.size else 0.0
    eval_time = time.perf_counter() - start_time
    logging.debug(
        f"loglik_parallel[{engine.label}] {total:.6f} with {pool.workers} workers "
        f"in {eval_time:.3f}s"
    )
    return LogLikResult(
        total=total,
        per_subject=per_subject,
        subject_ids=data.ids,
        eval_time=eval_time,
        impossible=impossible,
    )
