"""Process pool used for subject-level and chain-level parallelism."""

from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Any, Callable, Iterable, TypeVar

from nxtools import logging

from panelmsm.config import msmconfig

T = TypeVar("T")


def split_chunks(items: list[T], n_chunks: int) -> list[list[T]]:
    """Split into at most `n_chunks` contiguous chunks of near-equal size."""
    n_chunks = max(1, min(n_chunks, len(items)))
    size, extra = divmod(len(items), n_chunks)
    chunks = []
    start = 0
    for i in range(n_chunks):
        stop = start + size + (1 if i < extra else 0)
        chunks.append(items[start:stop])
        start = stop
    return [chunk for chunk in chunks if chunk]


class WorkerPool:
    """Lazily started process pool.

    With a single worker everything runs inline in the calling process.
    Results are always returned in submission order.
    """

    def __init__(self, workers: int | None = None) -> None:
        self.workers = max(1, workers or msmconfig.workers)
        self.executor: Executor | None = None

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *args) -> None:
        self.shutdown()

    def start(self) -> None:
        if self.executor is None and self.workers > 1:
            logging.debug(f"Starting process pool with {self.workers} workers")
            self.executor = ProcessPoolExecutor(max_workers=self.workers)

    def shutdown(self) -> None:
        if self.executor is not None:
            self.executor.shutdown()
            self.executor = None

    def map(self, fn: Callable[..., Any], *iterables: Iterable[Any]) -> list[Any]:
        if self.workers == 1:
            return [fn(*args) for args in zip(*iterables)]
        self.start()
        assert self.executor is not None
        return list(self.executor.map(fn, *iterables))
