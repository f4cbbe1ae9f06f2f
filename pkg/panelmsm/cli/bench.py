import argparse
import os
import time
from typing import NamedTuple

import numpy as np
import pandas as pd
from nxtools import logging
from rich.console import Console
from rich.table import Table

from panelmsm.cli.common import (
    add_workers_argument,
    check_workers,
    ensure_dir,
    load_model_and_data,
    load_theta_arg,
)
from panelmsm.cli.manifest import RunManifest, write_manifest
from panelmsm.exceptions import ConfigurationError
from panelmsm.lib.pool import WorkerPool
from panelmsm.likelihood.parallel import loglik_parallel
from panelmsm.model.dataset import PanelDataset
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.engine import EngineSelector
from panelmsm.utils import atomic_write

DEFAULT_ENGINES = "ode,piecewise(2),piecewise(1),piecewise(0.16666666666666666)"


class Timing(NamedTuple):
    engine: EngineSelector
    repetitions: int
    mean_seconds: float
    sd_seconds: float
    loglik: float


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "bench",
        help="Time likelihood evaluations per engine",
    )
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument("--data", required=True, help="Panel CSV")
    parser.add_argument(
        "--theta",
        default=None,
        help="File with a [theta] table (default: prior location)",
    )
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument(
        "--engines",
        default=DEFAULT_ENGINES,
        help=f"Comma separated engines (default: {DEFAULT_ENGINES})",
    )
    parser.add_argument("--repetitions", type=int, default=5)
    add_workers_argument(parser)
    parser.set_defaults(func=run)


def parse_engines(text: str) -> list[EngineSelector]:
    engines = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            engines.append(EngineSelector.parse(item))
        except ValueError as e:
            raise ConfigurationError(f"Invalid engine '{item}': {e}") from None
    if not engines:
        raise ConfigurationError("No engines to benchmark")
    return engines


def time_engine(
    spec: ModelSpec,
    theta: np.ndarray,
    data: PanelDataset,
    engine: EngineSelector,
    repetitions: int,
    pool: WorkerPool,
) -> Timing:
    """Wall-clock seconds of `repetitions` likelihood evaluations."""
    seconds = []
    value = 0.0
    for _ in range(repetitions):
        start = time.perf_counter()
        value = loglik_parallel(spec, theta, data, engine, pool=pool).total
        seconds.append(time.perf_counter() - start)
    sd = float(np.std(seconds, ddof=1)) if repetitions > 1 else 0.0
    logging.debug(f"{engine.label}: {np.mean(seconds):.4f}s per evaluation")
    return Timing(
        engine=engine,
        repetitions=repetitions,
        mean_seconds=float(np.mean(seconds)),
        sd_seconds=sd,
        loglik=value,
    )


def timing_frame(timings: list[Timing]) -> pd.DataFrame:
    rows = [
        {
            "engine": t.engine.method,
            "d": t.engine.d if t.engine.d is not None else "",
            "repetitions": t.repetitions,
            "mean_seconds": t.mean_seconds,
            "sd_seconds": t.sd_seconds,
        }
        for t in timings
    ]
    return pd.DataFrame(
        rows, columns=["engine", "d", "repetitions", "mean_seconds", "sd_seconds"]
    )


def print_timings(timings: list[Timing]) -> None:
    table = Table(title="Likelihood evaluation time")
    table.add_column("Engine")
    table.add_column("Mean (s)", justify="right")
    table.add_column("SD (s)", justify="right")
    table.add_column("Log-likelihood", justify="right")
    for t in timings:
        table.add_row(
            t.engine.label,
            f"{t.mean_seconds:.4f}",
            f"{t.sd_seconds:.4f}",
            f"{t.loglik:.6f}",
        )
    Console().print(table)


def run(args: argparse.Namespace) -> None:
    workers = check_workers(args.workers)
    if args.repetitions < 1:
        raise ConfigurationError("--repetitions must be positive")
    engines = parse_engines(args.engines)
    spec, data = load_model_and_data(args.model, args.data)
    theta = load_theta_arg(args.theta, spec)
    out_dir = ensure_dir(args.out)
    manifest = RunManifest.from_args(
        "bench",
        args,
        config_path=args.model,
        data_paths=[args.data],
        engine=",".join(e.key for e in engines),
        out_dir=out_dir,
    )
    manifest.add_input(args.model)
    manifest.add_input(args.data)

    timings = []
    with WorkerPool(workers) as pool:
        # warm up the pool so process start-up is not timed
        loglik_parallel(spec, theta, data, engines[0], pool=pool)
        for engine in engines:
            with manifest.timer(engine.key):
                timings.append(
                    time_engine(spec, theta, data, engine, args.repetitions, pool)
                )

    path = os.path.join(out_dir, "timing.csv")
    atomic_write(path, timing_frame(timings).to_csv(index=False, lineterminator="\n"))
    manifest.add_outputs([path])
    write_manifest(manifest, out_dir)
    print_timings(timings)
