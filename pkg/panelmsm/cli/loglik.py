import argparse
import os

import pandas as pd
from nxtools import logging

from panelmsm.cli.common import (
    add_engine_arguments,
    add_workers_argument,
    check_workers,
    engine_from_args,
    ensure_dir,
    load_model_and_data,
    load_theta_arg,
)
from panelmsm.cli.manifest import RunManifest, write_manifest
from panelmsm.likelihood.forward import LogLikResult
from panelmsm.likelihood.parallel import loglik_parallel
from panelmsm.utils import atomic_write


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "loglik",
        help="Evaluate the log-likelihood at a parameter vector",
    )
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument("--data", required=True, help="Panel CSV")
    parser.add_argument(
        "--theta",
        default=None,
        help="File with a [theta] table (default: prior location)",
    )
    parser.add_argument("--out", required=True, help="Output directory")
    add_engine_arguments(parser)
    add_workers_argument(parser)
    parser.set_defaults(func=run)


def loglik_frame(result: LogLikResult) -> pd.DataFrame:
    rows = [
        {"subject_id": str(sid), "loglik": float(value)}
        for sid, value in zip(result.subject_ids, result.per_subject)
    ]
    rows.append({"subject_id": "total", "loglik": result.total})
    return pd.DataFrame(rows, columns=["subject_id", "loglik"])


def run(args: argparse.Namespace) -> None:
    workers = check_workers(args.workers)
    engine = engine_from_args(args)
    spec, data = load_model_and_data(args.model, args.data)
    theta = load_theta_arg(args.theta, spec)
    out_dir = ensure_dir(args.out)
    manifest = RunManifest.from_args(
        "loglik",
        args,
        config_path=args.model,
        data_paths=[args.data] + ([args.theta] if args.theta else []),
        engine=engine.key,
        out_dir=out_dir,
    )
    manifest.add_input(args.model)
    manifest.add_input(args.data)

    with manifest.timer("loglik"):
        result = loglik_parallel(spec, theta, data, engine, workers=workers)
    if result.is_impossible:
        logging.warning(
            f"Data of {len(result.impossible)} subjects are impossible under theta"
        )
    path = os.path.join(out_dir, "loglik.csv")
    atomic_write(path, loglik_frame(result).to_csv(index=False, lineterminator="\n"))
    manifest.add_outputs([path])
    write_manifest(manifest, out_dir)
    logging.goodnews(f"Log-likelihood [{engine.label}] {result.total:.10g}")
