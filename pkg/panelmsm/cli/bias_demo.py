import argparse
import os

import pandas as pd
from nxtools import logging

from panelmsm.biaslab.bounds import check_baseline_bias, slope_bias_sweep
from panelmsm.biaslab.experiment import (
    BETA0,
    BETA1,
    RANDOM_SEED,
    RESOLUTION,
    SHIFT,
    regime_experiment,
)
from panelmsm.cli.common import ensure_dir
from panelmsm.cli.manifest import RunManifest, write_manifest
from panelmsm.utils import atomic_write

SWEEP_SPANS = [10.0, 100.0, 1000.0]
SWEEP_SUBJECTS = 200


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "bias-demo",
        help="Write the projection bias regimes and a slope bias sweep as CSV",
    )
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--seed", type=int, default=RANDOM_SEED)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> None:
    out_dir = ensure_dir(args.out)
    manifest = RunManifest.from_args(
        "bias-demo", args, seed=args.seed, out_dir=out_dir
    )
    panels = regime_experiment(out_dir, seed=args.seed)
    for panel in panels:
        logging.info(
            f"{panel.name}: b0={panel.projection.b0:.6f} b1={panel.projection.b1:.6f} "
            f"({panel.rows} points)"
        )
    bias = check_baseline_bias(SHIFT, RESOLUTION, BETA0, BETA1, panels[0].rows)
    logging.info(f"Baseline bias on shifted times: {bias:.12g}")

    rows = slope_bias_sweep(SWEEP_SPANS, SWEEP_SUBJECTS, BETA1, RESOLUTION, args.seed)
    sweep_path = os.path.join(out_dir, "slope_sweep.csv")
    df = pd.DataFrame([row._asdict() for row in rows])
    atomic_write(sweep_path, df.to_csv(index=False, lineterminator="\n"))

    manifest.add_outputs([panel.path for panel in panels] + [sweep_path])
    write_manifest(manifest, out_dir)
    logging.goodnews(f"Bias demo written to {out_dir}")
