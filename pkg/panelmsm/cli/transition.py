import argparse
import math
import os

import pandas as pd
from nxtools import logging

from panelmsm.cli.common import add_engine_arguments, engine_from_args, load_theta_arg
from panelmsm.cli.manifest import RunManifest, write_manifest
from panelmsm.exceptions import ConfigurationError
from panelmsm.model.modelfile import load_model
from panelmsm.transitions.engine import solve_transition
from panelmsm.utils import atomic_write


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "transition",
        help="Write the transition matrix P(t, t+h) as CSV",
    )
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument("--theta", default=None, help="File with a [theta] table")
    parser.add_argument("--t", type=float, required=True, help="Interval start")
    parser.add_argument("--h", type=float, required=True, help="Interval width")
    parser.add_argument(
        "--cov",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="Covariate value, repeatable",
    )
    parser.add_argument("--out", required=True, help="Output directory")
    add_engine_arguments(parser)
    parser.set_defaults(func=run)


def parse_covariates(items: list[str]) -> dict[str, float]:
    covs = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"Covariate '{item}' must look like name=value")
        try:
            covs[name.strip()] = float(value)
        except ValueError:
            raise ConfigurationError(
                f"Covariate '{item}' has no numeric value"
            ) from None
    return covs


def run(args: argparse.Namespace) -> None:
    engine = engine_from_args(args)
    if not math.isfinite(args.t):
        raise ConfigurationError(f"--t must be finite, got {args.t}")
    if not (math.isfinite(args.h) and args.h >= 0):
        raise ConfigurationError(f"--h must be a finite width >= 0, got {args.h}")
    spec = load_model(args.model)
    theta = load_theta_arg(args.theta, spec)
    covs = parse_covariates(args.cov)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    manifest = RunManifest.from_args(
        "transition",
        args,
        config_path=args.model,
        engine=engine.key,
        out_dir=out_dir,
    )
    with manifest.timer("solve"):
        solution = solve_transition(spec, theta, covs, args.t, args.h, engine)

    labels = spec.states.labels
    df = pd.DataFrame(solution.P, columns=labels)
    df.insert(0, "from", labels)
    path = os.path.join(out_dir, "transition.csv")
    atomic_write(path, df.to_csv(index=False, lineterminator="\n"))
    manifest.add_outputs([path])
    write_manifest(manifest, out_dir)
    logging.goodnews(
        f"P({args.t:g}, {args.t + args.h:g}) with {solution.label}: "
        f"{solution.steps} steps"
    )
