import argparse

from nxtools import logging
from pydantic import ValidationError

from panelmsm.cli.common import add_workers_argument, check_workers, ensure_dir
from panelmsm.cli.manifest import RunManifest, write_manifest
from panelmsm.exceptions import ConfigurationError
from panelmsm.simulation.config import SimConfig, load_sim_config
from panelmsm.simulation.study import simulate_study, write_study


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "simulate",
        help="Simulate panel datasets from a truth file",
    )
    parser.add_argument("--config", required=True, help="Simulation config file")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--subjects", type=int, default=None)
    parser.add_argument("--replicates", type=int, default=None)
    parser.add_argument("--slope-scale", type=float, default=None)
    add_workers_argument(parser)
    parser.set_defaults(func=run)


def apply_overrides(config: SimConfig, args: argparse.Namespace) -> SimConfig:
    overrides = {
        "seed": args.seed,
        "n_subjects": args.subjects,
        "replicates": args.replicates,
        "slope_scale": args.slope_scale,
    }
    data = config.dict()
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimConfig(**data)
    except ValidationError as e:
        error = e.errors()[0]
        raise ConfigurationError(
            f"Invalid override {'.'.join(map(str, error['loc']))}: {error['msg']}"
        ) from None


def run(args: argparse.Namespace) -> None:
    workers = check_workers(args.workers)
    config = apply_overrides(load_sim_config(args.config), args)
    out_dir = ensure_dir(args.out)
    manifest = RunManifest.from_args(
        "simulate",
        args,
        config_path=args.config,
        data_paths=[config.truth],
        seed=config.seed,
        out_dir=out_dir,
    )
    manifest.add_input(args.config)
    manifest.add_input(config.truth)

    with manifest.timer("simulate"):
        study = simulate_study(config, workers=workers)
    with manifest.timer("write"):
        written = write_study(study, out_dir)
    manifest.add_outputs(written)
    write_manifest(manifest, out_dir)
    logging.goodnews(
        f"Simulated {config.replicates} replicates of {config.n_subjects} subjects "
        f"into {out_dir}"
    )
