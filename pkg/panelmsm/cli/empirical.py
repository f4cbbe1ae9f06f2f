import argparse
import os

from nxtools import logging

from panelmsm.cli.common import (
    add_workers_argument,
    check_workers,
    ensure_dir,
    load_model_and_data,
)
from panelmsm.cli.manifest import RunManifest, write_manifest
from panelmsm.empirical.aalen_johansen import aalen_johansen
from panelmsm.empirical.counting import counting_from_paths, panel_to_counting
from panelmsm.empirical.nelson_aalen import nelson_aalen
from panelmsm.empirical.output import (
    write_estimates_csv,
    write_hazards_csv,
    write_transition_csv,
)
from panelmsm.empirical.recovery import recover_rate_coefficients
from panelmsm.exceptions import ConfigurationError
from panelmsm.simulation.study import read_paths_csv


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "empirical",
        help="Nelson-Aalen, Aalen-Johansen and l1 rate recovery from panel data",
    )
    parser.add_argument("--model", required=True, help="Model file (mask and design)")
    parser.add_argument("--data", required=True, help="Panel CSV")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument(
        "--paths",
        default=None,
        help="Latent path CSV of a simulation. Events are then fully observed.",
    )
    parser.add_argument(
        "--follow-up",
        type=float,
        default=None,
        help="Censoring time of the latent paths",
    )
    parser.add_argument("--seed", type=int, default=0, help="Restart seed")
    parser.add_argument(
        "--no-recovery",
        action="store_true",
        help="Skip the rate coefficient fit",
    )
    add_workers_argument(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> None:
    workers = check_workers(args.workers)
    if args.paths is not None and args.follow_up is None:
        raise ConfigurationError("--paths needs --follow-up")
    spec, data = load_model_and_data(args.model, args.data)
    out_dir = ensure_dir(args.out)
    manifest = RunManifest.from_args(
        "empirical",
        args,
        config_path=args.model,
        data_paths=[args.data] + ([args.paths] if args.paths else []),
        seed=args.seed,
        out_dir=out_dir,
    )
    manifest.add_input(args.model)
    manifest.add_input(args.data)
    if args.paths is not None:
        manifest.add_input(args.paths)

    with manifest.timer("estimate"):
        if args.paths is None:
            counting = panel_to_counting(
                data, spec.rates.mask_array(), stratify_by=spec.covariates
            )
        else:
            counting = counting_from_paths(
                read_paths_csv(args.paths),
                args.follow_up,
                spec.rates.mask_array(),
                covariates={subject.id: subject.covariates for subject in data},
                stratify_by=spec.covariates,
                absorbing=spec.states.absorbing,
            )
        hazards = nelson_aalen(counting)
        transitions = aalen_johansen(counting, hazards)

    written = [
        os.path.join(out_dir, "hazards.csv"),
        os.path.join(out_dir, "aalen_johansen.csv"),
    ]
    write_hazards_csv(hazards, written[0])
    write_transition_csv(transitions, written[1])

    if not args.no_recovery:
        with manifest.timer("recover"):
            estimates = recover_rate_coefficients(
                hazards, spec.rates, seed=args.seed, workers=workers
            )
        path = os.path.join(out_dir, "estimates.csv")
        write_estimates_csv(estimates, path)
        written.append(path)

    manifest.add_outputs(written)
    write_manifest(manifest, out_dir)
    logging.goodnews(
        f"Estimated {len(counting.transitions)} transitions in "
        f"{len(counting.strata)} strata from {counting.n_events} events"
    )
