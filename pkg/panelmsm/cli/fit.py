import argparse
import os

from nxtools import logging

from panelmsm.cli.common import (
    add_engine_arguments,
    add_workers_argument,
    check_workers,
    engine_from_args,
    ensure_dir,
    load_model_and_data,
)
from panelmsm.cli.manifest import RunManifest, write_manifest
from panelmsm.mcmc.config import load_chain_config
from panelmsm.mcmc.sampler import run_chains
from panelmsm.mcmc.summary import summarize, write_chain_csv, write_summary_csv


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser(
        "fit",
        help="Sample the posterior of a model given panel data",
    )
    parser.add_argument("--model", required=True, help="Model file")
    parser.add_argument("--data", required=True, help="Panel CSV")
    parser.add_argument("--out", required=True, help="Output directory")
    add_engine_arguments(parser, default=None)
    parser.add_argument("--iter", type=int, default=None, help="Iterations per chain")
    parser.add_argument("--burnin", type=int, default=None, help="Burn-in iterations")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--chains", type=int, default=None)
    parser.add_argument("--proposal-scale", type=float, default=None)
    parser.add_argument("--adapt-window", type=int, default=None)
    parser.add_argument(
        "--level",
        type=float,
        default=0.95,
        help="Credible level of the HPD intervals (default: 0.95)",
    )
    add_workers_argument(parser)
    parser.set_defaults(func=run)


def chain_filename(chain: int, n_chains: int) -> str:
    if n_chains == 1:
        return "chain.csv"
    return f"chain_{chain + 1:03d}.csv"


def run(args: argparse.Namespace) -> None:
    workers = check_workers(args.workers)
    engine_key = engine_from_args(args).key if args.engine is not None else None
    spec, data = load_model_and_data(args.model, args.data)
    config = load_chain_config(
        args.model,
        n_iter=args.iter,
        n_burnin=args.burnin,
        seed=args.seed,
        chains=args.chains,
        proposal_scale=args.proposal_scale,
        adapt_window=args.adapt_window,
        engine=engine_key,
    )
    engine = config.engine_selector
    out_dir = ensure_dir(args.out)
    manifest = RunManifest.from_args(
        "fit",
        args,
        config_path=args.model,
        data_paths=[args.data],
        seed=config.seed,
        engine=engine.key,
        out_dir=out_dir,
    )
    manifest.add_input(args.model)
    manifest.add_input(args.data)

    with manifest.timer("sample"):
        chains = run_chains(spec, data, config, workers)

    written = []
    for index, chain in enumerate(chains):
        path = os.path.join(out_dir, chain_filename(index, len(chains)))
        write_chain_csv(chain, path)
        written.append(path)
    summaries = summarize(chains, args.level)
    summary_path = os.path.join(out_dir, "summary.csv")
    write_summary_csv(summaries, summary_path)
    written.append(summary_path)
    manifest.add_outputs(written)
    write_manifest(manifest, out_dir)
    logging.goodnews(f"Fit {spec.p} parameters with {engine.label} into {out_dir}")
