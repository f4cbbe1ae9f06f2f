"""Synthetic panel studies."""

import os
from typing import NamedTuple

import numpy as np
import pandas as pd
from nxtools import logging

from panelmsm.exceptions import SimulationConfigError
from panelmsm.lib.pool import WorkerPool, split_chunks
from panelmsm.model.dataset import PanelDataset, Subject, write_panel_csv
from panelmsm.model.modelfile import Truth, load_truth, write_truth
from panelmsm.simulation.config import CovariateSampler, SimConfig
from panelmsm.simulation.observe import observe_path
from panelmsm.simulation.paths import PathSimulator, SamplePath
from panelmsm.utils import atomic_write, make_rng


class Study(NamedTuple):
    truth: Truth
    datasets: list[PanelDataset]
    paths: list[dict[int, SamplePath]]


def draw_covariate(sampler: CovariateSampler, rng: np.random.Generator) -> float:
    if sampler.kind == "bernoulli":
        return float(rng.random() < sampler.p)
    if sampler.kind == "normal":
        return float(rng.normal(sampler.mean, sampler.sd))
    return float(sampler.value)


def _simulate_chunk(
    truth: Truth,
    config: SimConfig,
    replicate: int,
    subject_ids: list[int],
) -> list[tuple[Subject, SamplePath]]:
    spec = truth.spec
    simulator = PathSimulator(spec, truth.theta, config.lookahead)
    absorbing = tuple(spec.states.absorbing)
    result = []
    for subject_id in subject_ids:
        rng = make_rng(config.seed, replicate, subject_id)
        covs = {
            name: draw_covariate(sampler, rng)
            for name, sampler in config.covariates.items()
        }
        path = simulator.simulate(covs, config.scheme.follow_up, rng)
        observation = observe_path(
            path,
            config.scheme,
            spec.emission,
            simulator.realized,
            rng,
            absorbing=absorbing,
        )
        subject = Subject.create(
            id=subject_id,
            times=observation.times,
            labels=observation.labels,
            emissions=observation.emissions,
            covariates=covs,
        )
        result.append((subject, path))
    return result


def simulate_replicate(
    truth: Truth,
    config: SimConfig,
    replicate: int,
    pool: WorkerPool | None = None,
) -> tuple[PanelDataset, dict[int, SamplePath]]:
    """One dataset; every subject has its own stream (seed, replicate, id)."""
    ids = list(range(1, config.n_subjects + 1))
    pool = pool or WorkerPool(1)
    chunks = split_chunks(ids, pool.workers)
    n = len(chunks)
    results = pool.map(
        _simulate_chunk, [truth] * n, [config] * n, [replicate] * n, chunks
    )
    pairs = [pair for chunk in results for pair in chunk]
    emission = truth.spec.emission
    dataset = PanelDataset(
        [subject for subject, _ in pairs],
        covariates=list(config.covariates),
        bands=list(emission.bands) if emission.has_dirichlet else [],
    )
    paths = {subject.id: path for subject, path in pairs}
    return dataset, paths


def simulate_study(
    config: SimConfig,
    truth: Truth | None = None,
    workers: int | None = 1,
) -> Study:
    """Simulate `config.replicates` independent datasets."""
    if truth is None:
        truth = load_truth(config.truth, slope_scale=config.slope_scale)
    missing = set(truth.spec.covariates) - set(config.covariates)
    if missing:
        raise SimulationConfigError(
            f"No sampler for covariates {', '.join(sorted(missing))}"
        )

    datasets = []
    paths = []
    with WorkerPool(workers) as pool:
        for replicate in range(1, config.replicates + 1):
            dataset, replicate_paths = simulate_replicate(
                truth, config, replicate, pool
            )
            datasets.append(dataset)
            paths.append(replicate_paths)
            logging.info(
                f"Simulated replicate {replicate}/{config.replicates}: {dataset}"
            )
    return Study(truth=truth, datasets=datasets, paths=paths)


#
# Output
#


def write_paths_csv(paths: dict[int, SamplePath], path: str) -> None:
    rows = [
        {"subject_id": subject_id, "time": float(t), "state": int(s) + 1}
        for subject_id, sample in sorted(paths.items())
        for t, s in zip(sample.times, sample.states)
    ]
    df = pd.DataFrame(rows, columns=["subject_id", "time", "state"])
    atomic_write(path, df.to_csv(index=False, lineterminator="\n"))


def read_paths_csv(path: str) -> dict[int, SamplePath]:
    df = pd.read_csv(path)
    return {
        int(subject_id): SamplePath(
            times=group["time"].to_numpy(dtype=float),
            states=group["state"].to_numpy(dtype=int) - 1,
        )
        for subject_id, group in df.groupby("subject_id", sort=True)
    }


def replicate_filename(kind: str, replicate: int) -> str:
    return f"{kind}_{replicate:03d}.csv"


def write_study(study: Study, out_dir: str) -> list[str]:
    """Write panel and latent-path CSVs of every replicate plus truth.toml."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    truth_path = os.path.join(out_dir, "truth.toml")
    write_truth(truth_path, study.truth)
    written.append(truth_path)
    for replicate, (dataset, paths) in enumerate(
        zip(study.datasets, study.paths), start=1
    ):
        panel_path = os.path.join(out_dir, replicate_filename("panel", replicate))
        paths_path = os.path.join(out_dir, replicate_filename("paths", replicate))
        write_panel_csv(dataset, panel_path)
        write_paths_csv(paths, paths_path)
        written.extend([panel_path, paths_path])
    return written
