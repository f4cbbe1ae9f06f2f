import argparse
import os

import numpy as np

from panelmsm.exceptions import ConfigurationError, DataError
from panelmsm.model.dataset import PanelDataset, read_panel_csv
from panelmsm.model.modelfile import load_model, load_theta
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.engine import ENGINE_METHODS, EngineSelector


def add_engine_arguments(
    parser: argparse.ArgumentParser,
    default: str | None = "ode",
) -> None:
    parser.add_argument(
        "--engine",
        choices=ENGINE_METHODS,
        default=default,
        help=f"Transition engine (default: {default or 'from the model file'})",
    )
    parser.add_argument(
        "--d",
        type=float,
        default=None,
        help="Grid resolution of the piecewise engine",
    )


def add_workers_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Worker processes (default: PANELMSM_WORKERS or physical cores)",
    )


def engine_from_args(args: argparse.Namespace) -> EngineSelector:
    if args.engine == "piecewise" and args.d is None:
        raise ConfigurationError("--engine piecewise needs --d")
    try:
        return EngineSelector.create(args.engine, args.d)
    except ValueError as e:
        raise ConfigurationError(str(e)) from None


def check_workers(workers: int | None) -> int | None:
    if workers is not None and workers < 1:
        raise ConfigurationError(f"--workers must be positive, got {workers}")
    return workers


def load_model_and_data(
    model_path: str,
    data_path: str,
) -> tuple[ModelSpec, PanelDataset]:
    spec = load_model(model_path)
    data = read_panel_csv(data_path, states=spec.states)
    missing = set(spec.covariates) - set(data.covariates)
    if missing:
        raise DataError(
            f"{data_path} lacks covariate columns "
            + ", ".join(f"cov_{name}" for name in sorted(missing))
        )
    if spec.emission.has_dirichlet and list(data.bands) != list(spec.emission.bands):
        raise DataError(
            f"{data_path} has emission bands {list(data.bands)}, "
            f"the model expects {list(spec.emission.bands)}"
        )
    return spec, data


def load_theta_arg(path: str | None, spec: ModelSpec) -> np.ndarray:
    """Theta from a file, or the prior location when no file is given."""
    if path is None:
        return spec.prior.loc.copy()
    return load_theta(path, spec)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
