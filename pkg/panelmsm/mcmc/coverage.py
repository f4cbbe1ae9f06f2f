"""Frequentist behaviour of posterior summaries over simulated replicates."""

from typing import NamedTuple, Sequence

import numpy as np

from panelmsm.exceptions import ChainError
from panelmsm.mcmc.summary import ParameterSummary


class CoverageResult(NamedTuple):
    names: tuple[str, ...]
    coverage: np.ndarray  # share of replicates whose interval holds the truth
    bias: np.ndarray  # (replicates, p) posterior mean minus truth
    level: float

    @property
    def n_replicates(self) -> int:
        return self.bias.shape[0]

    @property
    def median_abs_bias(self) -> np.ndarray:
        return np.median(np.abs(self.bias), axis=0)

    def as_dict(self) -> dict[str, float]:
        return {name: float(c) for name, c in zip(self.names, self.coverage)}


def coverage_study(
    truth: np.ndarray | dict[str, float],
    fits: Sequence[Sequence[ParameterSummary]],
    level: float | None = None,
) -> CoverageResult:
    """Coverage of HPD intervals across replicate fits.

    `fits` holds one list of summaries per replicate, all in the same
    parameter order. A dictionary truth is matched by parameter name.
    """
    if len(fits) < 2:
        raise ChainError(f"Coverage needs at least two replicates, got {len(fits)}")
    names = tuple(s.name for s in fits[0])
    for fit in fits[1:]:
        if tuple(s.name for s in fit) != names:
            raise ChainError("Replicate fits have different parameters")

    if isinstance(truth, dict):
        missing = [name for name in names if name not in truth]
        if missing:
            raise ChainError(f"No true value for {', '.join(missing)}")
        true_values = np.array([truth[name] for name in names], dtype=float)
    else:
        true_values = np.asarray(truth, dtype=float).reshape(-1)
        if true_values.shape[0] != len(names):
            raise ChainError(
                f"Truth has {true_values.shape[0]} values for {len(names)} parameters"
            )

    covered = np.array(
        [[s.contains(v) for s, v in zip(fit, true_values)] for fit in fits]
    )
    means = np.array([[s.mean for s in fit] for fit in fits])
    return CoverageResult(
        names=names,
        coverage=covered.mean(axis=0),
        bias=means - true_values,
        level=level if level is not None else fits[0][0].level,
    )
