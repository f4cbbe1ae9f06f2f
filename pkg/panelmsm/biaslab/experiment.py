"""Three observation regimes of the projection bias, as plot-ready CSV.

integer: t_i = i, the times sit on the grid and the fit is exact.
shifted: t_i = i + 0.6, the intercept is off by 0.6 * beta1 for every n.
random: t_i uniform on [0, 10], the slope bias shrinks as spread grows.
"""

import os
from typing import NamedTuple

import numpy as np
import pandas as pd

from panelmsm.biaslab.projection import ProjectionResult, project_on_grid
from panelmsm.transitions.grid import g_d_array
from panelmsm.utils import atomic_write, make_rng

BETA0 = -0.5
BETA1 = 1.0
RESOLUTION = 1.0
SHIFT = 0.6
GRID_SUBJECTS = 20
RANDOM_SUBJECTS = 200
RANDOM_SPAN = 10.0
RANDOM_SEED = 20200611


class RegimePanel(NamedTuple):
    name: str
    path: str
    projection: ProjectionResult
    rows: int


def regime_times(seed: int = RANDOM_SEED) -> dict[str, np.ndarray]:
    grid = np.arange(1, GRID_SUBJECTS + 1, dtype=float)
    random = np.sort(make_rng(seed).uniform(0.0, RANDOM_SPAN, RANDOM_SUBJECTS))
    return {
        "integer": grid,
        "shifted": grid + SHIFT,
        "random": random,
    }


def regime_frame(times: np.ndarray, projection: ProjectionResult) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t": times,
            "g_d": g_d_array(times, projection.d),
            "y": BETA0 + BETA1 * times,
            "b0": projection.b0,
            "b1": projection.b1,
            "beta0": BETA0,
            "beta1": BETA1,
        }
    )


def regime_experiment(out_dir: str, seed: int = RANDOM_SEED) -> list[RegimePanel]:
    """Write regime_<name>.csv for the three regimes."""
    os.makedirs(out_dir, exist_ok=True)
    panels = []
    for name, times in regime_times(seed).items():
        projection = project_on_grid(times, BETA0, BETA1, RESOLUTION)
        df = regime_frame(times, projection)
        path = os.path.join(out_dir, f"regime_{name}.csv")
        atomic_write(path, df.to_csv(index=False, lineterminator="\n"))
        panels.append(
            RegimePanel(name=name, path=path, projection=projection, rows=len(df))
        )
    return panels
