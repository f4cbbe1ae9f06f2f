__all__ = [
    "ProjectionResult",
    "RegimePanel",
    "SlopeBias",
    "check_baseline_bias",
    "check_slope_bias",
    "project_lstsq",
    "project_on_grid",
    "regime_experiment",
    "shifted_grid_times",
    "slope_bias_sweep",
]

from panelmsm.biaslab.bounds import (
    SlopeBias,
    check_baseline_bias,
    check_slope_bias,
    shifted_grid_times,
    slope_bias_sweep,
)
from panelmsm.biaslab.experiment import RegimePanel, regime_experiment
from panelmsm.biaslab.projection import (
    ProjectionResult,
    project_lstsq,
    project_on_grid,
)
