__all__ = [
    "EmissionModel",
    "InitSpec",
    "ModelSpec",
    "PanelDataset",
    "ParameterLayout",
    "PriorSpec",
    "RateSpec",
    "RealizedModel",
    "StateSpace",
    "Subject",
    "build_rate_matrix",
    "load_model",
    "load_truth",
    "log_prior",
    "pack",
    "read_panel_csv",
    "unpack",
    "write_panel_csv",
]

from panelmsm.model.dataset import (
    PanelDataset,
    Subject,
    read_panel_csv,
    write_panel_csv,
)
from panelmsm.model.emissions import EmissionModel
from panelmsm.model.modelfile import load_model, load_truth
from panelmsm.model.parameters import InitSpec, ParameterLayout, pack, unpack
from panelmsm.model.priors import PriorSpec, log_prior
from panelmsm.model.rates import RateSpec, build_rate_matrix
from panelmsm.model.spec import ModelSpec, RealizedModel
from panelmsm.model.states import StateSpace
