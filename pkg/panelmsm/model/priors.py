from typing import NamedTuple

import numpy as np
from pydantic import Field, validator
from scipy.stats import norm

from panelmsm.config import msmconfig
from panelmsm.exceptions import DimensionMismatchError
from panelmsm.model.parameters import ParameterLayout
from panelmsm.types import ParameterSliceName, PMModel


class PriorSlice(PMModel):
    loc: float | None = Field(None, description="Prior mean for this slice")
    scale: float | None = Field(None, description="Prior scale for this slice")

    @validator("scale")
    def validate_scale(cls, value):
        if value is not None and not value > 0:
            raise ValueError("Prior scale must be strictly positive")
        return value


class PriorSpec(PMModel):
    """Independent Gaussian priors on the unconstrained parameters."""

    loc: float = Field(0.0, title="Location", description="Default prior mean")
    scale: float = Field(
        default_factory=lambda: msmconfig.prior_scale,
        title="Scale",
        description="Default prior standard deviation",
    )
    slices: dict[ParameterSliceName, PriorSlice] = Field(
        default_factory=dict,
        title="Per-slice overrides",
        example={"rates": {"scale": 10.0}},
    )

    @validator("scale")
    def validate_scale(cls, value):
        if not value > 0:
            raise ValueError("Prior scale must be strictly positive")
        return value

    def resolve(self, layout: ParameterLayout) -> "ResolvedPrior":
        loc = np.full(layout.p, self.loc)
        scale = np.full(layout.p, self.scale)
        for slice_name, override in self.slices.items():
            s = layout.slices[slice_name]
            if override.loc is not None:
                loc[s] = override.loc
            if override.scale is not None:
                scale[s] = override.scale
        return ResolvedPrior(loc=loc, scale=scale)


class ResolvedPrior(NamedTuple):
    loc: np.ndarray
    scale: np.ndarray


def log_prior(theta: np.ndarray, prior: ResolvedPrior) -> float:
    """Sum of Gaussian log densities on the unconstrained scale."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != prior.loc.shape:
        raise DimensionMismatchError(
            f"Expected {prior.loc.shape[0]} parameters, got {theta.shape}"
        )
    return float(np.sum(norm.logpdf(theta, loc=prior.loc, scale=prior.scale)))
