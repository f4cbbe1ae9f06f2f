import os
import re
from typing import Literal

from pydantic import Field, ValidationError, validator

from panelmsm.model.modelfile import load_structured_file, validation_error
from panelmsm.types import COVARIATE_REGEX, PMModel


class ObservationScheme(PMModel):
    """When subjects are observed."""

    kind: Literal["empirical", "grid"] = Field(
        "empirical",
        description="empirical: gaps drawn from a weighted list and jittered. "
        "grid: fixed spacing from the start time.",
    )
    gaps: list[float] = Field(
        default_factory=lambda: [1.0],
        description="Inter-observation gaps of the empirical scheme",
    )
    weights: list[float] | None = Field(
        None,
        description="Probabilities of the gaps (uniform when omitted)",
    )
    jitter: float = Field(
        0.25,
        ge=0.0,
        lt=1.0,
        description="Every drawn gap is multiplied by Uniform(1 - jitter, 1 + jitter)",
    )
    spacing: float = Field(1.0, gt=0.0, description="Grid spacing")
    start: float = Field(0.0, ge=0.0, description="Time of the first observation")
    follow_up: float = Field(20.0, gt=0.0, description="Maximum follow-up time")
    missing_rate: float = Field(
        0.0,
        ge=0.0,
        lt=1.0,
        description="Probability that an observed label is dropped",
    )

    @validator("gaps")
    def validate_gaps(cls, value):
        if not value:
            raise ValueError("At least one gap is needed")
        if any(not gap > 0 for gap in value):
            raise ValueError("Gaps must be strictly positive")
        return value

    @validator("weights")
    def validate_weights(cls, value, values):
        if value is None:
            return value
        gaps = values.get("gaps") or []
        if len(value) != len(gaps):
            raise ValueError("Every gap needs a weight")
        if any(w < 0 for w in value) or abs(sum(value) - 1.0) > 1e-9:
            raise ValueError("Gap weights must be nonnegative and sum to 1")
        return value

    @property
    def mean_gap(self) -> float:
        if self.kind == "grid":
            return self.spacing
        weights = self.weights or [1.0 / len(self.gaps)] * len(self.gaps)
        return sum(g * w for g, w in zip(self.gaps, weights))


class CovariateSampler(PMModel):
    """Distribution of one baseline covariate."""

    kind: Literal["bernoulli", "normal", "constant"] = "bernoulli"
    p: float = Field(0.5, ge=0.0, le=1.0, description="Bernoulli probability")
    mean: float = Field(0.0, description="Normal mean")
    sd: float = Field(1.0, gt=0.0, description="Normal standard deviation")
    value: float = Field(0.0, description="Constant value")


class SimConfig(PMModel):
    """Simulation study configuration."""

    truth: str = Field(..., description="Path of the truth file")
    slope_scale: float | None = Field(
        None,
        description="Overrides the slope scale of the truth file",
    )
    n_subjects: int = Field(200, ge=0, description="Subjects per replicate")
    replicates: int = Field(10, ge=1, description="Number of datasets")
    seed: int = Field(0, ge=0, description="Master seed")
    window: float | None = Field(
        None,
        gt=0.0,
        description="Thinning lookahead window. Defaults to half the mean "
        "observation gap, capped at 0.1.",
    )
    scheme: ObservationScheme = Field(default_factory=ObservationScheme)
    covariates: dict[str, CovariateSampler] = Field(default_factory=dict)

    @validator("covariates")
    def validate_covariates(cls, value):
        for name in value:
            if not re.match(COVARIATE_REGEX, name):
                raise ValueError(f"Invalid covariate name '{name}'")
        return value

    @property
    def lookahead(self) -> float:
        if self.window is not None:
            return self.window
        return min(self.scheme.mean_gap / 2, 0.1)


def load_sim_config(path: str) -> SimConfig:
    """Load a simulation config; a relative truth path is resolved
    against the config file's directory."""
    source = load_structured_file(path)
    data = dict(source.data)
    section = data.pop("simulation", {})
    if not isinstance(section, dict):
        raise source.fail("[simulation] must be a table", "simulation")
    section = {**section, **data}
    try:
        config = SimConfig(**section)
    except ValidationError as e:
        raise validation_error(source, "simulation", e) from None
    if not os.path.isabs(config.truth):
        base = os.path.dirname(os.path.abspath(path))
        config.truth = os.path.join(base, config.truth)
    if not os.path.isfile(config.truth):
        raise source.fail(f"Truth file {config.truth} not found", "truth")
    return config
