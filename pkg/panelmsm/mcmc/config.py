from typing import Any

from pydantic import Field, ValidationError, root_validator, validator

from panelmsm.model.modelfile import load_structured_file, validation_error
from panelmsm.transitions.engine import EngineSelector
from panelmsm.types import PMModel


class ChainConfig(PMModel):
    """Settings of the random-walk Metropolis-Hastings sampler."""

    n_iter: int = Field(30_000, gt=1, description="Total iterations per chain")
    n_burnin: int = Field(
        10_000,
        gt=0,
        description="Burn-in iterations. The proposal is adapted only here.",
    )
    initial: dict[str, float] = Field(
        default_factory=dict,
        description="Starting values by parameter name. "
        "Unnamed parameters start at their prior location.",
    )
    proposal_scale: float = Field(
        0.05,
        gt=0.0,
        description="Standard deviation of the initial isotropic proposal",
    )
    adapt_window: int = Field(
        500,
        gt=1,
        description="Iterations between proposal covariance updates",
    )
    target_acceptance: float = Field(
        0.234,
        gt=0.0,
        lt=1.0,
        description="Burn-in acceptance rate the adaptation aims for. "
        "Reported as a diagnostic.",
    )
    seed: int = Field(0, ge=0, description="Master seed of the sampler")
    engine: str = Field(
        "ode",
        description='Transition engine: "ode", "homogeneous" or "piecewise(d)"',
    )
    chains: int = Field(1, ge=1, description="Independent chains")

    @validator("engine")
    def validate_engine(cls, value):
        EngineSelector.parse(value)
        return value

    @root_validator(skip_on_failure=True)
    def validate_burnin(cls, values):
        if not values["n_burnin"] < values["n_iter"]:
            raise ValueError(
                f"Burn-in ({values['n_burnin']}) must be shorter than "
                f"the chain ({values['n_iter']})"
            )
        return values

    @property
    def engine_selector(self) -> EngineSelector:
        return EngineSelector.parse(self.engine)

    @property
    def n_retained(self) -> int:
        return self.n_iter - self.n_burnin


def load_chain_config(path: str, **overrides: Any) -> ChainConfig:
    """Read the optional [sampler] table of a model file.

    Keyword overrides that are not None take precedence over the file.
    """
    source = load_structured_file(path)
    section = source.data.get("sampler", {})
    if not isinstance(section, dict):
        raise source.fail("[sampler] must be a table", "sampler")
    data = {**section, **{k: v for k, v in overrides.items() if v is not None}}
    try:
        return ChainConfig(**data)
    except ValidationError as e:
        raise validation_error(source, "sampler", e) from None
