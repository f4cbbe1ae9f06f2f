from typing import NamedTuple

import numpy as np
from pydantic import Field, root_validator

from panelmsm.model.emissions import EmissionModel
from panelmsm.model.parameters import (
    InitSpec,
    ParameterLayout,
    ParameterViews,
    initial_distribution,
    pack,
    theta_from_mapping,
    theta_to_mapping,
    unpack,
)
from panelmsm.model.priors import PriorSpec, ResolvedPrior, log_prior
from panelmsm.model.rates import RateFunction, RateSpec
from panelmsm.model.states import StateSpace
from panelmsm.types import PMModel


class RealizedModel(NamedTuple):
    """Constrained quantities of one parameter vector."""

    rates: RateFunction
    misclassification: np.ndarray  # (m, m) row-stochastic
    initial: np.ndarray  # (m,)
    concentrations: np.ndarray | None  # (m, bands)


class ModelSpec(PMModel):
    """Complete model: states, rates, emissions, priors and initial distribution."""

    states: StateSpace = Field(..., title="State space")
    rates: RateSpec = Field(..., title="Rate model")
    emission: EmissionModel = Field(default_factory=EmissionModel, title="Emissions")
    priors: PriorSpec = Field(default_factory=PriorSpec, title="Priors")
    init: InitSpec = Field(default_factory=InitSpec, title="Initial distribution")

    _layout: ParameterLayout | None = None
    _prior: ResolvedPrior | None = None

    @root_validator(skip_on_failure=True)
    def validate_dimensions(cls, values):
        states: StateSpace = values["states"]
        rates: RateSpec = values["rates"]
        emission: EmissionModel = values["emission"]
        init: InitSpec = values["init"]
        m = states.m
        if rates.m != m:
            raise ValueError(
                f"Transition mask is {rates.m}x{rates.m}, expected {m}x{m}"
            )
        for state in states.absorbing:
            if any(rates.mask[state]):
                raise ValueError(
                    f"Absorbing state '{states.labels[state]}' has allowed exits"
                )
        if emission.pattern is not None and len(emission.pattern) != m:
            raise ValueError(
                f"Misclassification pattern must be {m}x{m}, "
                f"got {len(emission.pattern)} rows"
            )
        if init.probabilities is not None and len(init.probabilities) != m:
            raise ValueError(f"Expected {m} initial probabilities")
        return values

    @property
    def m(self) -> int:
        return self.states.m

    @property
    def covariates(self) -> list[str]:
        return self.rates.covariates

    @property
    def layout(self) -> ParameterLayout:
        if self._layout is None:
            groups = {
                "rates": self.rates.coefficient_names,
                "misclassification": self.emission.misclassification_names(self.m),
                "init": (
                    [f"init.{s + 1}" for s in range(1, self.m)]
                    if self.init.mode == "estimated"
                    else []
                ),
                "emission": self.emission.emission_names(self.states.labels),
            }
            self._layout = ParameterLayout.build(groups)
        return self._layout

    @property
    def parameter_names(self) -> tuple[str, ...]:
        return self.layout.names

    @property
    def p(self) -> int:
        return self.layout.p

    @property
    def prior(self) -> ResolvedPrior:
        if self._prior is None:
            self._prior = self.priors.resolve(self.layout)
        return self._prior

    def unpack(self, theta: np.ndarray) -> ParameterViews:
        return unpack(theta, self.layout)

    def pack(self, views: ParameterViews) -> np.ndarray:
        return pack(views, self.layout)

    def theta_from_mapping(
        self,
        mapping: dict[str, float],
        default: float | None = 0.0,
    ) -> np.ndarray:
        return theta_from_mapping(mapping, self.layout, default)

    def theta_to_mapping(self, theta: np.ndarray) -> dict[str, float]:
        return theta_to_mapping(theta, self.layout)

    def rate_function(self, theta: np.ndarray) -> RateFunction:
        return self.rates.compile(self.unpack(theta).rates)

    def initial_distribution(self, theta: np.ndarray) -> np.ndarray:
        if self.init.mode == "fixed":
            assert self.init.probabilities is not None
            return np.array(self.init.probabilities, dtype=float)
        return initial_distribution(self.unpack(theta).init, self.m)

    def realize(self, theta: np.ndarray) -> RealizedModel:
        views = self.unpack(theta)
        if self.init.mode == "fixed":
            assert self.init.probabilities is not None
            initial = np.array(self.init.probabilities, dtype=float)
        else:
            initial = initial_distribution(views.init, self.m)
        concentrations = None
        if self.emission.has_dirichlet:
            concentrations = self.emission.concentrations(views.emission, self.m)
        return RealizedModel(
            rates=self.rates.compile(views.rates),
            misclassification=self.emission.misclassification_matrix(
                views.misclassification, self.m
            ),
            initial=initial,
            concentrations=concentrations,
        )

    def log_prior(self, theta: np.ndarray) -> float:
        return log_prior(theta, self.prior)
