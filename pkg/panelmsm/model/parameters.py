"""Flat parameter vector and its named layout.

The vector is laid out as

    rates | misclassification | init | emission

and every slice is stored on the unconstrained scale: rate coefficients
as they are, misclassification cells and initial-state probabilities as
logits against a reference cell, Dirichlet concentrations as logs.
"""

from typing import NamedTuple

import numpy as np
from pydantic import Field, validator
from scipy.special import softmax

from panelmsm.exceptions import ConfigurationError, DimensionMismatchError
from panelmsm.types import InitMode, ParameterSliceName, PMModel

SLICE_ORDER: tuple[ParameterSliceName, ...] = (
    "rates",
    "misclassification",
    "init",
    "emission",
)


class InitSpec(PMModel):
    """Initial state distribution."""

    mode: InitMode = Field(
        "estimated",
        title="Mode",
        description="estimated: multinomial logits in theta, state 1 is the "
        "reference. fixed: probabilities given here, nothing in theta.",
    )
    probabilities: list[float] | None = Field(
        None,
        title="Probabilities",
        description="Initial state probabilities for the fixed mode",
        example=[1.0, 0.0, 0.0, 0.0],
    )

    @validator("probabilities")
    def validate_probabilities(cls, value, values):
        if value is None:
            if values.get("mode") == "fixed":
                raise ValueError("Fixed initial distribution needs probabilities")
            return value
        if any(p < 0 for p in value):
            raise ValueError("Initial probabilities must be nonnegative")
        if abs(sum(value) - 1.0) > 1e-9:
            raise ValueError("Initial probabilities must sum to 1")
        return value


class ParameterLayout(NamedTuple):
    """Names and slices of the flat parameter vector."""

    names: tuple[str, ...]
    slices: dict[str, slice]

    @classmethod
    def build(cls, groups: dict[str, list[str]]) -> "ParameterLayout":
        names: list[str] = []
        slices: dict[str, slice] = {}
        for slice_name in SLICE_ORDER:
            group = groups.get(slice_name, [])
            slices[slice_name] = slice(len(names), len(names) + len(group))
            names.extend(group)
        if len(set(names)) != len(names):
            raise ConfigurationError("Parameter names are not unique")
        return cls(names=tuple(names), slices=slices)

    @property
    def p(self) -> int:
        return len(self.names)

    def size(self, slice_name: str) -> int:
        s = self.slices[slice_name]
        return s.stop - s.start

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ConfigurationError(f"Unknown parameter '{name}'") from None


class ParameterViews(NamedTuple):
    """Unconstrained slices of one parameter vector."""

    rates: np.ndarray
    misclassification: np.ndarray
    init: np.ndarray
    emission: np.ndarray


def unpack(theta: np.ndarray, layout: ParameterLayout) -> ParameterViews:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (layout.p,):
        raise DimensionMismatchError(
            f"Expected a parameter vector of length {layout.p}, got {theta.shape}"
        )
    return ParameterViews(
        **{name: theta[layout.slices[name]].copy() for name in SLICE_ORDER}
    )


def pack(views: ParameterViews, layout: ParameterLayout) -> np.ndarray:
    parts = []
    for name in SLICE_ORDER:
        part = np.asarray(getattr(views, name), dtype=float).reshape(-1)
        if part.shape[0] != layout.size(name):
            raise DimensionMismatchError(
                f"Slice '{name}' needs {layout.size(name)} values, "
                f"got {part.shape[0]}"
            )
        parts.append(part)
    return np.concatenate(parts) if parts else np.zeros(0)


def initial_distribution(logits: np.ndarray, m: int) -> np.ndarray:
    """Multinomial logit with state 1 as the reference category."""
    logits = np.asarray(logits, dtype=float)
    if logits.shape != (m - 1,):
        raise DimensionMismatchError(
            f"Expected {m - 1} initial-state logits, got {logits.shape}"
        )
    return softmax(np.concatenate([[0.0], logits]))


def theta_from_mapping(
    mapping: dict[str, float],
    layout: ParameterLayout,
    default: float | None = 0.0,
) -> np.ndarray:
    """Build theta from named values.

    Unnamed coordinates take `default`; with default None every
    coordinate must be named.
    """
    theta = np.full(layout.p, np.nan if default is None else default)
    for name, value in mapping.items():
        theta[layout.index(name)] = float(value)
    if default is None:
        missing = [n for n, v in zip(layout.names, theta) if np.isnan(v)]
        if missing:
            raise ConfigurationError(f"Missing parameter values: {', '.join(missing)}")
    return theta


def theta_to_mapping(theta: np.ndarray, layout: ParameterLayout) -> dict[str, float]:
    return {name: float(value) for name, value in zip(layout.names, theta)}
