__all__ = [
    "PMModel",
    "Field",
]

import re
from typing import Literal

from pydantic import BaseModel, Field

from panelmsm.exceptions import ConfigurationError
from panelmsm.utils import json_dumps, json_loads

#
# Common constants and types used everywhere
#

EngineMethod = Literal["ode", "piecewise", "homogeneous"]

EmissionKind = Literal[
    "exact",
    "categorical",
    "dirichlet",
    "categorical+dirichlet",
]

InitMode = Literal["estimated", "fixed"]

ParameterSliceName = Literal[
    "rates",
    "misclassification",
    "init",
    "emission",
]

#
# Common regexes
#

# state labels and covariate names end up as CSV column suffixes
LABEL_REGEX = r"^[a-zA-Z0-9_][a-zA-Z0-9_\-]*$"
COVARIATE_REGEX = r"^[a-zA-Z_][a-zA-Z0-9_]*$"

# transitions are named by 1-based source and target, e.g. "1-2"
TRANSITION_REGEX = r"^([1-9][0-9]*)-([1-9][0-9]*)$"

# design terms reserved by the rate model
RESERVED_TERMS = ("intercept", "time")


def parse_transition_name(name: str) -> tuple[int, int]:
    """Return 0-based (source, target) from a "r-s" transition name."""
    match = re.match(TRANSITION_REGEX, name)
    if match is None:
        raise ConfigurationError(f"Invalid transition name '{name}'")
    return int(match.group(1)) - 1, int(match.group(2)) - 1


def transition_name(source: int, target: int) -> str:
    """Name a 0-based transition the way configs and CSVs do."""
    return f"{source + 1}-{target + 1}"


#
# Pydantic model used for specs, configs and manifests
#


class PMModel(BaseModel):
    """Base panelmsm model."""

    class Config:
        """Model config."""

        allow_population_by_field_name = True
        arbitrary_types_allowed = True
        underscore_attrs_are_private = True
        json_loads = json_loads
        json_dumps = json_dumps
