"""Model and truth files.

Files are TOML, or YAML with the same structure when the extension is
.yml or .yaml. Every error is reported with the line of the offending key
when it can be located.
"""

import os
import re
from typing import Any, NamedTuple

import numpy as np
import toml
import yaml
from nxtools import logging
from pydantic import ValidationError

from panelmsm.exceptions import ConfigurationError
from panelmsm.model.emissions import EmissionModel
from panelmsm.model.parameters import InitSpec
from panelmsm.model.priors import PriorSpec
from panelmsm.model.rates import RateSpec
from panelmsm.model.spec import ModelSpec
from panelmsm.model.states import StateSpace
from panelmsm.types import parse_transition_name, transition_name
from panelmsm.utils import atomic_write


class LoadedFile(NamedTuple):
    path: str
    text: str
    data: dict[str, Any]

    def fail(self, message: str, *keys: str) -> ConfigurationError:
        """Build a line-anchored configuration error for the first key found."""
        for key in keys:
            line = find_key_line(self.text, key)
            if line is not None:
                return ConfigurationError(message, line=line, path=self.path)
        return ConfigurationError(f"{self.path}: {message}")


def find_key_line(text: str, key: str) -> int | None:
    """1-based line of a key assignment or table header, if any."""
    quoted = re.escape(key)
    assignment = re.compile(rf"""^\s*["']?{quoted}["']?\s*[=:]""")
    header = re.compile(rf"""^\s*\[+\s*(?:[^\]]*\.)?["']?{quoted}["']?\s*\]+""")
    for number, line in enumerate(text.splitlines(), start=1):
        if assignment.match(line) or header.match(line):
            return number
    return None


def load_structured_file(path: str) -> LoadedFile:
    """Read a TOML or YAML file into a dictionary."""
    if not os.path.isfile(path):
        raise ConfigurationError(f"Config file {path} not found")
    with open(path, encoding="utf-8") as f:
        text = f.read()

    if path.endswith((".yml", ".yaml")):
        try:
            data = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigurationError(
                f"Unable to parse YAML: {getattr(e, 'problem', e)}",
                line=line,
                path=path,
            ) from None
    else:
        try:
            data = toml.loads(text)
        except toml.TomlDecodeError as e:
            raise ConfigurationError(
                f"Unable to parse TOML: {e.msg}", line=e.lineno, path=path
            ) from None

    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a table")
    return LoadedFile(path=path, text=text, data=data)


def validation_error(source: LoadedFile, section: str, e: ValidationError):
    error = e.errors()[0]
    loc = [str(part) for part in error["loc"] if part != "__root__"]
    keys = [k for k in reversed(loc) if not k.isdigit()] + [section]
    where = ".".join([section, *loc])
    return source.fail(f"{where}: {error['msg']}", *keys)


def _section(source: LoadedFile, name: str, required: bool = True) -> dict:
    value = source.data.get(name)
    if value is None:
        if required:
            raise ConfigurationError(f"{source.path}: missing section [{name}]")
        return {}
    if not isinstance(value, dict):
        raise source.fail(f"[{name}] must be a table", name)
    return value


def _parse_states(source: LoadedFile) -> StateSpace:
    section = _section(source, "states")
    try:
        states = StateSpace(labels=section.get("labels", []))
        absorbing = [states.index(item) for item in section.get("absorbing", [])]
        return StateSpace(labels=states.labels, absorbing=absorbing)
    except ValidationError as e:
        raise validation_error(source, "states", e) from None
    except ValueError as e:
        raise source.fail(str(e), "absorbing", "states") from None


def _parse_rates(source: LoadedFile, m: int) -> RateSpec:
    transitions = _section(source, "transitions")
    section = _section(source, "rates", required=False)
    mask_raw = transitions.get("mask")
    if not isinstance(mask_raw, list) or len(mask_raw) != m:
        raise source.fail(f"mask must have {m} rows", "mask", "transitions")
    try:
        mask = [[bool(cell) for cell in row] for row in mask_raw]
    except TypeError:
        raise source.fail("mask rows must be lists", "mask") from None

    default = list(section.get("default", ["intercept"]))
    overrides = section.get("terms", {}) or {}
    pairs = [(r, s) for r, row in enumerate(mask) for s, cell in enumerate(row) if cell]
    for name in overrides:
        try:
            pair = parse_transition_name(name)
        except ConfigurationError:
            raise source.fail(f"Invalid transition name '{name}'", name) from None
        if pair not in pairs:
            raise source.fail(f"Transition {name} is not allowed by the mask", name)
    terms = [list(overrides.get(transition_name(r, s), default)) for r, s in pairs]

    try:
        return RateSpec(mask=mask, terms=terms)
    except ValidationError as e:
        raise validation_error(source, "rates", e) from None


def _parse_model(source: LoadedFile) -> ModelSpec:
    states = _parse_states(source)
    rates = _parse_rates(source, states.m)

    sections: dict[str, Any] = {}
    for name, model in (
        ("emissions", EmissionModel),
        ("priors", PriorSpec),
        ("init", InitSpec),
    ):
        try:
            sections[name] = model(**_section(source, name, required=False))
        except ValidationError as e:
            raise validation_error(source, name, e) from None

    try:
        return ModelSpec(
            states=states,
            rates=rates,
            emission=sections["emissions"],
            priors=sections["priors"],
            init=sections["init"],
        )
    except ValidationError as e:
        raise validation_error(source, "transitions", e) from None


def load_model(path: str) -> ModelSpec:
    """Load a model config file."""
    source = load_structured_file(path)
    spec = _parse_model(source)
    logging.debug(
        f"Loaded model from {path}: {spec.m} states, "
        f"{len(spec.rates.transitions)} transitions, {spec.p} parameters"
    )
    return spec


#
# Truth files
#


class Truth(NamedTuple):
    """True model of a simulation study.

    `theta` already has `slope_scale` applied to every time coefficient;
    `base_theta` is the vector as written in the file.
    """

    spec: ModelSpec
    theta: np.ndarray
    base_theta: np.ndarray
    slope_scale: float


def apply_slope_scale(spec: ModelSpec, theta: np.ndarray, scale: float) -> np.ndarray:
    """Multiply every `time` rate coefficient by `scale`."""
    theta = np.array(theta, dtype=float)
    for i, name in enumerate(spec.parameter_names):
        if name.startswith("beta.") and name.endswith(".time"):
            theta[i] *= scale
    return theta


def load_truth(path: str, slope_scale: float | None = None) -> Truth:
    """Load a truth file: a model file with [theta] and optional [truth] sections.

    `slope_scale` overrides the value stored in the file.
    """
    source = load_structured_file(path)
    spec = _parse_model(source)
    values = _section(source, "theta")
    try:
        base_theta = spec.theta_from_mapping(values, default=None)
    except ConfigurationError as e:
        raise source.fail(e.detail, "theta") from None

    truth_section = _section(source, "truth", required=False)
    if slope_scale is None:
        slope_scale = float(truth_section.get("slope_scale", 1.0))
    theta = apply_slope_scale(spec, base_theta, slope_scale)
    logging.debug(f"Loaded truth from {path} with slope scale {slope_scale}")
    return Truth(spec=spec, theta=theta, base_theta=base_theta, slope_scale=slope_scale)


def load_theta(path: str, spec: ModelSpec) -> np.ndarray:
    """Read a full parameter vector from the [theta] table of any file.

    Truth files carry their slope scale; it is applied here too.
    """
    source = load_structured_file(path)
    values = _section(source, "theta")
    try:
        theta = spec.theta_from_mapping(values, default=None)
    except ConfigurationError as e:
        raise source.fail(e.detail, "theta") from None
    truth_section = _section(source, "truth", required=False)
    slope_scale = float(truth_section.get("slope_scale", 1.0))
    return apply_slope_scale(spec, theta, slope_scale)


def model_to_dict(spec: ModelSpec) -> dict[str, Any]:
    """Serialize a model the way model files are written."""
    data: dict[str, Any] = {
        "states": {
            "labels": list(spec.states.labels),
            "absorbing": [spec.states.labels[s] for s in spec.states.absorbing],
        },
        "transitions": {
            "mask": [[int(cell) for cell in row] for row in spec.rates.mask],
        },
        "rates": {
            "terms": {
                name: list(design)
                for name, design in zip(spec.rates.transition_names, spec.rates.terms)
            },
        },
        "emissions": {"kind": spec.emission.kind},
        "priors": {
            "loc": spec.priors.loc,
            "scale": spec.priors.scale,
        },
        "init": {"mode": spec.init.mode},
    }
    if spec.emission.pattern is not None:
        data["emissions"]["pattern"] = [
            [int(cell) for cell in row] for row in spec.emission.pattern
        ]
    if spec.emission.bands:
        data["emissions"]["bands"] = list(spec.emission.bands)
    if spec.priors.slices:
        data["priors"]["slices"] = {
            name: override.dict(exclude_none=True)
            for name, override in spec.priors.slices.items()
        }
    if spec.init.probabilities is not None:
        data["init"]["probabilities"] = list(spec.init.probabilities)
    return data


def write_truth(path: str, truth: Truth) -> None:
    data = model_to_dict(truth.spec)
    data["theta"] = truth.spec.theta_to_mapping(truth.base_theta)
    data["truth"] = {"slope_scale": truth.slope_scale}
    atomic_write(path, toml.dumps(data))
