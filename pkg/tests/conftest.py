import os

import numpy as np
import pytest

from panelmsm.model.modelfile import load_model
from panelmsm.model.parameters import InitSpec
from panelmsm.model.rates import RateSpec
from panelmsm.model.spec import ModelSpec
from panelmsm.model.states import StateSpace

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(REPO_ROOT, "configs")


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Run long reproduction checks",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, name)


def forward_spec(terms: list[str] | None = None) -> ModelSpec:
    """Two states, one transition 1 -> 2 with rate exp(b0 + b1 t)."""
    return ModelSpec(
        states=StateSpace(labels=["alive", "dead"], absorbing=[1]),
        rates=RateSpec(
            mask=[[False, True], [False, False]],
            terms=[terms or ["intercept", "time"]],
        ),
        init=InitSpec(mode="fixed", probabilities=[1.0, 0.0]),
    )


def full_spec(m: int, terms: list[str] | None = None) -> ModelSpec:
    """All-to-all model without absorbing states."""
    mask = [[r != s for s in range(m)] for r in range(m)]
    design = terms or ["intercept"]
    return ModelSpec(
        states=StateSpace(labels=[f"s{r + 1}" for r in range(m)]),
        rates=RateSpec(mask=mask, terms=[list(design)] * (m * (m - 1))),
    )


@pytest.fixture
def cav_spec() -> ModelSpec:
    return load_model(config_path("cav_model.toml"))


@pytest.fixture
def two_state_spec() -> ModelSpec:
    return forward_spec()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
