import math
from typing import NamedTuple

import numpy as np
from nxtools import logging

from panelmsm.model.rates import RateFunction
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.cleanup import cleanup_stochastic
from panelmsm.transitions.expm import homogeneous_batch
from panelmsm.transitions.grid import PiecewiseGrid
from panelmsm.transitions.ode import integrate_batch
from panelmsm.transitions.piecewise import FactorCache, piecewise_batch
from panelmsm.transitions.solution import TransitionBatch, TransitionSolution
from panelmsm.types import EngineMethod

ENGINE_METHODS: tuple[EngineMethod, ...] = ("ode", "piecewise", "homogeneous")


class EngineSelector(NamedTuple):
    """Which method computes transition matrices."""

    method: EngineMethod = "ode"
    d: float | None = None

    @classmethod
    def create(cls, method: str, d: float | None = None) -> "EngineSelector":
        if method not in ENGINE_METHODS:
            raise ValueError(
                f"Unknown engine '{method}', "
                f"expected one of {', '.join(ENGINE_METHODS)}"
            )
        if method == "piecewise":
            if d is None:
                raise ValueError("The piecewise engine needs a grid resolution d")
            if not (d > 0 and math.isfinite(d)):
                raise ValueError(f"Grid resolution must be positive, got {d}")
            return cls(method="piecewise", d=float(d))
        return cls(method=method)  # type: ignore[arg-type]

    @classmethod
    def parse(cls, text: str) -> "EngineSelector":
        """Parse "ode", "homogeneous" or "piecewise(d)"."""
        text = text.strip()
        if text.startswith("piecewise(") and text.endswith(")"):
            return cls.create("piecewise", float(text[len("piecewise(") : -1]))
        return cls.create(text)

    @property
    def label(self) -> str:
        if self.method == "piecewise":
            return f"piecewise({self.d:g})"
        return self.method

    @property
    def key(self) -> str:
        """Exact text form that `parse` reads back."""
        if self.method == "piecewise":
            return f"piecewise({self.d!r})"
        return self.method


def transition_batch(
    rate_function: RateFunction,
    X: np.ndarray,
    starts: np.ndarray,
    widths: np.ndarray,
    engine: EngineSelector,
    rtol: float | None = None,
    atol: float | None = None,
    tol: float | None = None,
) -> TransitionBatch:
    """Transition matrices of many intervals with the selected engine.

    The homogeneous engine freezes the rates at each interval start.
    """
    starts = np.asarray(starts, dtype=float).reshape(-1)
    widths = np.asarray(widths, dtype=float).reshape(-1)

    if engine.method == "ode":
        batch = integrate_batch(rate_function, X, starts, widths, rtol=rtol, atol=atol)
        active = widths > 0
        if np.any(active):
            batch.P[active] = cleanup_stochastic(batch.P[active], tol)
        return batch

    if engine.method == "piecewise":
        assert engine.d is not None
        cache = FactorCache(rate_function, PiecewiseGrid.create(engine.d))
        batch = piecewise_batch(
            rate_function, X, starts, widths, engine.d, tol=tol, cache=cache
        )
        logging.debug(
            f"Piecewise d={engine.d:g}: {len(cache)} factors, "
            f"{cache.hits} cache hits, {cache.misses} misses"
        )
        return batch

    c = rate_function.gamma.shape[1]
    Q = rate_function(starts, np.asarray(X, dtype=float).reshape(starts.shape[0], c))
    return homogeneous_batch(Q, widths, tol=tol)


def solve_transition(
    spec: ModelSpec,
    theta: np.ndarray,
    covs: dict[str, float] | np.ndarray,
    t: float,
    h: float,
    engine: EngineSelector,
) -> TransitionSolution:
    """P(t, t+h) for one covariate vector with the selected engine."""
    if not h >= 0:
        raise ValueError(f"Interval width must be nonnegative, got {h}")
    rate_function = spec.rate_function(theta)
    x = rate_function.covariate_vector(covs)
    batch = transition_batch(
        rate_function,
        x[None, :],
        np.array([t], dtype=float),
        np.array([h], dtype=float),
        engine,
    )
    return TransitionSolution(
        P=batch.P[0],
        method=engine.method,
        steps=int(batch.steps[0]),
        err_estimate=float(batch.err_estimate[0]),
        d=engine.d,
    )
