"""Rate coefficients from cumulative hazard estimates.

For a log-linear rate exp(c + b t), with c collecting the intercept and
the covariate terms, the cumulative rate from 0 is

    g(t) = exp(c) * (exp(b t) - 1) / b        (t * exp(c) when b -> 0)

Coefficients are chosen to minimize the l1 distance between g and the
estimated step function over all jump times and strata.
"""

from typing import NamedTuple

import numpy as np
from nxtools import logging
from scipy.optimize import minimize

from panelmsm.empirical.nelson_aalen import CumulativeHazard
from panelmsm.exceptions import DataConsistencyError
from panelmsm.lib.pool import WorkerPool
from panelmsm.model.rates import RateSpec
from panelmsm.types import transition_name
from panelmsm.utils import make_rng

SLOPE_LIMIT = 1e-8
RESTARTS = 5
TOLERANCE = 1e-10
POLISH_ROUNDS = 3


def cumulative_rate(
    c: float | np.ndarray,
    slope: float,
    t: np.ndarray,
) -> np.ndarray:
    """Integral of exp(c + slope * s) over [0, t]."""
    t = np.asarray(t, dtype=float)
    if abs(slope) < SLOPE_LIMIT:
        return t * np.exp(c)
    return np.exp(c) * np.expm1(slope * t) / slope


class RateEstimate(NamedTuple):
    transition: str
    terms: tuple[str, ...]
    coefficients: np.ndarray
    loss: float

    def as_dict(self) -> dict[str, float]:
        return {term: float(v) for term, v in zip(self.terms, self.coefficients)}


class _Targets(NamedTuple):
    times: np.ndarray
    values: np.ndarray
    design: np.ndarray  # (n, number of non-time terms)


def _collect(
    hazards: list[CumulativeHazard],
    j: int,
    terms: list[str],
) -> _Targets:
    static_terms = [term for term in terms if term != "time"]
    times, values, rows = [], [], []
    for hazard in hazards:
        covs = hazard.stratum.covariates
        row = []
        for term in static_terms:
            if term == "intercept":
                row.append(1.0)
            elif term in covs:
                row.append(covs[term])
            else:
                raise DataConsistencyError(
                    f"Design term '{term}' needs hazards stratified by it"
                )
        jump_times, jump_values = hazard.jumps(j)
        times.append(jump_times)
        values.append(jump_values)
        rows.append(np.tile(row, (jump_times.shape[0], 1)))
    return _Targets(
        times=np.concatenate(times),
        values=np.concatenate(values),
        design=np.vstack(rows),
    )


def _unpack(
    beta: np.ndarray,
    terms: list[str],
) -> tuple[np.ndarray, float]:
    static = np.array([v for v, term in zip(beta, terms) if term != "time"])
    slope = float(beta[terms.index("time")]) if "time" in terms else 0.0
    return static, slope


def _l1_loss(beta: np.ndarray, targets: _Targets, terms: list[str]) -> float:
    static, slope = _unpack(beta, terms)
    c = targets.design @ static
    with np.errstate(over="ignore", invalid="ignore"):
        fitted = cumulative_rate(c, slope, targets.times)
    loss = float(np.sum(np.abs(fitted - targets.values)))
    return loss if np.isfinite(loss) else np.inf


def _minimize(start: np.ndarray, targets: _Targets, terms: list[str], options: dict):
    return minimize(
        _l1_loss, start, args=(targets, terms), method="Nelder-Mead", options=options
    )


def _starting_point(targets: _Targets, terms: list[str]) -> np.ndarray:
    """Homogeneous rate matching the largest jump value."""
    k = int(np.argmax(targets.times))
    rate = targets.values[k] / targets.times[k]
    beta = np.zeros(len(terms))
    beta[terms.index("intercept")] = np.log(rate) if rate > 0 else -5.0
    return beta


def fit_transition(
    hazards: list[CumulativeHazard],
    j: int,
    terms: list[str],
    seed: int = 0,
) -> RateEstimate:
    """l1 fit of one transition's coefficients with restarted Nelder-Mead."""
    name = transition_name(*hazards[0].transitions[j])
    targets = _collect(hazards, j, terms)
    if targets.times.shape[0] == 0:
        raise DataConsistencyError(f"Transition {name} has no observed jumps")

    rng = make_rng(seed, j)
    options = {
        "xatol": TOLERANCE,
        "fatol": TOLERANCE,
        "maxiter": 20_000 * len(terms),
        "maxfev": 40_000 * len(terms),
    }
    x0 = _starting_point(targets, terms)
    starts = [x0] + [x0 + rng.normal(0.0, 1.0, len(terms)) for _ in range(RESTARTS)]
    best = None
    for start in starts:
        res = _minimize(start, targets, terms, options)
        if best is None or res.fun < best.fun:
            best = res
    assert best is not None
    for _ in range(POLISH_ROUNDS):
        res = _minimize(best.x, targets, terms, options)
        if not res.fun < best.fun:
            break
        best = res

    logging.debug(f"Recovered {name}: l1 loss {best.fun:.3g}")
    return RateEstimate(
        transition=name,
        terms=tuple(terms),
        coefficients=np.asarray(best.x, dtype=float),
        loss=float(best.fun),
    )


def recover_rate_coefficients(
    hazards: list[CumulativeHazard],
    design: RateSpec,
    seed: int = 0,
    workers: int | None = 1,
) -> list[RateEstimate]:
    """Coefficients of every transition of `design` from stratified hazards."""
    if not hazards:
        raise DataConsistencyError("No hazard estimates to fit")
    transitions = hazards[0].transitions
    if transitions != design.transitions:
        raise DataConsistencyError("Hazards and design have different transitions")
    n = len(design.terms)
    with WorkerPool(workers) as pool:
        return pool.map(
            fit_transition,
            [hazards] * n,
            list(range(n)),
            [list(terms) for terms in design.terms],
            [seed] * n,
        )
