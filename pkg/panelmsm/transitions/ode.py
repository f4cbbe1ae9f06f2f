"""Adaptive Runge-Kutta integration of the forward equations.

    dP(t, t+u)/du = P(t, t+u) Q(t+u, x),    P(t, t) = I

Dormand-Prince 5(4) pair with FSAL and a PI step-size controller. The m x m
system is advanced as a whole, so every stage keeps zero row sums in the
increments and rows of P stay stochastic up to rounding.

Many intervals are integrated together. Every interval keeps its own
clock, step size and error history, and all arithmetic is elementwise
over the batch: an interval's result does not depend on its batch mates.
"""

import numpy as np
from nxtools import logging

from panelmsm.config import msmconfig
from panelmsm.exceptions import SolverFailure
from panelmsm.model.rates import RateFunction
from panelmsm.model.spec import ModelSpec
from panelmsm.transitions.cleanup import cleanup_stochastic
from panelmsm.transitions.solution import TransitionBatch, TransitionSolution

# Dormand-Prince 5(4) tableau; the last row holds the 5th order weights
DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)

# 5th order weights minus embedded 4th order weights
DP_E = (
    71 / 57600,
    0.0,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
BETA = 0.04
ALPHA = 0.2 - 0.75 * BETA


def _derivative(
    rate_function: RateFunction,
    t: np.ndarray,
    X: np.ndarray,
    P: np.ndarray,
) -> np.ndarray:
    return np.einsum("nij,njk->nik", P, rate_function(t, X))


def _combine(weights, ks: list[np.ndarray]) -> np.ndarray:
    total = np.zeros_like(ks[0])
    for weight, k in zip(weights, ks):
        if weight:
            total += weight * k
    return total


def integrate_batch(
    rate_function: RateFunction,
    X: np.ndarray,
    starts: np.ndarray,
    widths: np.ndarray,
    rtol: float | None = None,
    atol: float | None = None,
    max_steps: int | None = None,
) -> TransitionBatch:
    """Raw P(t_n, t_n + h_n) for every interval n, before cleanup."""
    rtol = msmconfig.ode_rtol if rtol is None else rtol
    atol = msmconfig.ode_atol if atol is None else atol
    max_steps = msmconfig.ode_max_steps if max_steps is None else max_steps

    starts = np.asarray(starts, dtype=float).reshape(-1)
    widths = np.asarray(widths, dtype=float).reshape(-1)
    n = starts.shape[0]
    X = np.asarray(X, dtype=float).reshape(n, rate_function.gamma.shape[1])
    if not np.all(np.isfinite(widths) & (widths >= 0)):
        raise ValueError("Interval widths must be finite and nonnegative")

    m = rate_function.m
    P = np.broadcast_to(np.eye(m), (n, m, m)).copy()
    steps = np.zeros(n, dtype=int)
    err_estimate = np.zeros(n)

    idx = np.nonzero(widths > 0)[0]
    if not idx.size:
        return TransitionBatch(P=P, steps=steps, err_estimate=err_estimate)

    elapsed = np.zeros(n)
    k_first = np.zeros((n, m, m))
    k_first[idx] = _derivative(rate_function, starts[idx], X[idx], P[idx])

    # initial step from the fastest exit rate at the interval start
    speed = np.max(np.abs(k_first), axis=(1, 2))
    h_next = np.minimum(widths, 0.5 * rtol**0.2 / np.maximum(speed, 1e-12))
    previous_error = np.full(n, 1e-4)

    while idx.size:
        steps[idx] += 1
        exhausted = steps[idx] > max_steps
        if np.any(exhausted):
            j = idx[np.nonzero(exhausted)[0][0]]
            t_fail = float(starts[j] + elapsed[j])
            logging.warning(f"ODE integrator exceeded {max_steps} steps at t={t_fail}")
            raise SolverFailure(
                f"Integrator exceeded {max_steps} steps at t={t_fail:g}",
                time=t_fail,
            )

        t = starts[idx] + elapsed[idx]
        remaining = widths[idx] - elapsed[idx]
        h = np.minimum(h_next[idx], remaining)
        # snap steps that would leave a sliver onto the interval end
        last = remaining - h <= 1e-12 * widths[idx]
        h = np.where(last, remaining, h)

        underflow = h <= 16 * np.finfo(float).eps * np.maximum(1.0, np.abs(t))
        if np.any(underflow):
            t_fail = float(t[np.nonzero(underflow)[0][0]])
            logging.warning(f"ODE step size underflow at t={t_fail}")
            raise SolverFailure(f"Step size underflow at t={t_fail:g}", time=t_fail)

        Pi = P[idx]
        Xi = X[idx]
        hh = h[:, None, None]
        ks = [k_first[idx]]
        for stage in range(1, 7):
            y = Pi + hh * _combine(DP_A[stage], ks)
            ks.append(_derivative(rate_function, t + DP_C[stage] * h, Xi, y))
        y5 = y

        local_error = hh * _combine(DP_E, ks)
        scale = atol + rtol * np.maximum(np.abs(Pi), np.abs(y5))
        error = np.sqrt(np.mean((local_error / scale) ** 2, axis=(1, 2)))
        error = np.where(np.isfinite(error), error, np.inf)
        accept = error <= 1.0

        bounded = np.maximum(error, 1e-10)
        factor = np.clip(
            SAFETY * bounded**-ALPHA * previous_error[idx] ** BETA,
            MIN_FACTOR,
            MAX_FACTOR,
        )
        factor = np.where(
            accept,
            factor,
            np.clip(SAFETY * bounded**-ALPHA, MIN_FACTOR, 1.0),
        )
        h_next[idx] = h * factor

        done_idx = idx[accept]
        P[done_idx] = y5[accept]
        k_first[done_idx] = ks[-1][accept]
        elapsed[done_idx] += h[accept]
        err_estimate[done_idx] += np.max(np.abs(local_error[accept]), axis=(1, 2))
        previous_error[done_idx] = np.maximum(error[accept], 1e-4)

        idx = idx[~(accept & last)]

    return TransitionBatch(P=P, steps=steps, err_estimate=err_estimate)


def solve_ode(
    spec: ModelSpec,
    theta: np.ndarray,
    covs: dict[str, float] | np.ndarray,
    t: float,
    h: float,
    tol: tuple[float, float] | None = None,
) -> TransitionSolution:
    """P(t, t+h) by adaptive integration of the forward equations."""
    if not h >= 0:
        raise ValueError(f"Interval width must be nonnegative, got {h}")
    rtol, atol = tol if tol is not None else (msmconfig.ode_rtol, msmconfig.ode_atol)
    rate_function = spec.rate_function(theta)
    x = rate_function.covariate_vector(covs)
    batch = integrate_batch(
        rate_function,
        x[None, :],
        np.array([t], dtype=float),
        np.array([h], dtype=float),
        rtol=rtol,
        atol=atol,
    )
    P = batch.P[0] if h == 0 else cleanup_stochastic(batch.P[0])
    return TransitionSolution(
        P=P,
        method="ode",
        steps=int(batch.steps[0]),
        err_estimate=float(batch.err_estimate[0]),
    )
