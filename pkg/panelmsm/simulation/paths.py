"""Exact simulation of latent paths by thinning.

Within a lookahead window [t, t + w] the total exit rate of the current
state is dominated by a constant bound. Candidate events are drawn from a
Poisson process at the bound and accepted with probability
(true rate) / bound; the target state is drawn from the normalized exit
rates at the accepted time. Log-linear rates are convex in t, so the
bound is the rate at the window end when every slope is nonnegative and
the maximum over a grid including both window ends otherwise.
"""

from typing import NamedTuple

import numpy as np

from panelmsm.exceptions import RejectedEvaluation, SimulationConfigError
from panelmsm.model.rates import LOG_RATE_MAX, RateFunction
from panelmsm.model.spec import ModelSpec
from panelmsm.types import transition_name

BOUND_GRID_POINTS = 5


class SamplePath(NamedTuple):
    """Jump times and states of a latent path; times[0] is the start time."""

    times: np.ndarray
    states: np.ndarray

    def state_at(self, t: float | np.ndarray) -> np.ndarray:
        index = np.searchsorted(self.times, t, side="right") - 1
        return self.states[np.maximum(index, 0)]

    @property
    def n_jumps(self) -> int:
        return self.times.shape[0] - 1


class ExitRates:
    """Exit rates of every state for one covariate vector."""

    def __init__(self, rate_function: RateFunction, x: np.ndarray) -> None:
        self.m = rate_function.m
        offset = rate_function.alpha.copy()
        if rate_function.gamma.shape[1]:
            offset = offset + rate_function.gamma @ x
        self.targets: list[np.ndarray] = []
        self.offsets: list[np.ndarray] = []
        self.slopes: list[np.ndarray] = []
        self.transitions: list[np.ndarray] = []
        for state in range(self.m):
            select = np.nonzero(rate_function.source == state)[0]
            self.transitions.append(select)
            self.targets.append(rate_function.target[select])
            self.offsets.append(offset[select])
            self.slopes.append(rate_function.tau[select])

    def has_exits(self, state: int) -> bool:
        return self.targets[state].shape[0] > 0

    def is_time_constant(self, state: int) -> bool:
        return not np.any(self.slopes[state])

    def rates(self, state: int, t: float | np.ndarray) -> np.ndarray:
        """Exit rates of `state` at time(s) t, shape (..., J_state)."""
        eta = self.offsets[state] + np.multiply.outer(t, self.slopes[state])
        bad = ~(eta <= LOG_RATE_MAX)
        if np.any(bad):
            column = np.nonzero(bad)[-1][0]
            j = int(self.transitions[state][column])
            raise RejectedEvaluation(
                f"Exit rate from state {state + 1} overflows",
                transition=j,
            )
        return np.exp(eta)

    def bound(self, state: int, t0: float, t1: float) -> float:
        """Upper bound of the total exit rate on [t0, t1]."""
        if np.all(self.slopes[state] >= 0):
            return float(self.rates(state, t1).sum())
        grid = np.linspace(t0, t1, BOUND_GRID_POINTS)
        return float(self.rates(state, grid).sum(axis=-1).max())


class PathSimulator:
    """Latent path sampler for one model and parameter vector."""

    def __init__(
        self,
        spec: ModelSpec,
        theta: np.ndarray,
        window: float = 0.1,
    ) -> None:
        if not window > 0:
            raise SimulationConfigError(
                f"Lookahead window must be positive, got {window}"
            )
        self.spec = spec
        self.realized = spec.realize(theta)
        self.window = window
        self.absorbing = set(spec.states.absorbing)

    def exit_rates(self, covs: dict[str, float] | np.ndarray) -> ExitRates:
        rate_function = self.realized.rates
        return ExitRates(rate_function, rate_function.covariate_vector(covs))

    def simulate(
        self,
        covs: dict[str, float] | np.ndarray,
        t_max: float,
        rng: np.random.Generator,
    ) -> SamplePath:
        if not t_max > 0:
            raise SimulationConfigError(
                f"Follow-up time must be positive, got {t_max}"
            )
        exits = self.exit_rates(covs)
        state = int(rng.choice(exits.m, p=self.realized.initial))
        times = [0.0]
        states = [state]
        t = 0.0

        while t < t_max:
            if state in self.absorbing or not exits.has_exits(state):
                break
            if exits.is_time_constant(state):
                t_end = t_max
            else:
                t_end = min(t + self.window, t_max)
            bound = exits.bound(state, t, t_end)
            if not bound > 0:
                names = ", ".join(
                    transition_name(state, int(s)) for s in exits.targets[state]
                )
                raise SimulationConfigError(
                    f"Thinning bound is {bound} on [{t:g}, {t_end:g}] "
                    f"with active transitions {names}"
                )
            candidate = t + rng.exponential(1.0 / bound)
            if candidate > t_end:
                t = t_end
                continue
            rates = exits.rates(state, candidate)
            total = float(rates.sum())
            if rng.random() * bound <= total:
                target = int(rng.choice(exits.targets[state], p=rates / total))
                times.append(candidate)
                states.append(target)
                state = target
            t = candidate

        return SamplePath(times=np.array(times), states=np.array(states, dtype=int))


def simulate_path(
    spec: ModelSpec,
    theta: np.ndarray,
    covs: dict[str, float] | np.ndarray,
    t_max: float,
    rng: np.random.Generator,
    window: float = 0.1,
) -> SamplePath:
    """Simulate the latent process on [0, t_max] from a draw of the initial
    distribution."""
    return PathSimulator(spec, theta, window).simulate(covs, t_max, rng)
