"""Panel observation of latent paths."""

import math
from typing import NamedTuple

import numpy as np

from panelmsm.model.dataset import MISSING_LABEL
from panelmsm.model.emissions import EmissionModel
from panelmsm.model.spec import RealizedModel
from panelmsm.simulation.config import ObservationScheme
from panelmsm.simulation.paths import SamplePath


class Observation(NamedTuple):
    times: np.ndarray
    latent: np.ndarray
    labels: np.ndarray  # 0-based, MISSING_LABEL when dropped
    emissions: np.ndarray | None


def observation_times(
    scheme: ObservationScheme,
    rng: np.random.Generator,
) -> np.ndarray:
    if scheme.kind == "grid":
        count = math.floor((scheme.follow_up - scheme.start) / scheme.spacing + 1e-9)
        return scheme.start + scheme.spacing * np.arange(count + 1)

    gaps = np.asarray(scheme.gaps, dtype=float)
    weights = None if scheme.weights is None else np.asarray(scheme.weights)
    times = [scheme.start]
    t = scheme.start
    while True:
        gap = float(rng.choice(gaps, p=weights))
        if scheme.jitter:
            gap *= rng.uniform(1.0 - scheme.jitter, 1.0 + scheme.jitter)
        t += gap
        if t > scheme.follow_up:
            break
        times.append(t)
    return np.array(times)


def observe_path(
    path: SamplePath,
    scheme: ObservationScheme,
    emission: EmissionModel,
    realized: RealizedModel,
    rng: np.random.Generator,
    absorbing: list[int] | tuple[int, ...] = (),
) -> Observation:
    """Observe a path at the scheme's times.

    The observed label is drawn from the misclassification row of the
    latent state; observing an absorbing state ends the sequence.
    """
    times = observation_times(scheme, rng)
    latent = path.state_at(times)
    end = len(times)
    for k, state in enumerate(latent):
        if int(state) in absorbing:
            end = k + 1
            break
    times = times[:end]
    latent = latent[:end]

    m = realized.misclassification.shape[0]
    labels = np.empty(end, dtype=int)
    emissions = None
    if emission.has_dirichlet:
        assert realized.concentrations is not None
        emissions = np.empty((end, realized.concentrations.shape[1]))

    for k, state in enumerate(latent):
        labels[k] = rng.choice(m, p=realized.misclassification[state])
        if (
            scheme.missing_rate
            and int(state) not in absorbing
            and rng.random() < scheme.missing_rate
        ):
            labels[k] = MISSING_LABEL
        if emissions is not None:
            assert realized.concentrations is not None
            emissions[k] = rng.dirichlet(realized.concentrations[state])

    return Observation(times=times, latent=latent, labels=labels, emissions=emissions)
