import math
import os

import numpy as np
import pytest
from conftest import config_path, forward_spec, full_spec
from scipy import stats

from panelmsm.exceptions import SimulationConfigError
from panelmsm.model.dataset import MISSING_LABEL, panel_to_frame
from panelmsm.simulation.config import ObservationScheme, SimConfig, load_sim_config
from panelmsm.simulation.observe import observation_times, observe_path
from panelmsm.simulation.paths import PathSimulator, SamplePath
from panelmsm.simulation.study import simulate_study, write_study
from panelmsm.transitions.ode import solve_ode
from panelmsm.utils import make_rng


def small_config(**kwargs) -> SimConfig:
    data = {
        "truth": config_path("cav_truth.toml"),
        "n_subjects": 15,
        "replicates": 2,
        "seed": 11,
        "covariates": {"sex": {"kind": "bernoulli", "p": 0.5}},
    }
    data.update(kwargs)
    return SimConfig(**data)


def test_exponential_holding_times():
    spec = forward_spec()
    rate = 2.0
    simulator = PathSimulator(spec, np.array([math.log(rate), 0.0]))
    rng = make_rng(3)
    n = 40_000
    holding = np.empty(n)
    for i in range(n):
        path = simulator.simulate({}, 1000.0, rng)
        assert path.n_jumps == 1
        holding[i] = path.times[1]
    assert holding.mean() == pytest.approx(1.0 / rate, rel=0.02)


def test_thinning_matches_ode_survival():
    spec = forward_spec()
    theta = np.array([0.0, 1.0])
    simulator = PathSimulator(spec, theta, window=0.1)
    rng = make_rng(4)
    n = 20_000
    alive = sum(
        int(simulator.simulate({}, 1.0, rng).state_at(1.0) == 0) for _ in range(n)
    )
    expected = solve_ode(spec, theta, {}, 0.0, 1.0).P[0, 0]
    se = math.sqrt(expected * (1 - expected) / n)
    assert abs(alive / n - expected) < 3 * se


def mixed_slope_model():
    spec = full_spec(3, ["intercept", "time"])
    theta = spec.theta_from_mapping(
        {
            "beta.1-2.intercept": -0.5,
            "beta.1-2.time": 0.4,
            "beta.1-3.intercept": 0.0,
            "beta.1-3.time": -0.6,
            "beta.2-1.intercept": -0.3,
            "beta.2-1.time": -0.2,
            "beta.2-3.intercept": -1.0,
            "beta.2-3.time": 0.5,
            "beta.3-1.intercept": -0.7,
            "beta.3-1.time": 0.3,
            "beta.3-2.intercept": -0.2,
            "beta.3-2.time": -0.4,
            "init.2": -0.5,
            "init.3": -1.0,
        }
    )
    return spec, theta


def test_thinning_with_mixed_slopes():
    spec, theta = mixed_slope_model()
    horizon = 2.0
    simulator = PathSimulator(spec, theta, window=0.1)
    rng = make_rng(5)
    n = 10_000
    counts = np.zeros(3)
    for _ in range(n):
        counts[int(simulator.simulate({}, horizon, rng).state_at(horizon))] += 1
    expected = spec.initial_distribution(theta) @ solve_ode(
        spec, theta, {}, 0.0, horizon
    ).P
    se = np.sqrt(expected * (1 - expected) / n)
    assert np.all(np.abs(counts / n - expected) < 4 * se)


def test_occupancy_chi_square_across_seeds():
    spec, theta = mixed_slope_model()
    horizons = (1.0, 2.0)
    seeds = range(10)
    initial = spec.initial_distribution(theta)
    expected = {h: initial @ solve_ode(spec, theta, {}, 0.0, h).P for h in horizons}
    simulator = PathSimulator(spec, theta, window=0.1)
    n = 2_000
    # family-wise level 0.01 over every seed and horizon
    level = 0.01 / (len(seeds) * len(horizons))
    for seed in seeds:
        rng = make_rng(100, seed)
        paths = [simulator.simulate({}, horizons[-1], rng) for _ in range(n)]
        for h in horizons:
            counts = np.bincount([int(p.state_at(h)) for p in paths], minlength=3)
            f_exp = n * expected[h] / expected[h].sum()
            assert stats.chisquare(counts, f_exp).pvalue > level, (seed, h)


def test_absorbing_state_stops_path(cav_spec):
    theta = cav_spec.prior.loc.copy()
    theta[cav_spec.layout.slices["rates"]] = 0.0
    simulator = PathSimulator(cav_spec, theta)
    rng = make_rng(6)
    for _ in range(50):
        path = simulator.simulate({"sex": 1.0}, 50.0, rng)
        assert path.states[-1] == 3
        assert np.sum(path.states == 3) == 1


def test_nonpositive_follow_up(two_state_spec):
    simulator = PathSimulator(two_state_spec, np.array([0.0, 0.0]))
    with pytest.raises(SimulationConfigError):
        simulator.simulate({}, 0.0, make_rng(0))


def test_label_frequencies_follow_misclassification(cav_spec):
    theta = cav_spec.theta_from_mapping(
        {"misc.2-1": -0.5, "misc.2-3": -1.0, "misc.1-2": -2.0, "misc.3-2": 0.0}
    )
    realized = cav_spec.realize(theta)
    scheme = ObservationScheme(kind="grid", spacing=1.0, follow_up=100_000.0)
    path = SamplePath(times=np.array([0.0]), states=np.array([1]))
    observation = observe_path(
        path, scheme, cav_spec.emission, realized, make_rng(8), absorbing=(3,)
    )
    frequencies = np.bincount(observation.labels, minlength=4) / observation.labels.size
    assert np.max(np.abs(frequencies - realized.misclassification[1])) < 0.01


def test_observation_stops_at_absorbing(cav_spec):
    realized = cav_spec.realize(cav_spec.prior.loc)
    scheme = ObservationScheme(kind="grid", spacing=1.0, follow_up=10.0)
    path = SamplePath(times=np.array([0.0, 3.5]), states=np.array([0, 3]))
    observation = observe_path(
        path, scheme, cav_spec.emission, realized, make_rng(9), absorbing=(3,)
    )
    assert observation.times.tolist() == [0.0, 1.0, 2.0, 3.0, 4.0]
    assert observation.labels[-1] == 3


def test_missing_labels_spare_absorbing_records(cav_spec):
    realized = cav_spec.realize(cav_spec.prior.loc)
    scheme = ObservationScheme(
        kind="grid", spacing=1.0, follow_up=40.0, missing_rate=0.5
    )
    path = SamplePath(times=np.array([0.0, 30.5]), states=np.array([1, 3]))
    observation = observe_path(
        path, scheme, cav_spec.emission, realized, make_rng(10), absorbing=(3,)
    )
    assert np.any(observation.labels == MISSING_LABEL)
    assert observation.labels[-1] == 3


def test_empirical_scheme_times():
    scheme = ObservationScheme(gaps=[0.5, 2.0], weights=[0.5, 0.5], follow_up=15.0)
    times = observation_times(scheme, make_rng(1))
    gaps = np.diff(times)
    assert times[0] == 0.0
    assert times[-1] <= 15.0
    assert np.all(gaps >= 0.5 * 0.75 - 1e-12)
    assert np.all(gaps <= 2.0 * 1.25 + 1e-12)


def test_study_is_reproducible():
    config = small_config()
    first = simulate_study(config)
    second = simulate_study(config)
    for a, b in zip(first.datasets, second.datasets):
        assert panel_to_frame(a).equals(panel_to_frame(b))
    other = simulate_study(small_config(seed=12))
    assert not panel_to_frame(first.datasets[0]).equals(
        panel_to_frame(other.datasets[0])
    )


def test_study_does_not_depend_on_workers():
    config = small_config(replicates=1)
    serial = simulate_study(config, workers=1)
    parallel = simulate_study(config, workers=3)
    assert panel_to_frame(serial.datasets[0]).equals(
        panel_to_frame(parallel.datasets[0])
    )


def test_write_study(tmp_path):
    study = simulate_study(small_config(replicates=1, n_subjects=5))
    written = write_study(study, str(tmp_path))
    names = sorted(os.path.basename(path) for path in written)
    assert names == ["panel_001.csv", "paths_001.csv", "truth.toml"]


def test_load_sim_config_resolves_truth():
    config = load_sim_config(config_path("sim_cav.toml"))
    assert os.path.isfile(config.truth)
    assert config.n_subjects == 200
    assert config.scheme.kind == "empirical"


def test_missing_covariate_sampler():
    config = small_config(covariates={})
    with pytest.raises(SimulationConfigError):
        simulate_study(config)
