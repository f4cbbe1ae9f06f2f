import math

import numpy as np
import pytest
from conftest import forward_spec

from panelmsm.empirical.aalen_johansen import aalen_johansen, product_integral
from panelmsm.empirical.counting import (
    StratumEvents,
    counting_from_paths,
    panel_to_counting,
)
from panelmsm.empirical.nelson_aalen import CumulativeHazard, at_risk, nelson_aalen
from panelmsm.empirical.output import (
    estimates_frame,
    hazards_frame,
    transition_frame,
)
from panelmsm.empirical.recovery import (
    cumulative_rate,
    fit_transition,
    recover_rate_coefficients,
)
from panelmsm.exceptions import DataConsistencyError
from panelmsm.model.dataset import PanelDataset, Subject
from panelmsm.model.rates import RateSpec
from panelmsm.simulation.paths import PathSimulator, SamplePath
from panelmsm.transitions.ode import solve_ode
from panelmsm.utils import make_rng

FORWARD_MASK = np.array([[False, True], [False, False]])


def hand_paths() -> dict[int, SamplePath]:
    """A moves at 1, B moves at 2, C is censored at 3."""
    return {
        1: SamplePath(times=np.array([0.0, 1.0]), states=np.array([0, 1])),
        2: SamplePath(times=np.array([0.0, 2.0]), states=np.array([0, 1])),
        3: SamplePath(times=np.array([0.0]), states=np.array([0])),
    }


def hand_counting():
    return counting_from_paths(hand_paths(), 3.0, FORWARD_MASK, absorbing=(1,))


def empty_stratum(covariates: dict[str, float]) -> StratumEvents:
    empty = np.zeros(0)
    return StratumEvents(
        key=tuple(covariates.values()),
        covariates=covariates,
        event_subjects=empty.astype(int),
        event_times=empty,
        event_sources=empty.astype(int),
        event_targets=empty.astype(int),
        spell_subjects=empty.astype(int),
        spell_starts=empty,
        spell_ends=empty,
        spell_states=empty.astype(int),
    )


def exact_hazard(
    beta: dict[str, float],
    times: np.ndarray,
    covariates: dict[str, float],
) -> CumulativeHazard:
    """A step function that jumps onto the cumulative rate at every time."""
    c = beta["intercept"] + sum(beta.get(k, 0.0) * v for k, v in covariates.items())
    values = cumulative_rate(c, beta.get("time", 0.0), times)
    return CumulativeHazard(
        stratum=empty_stratum(covariates),
        transitions=[(0, 1)],
        times=times,
        increments=np.diff(values, prepend=0.0)[:, None],
    )


def test_hand_counted_nelson_aalen():
    data = hand_counting()
    assert data.n_events == 2
    (hazard,) = nelson_aalen(data)
    assert hazard.times.tolist() == [1.0, 2.0]
    assert hazard.increments[:, 0] == pytest.approx([1 / 3, 1 / 2], abs=1e-15)
    assert hazard.at(2.0)[0] == pytest.approx(5 / 6, abs=1e-15)
    assert hazard.at(0.5)[0] == 0.0
    assert hazard.at(2.5)[0] == pytest.approx(5 / 6, abs=1e-15)


def test_at_risk_counts():
    (stratum,) = hand_counting().strata
    assert at_risk(stratum, 0, np.array([0.5, 1.0, 1.5, 2.0, 3.0, 3.5])).tolist() == [
        3,
        3,
        2,
        2,
        1,
        0,
    ]


def test_hand_counted_aalen_johansen():
    (estimate,) = aalen_johansen(hand_counting())
    assert estimate.at(1.0) == pytest.approx(np.array([[2 / 3, 1 / 3], [0, 1]]))
    assert estimate.at(2.0)[0, 0] == pytest.approx(1 / 3)
    assert np.array_equal(estimate.at(0.5), np.eye(2))
    assert np.allclose(estimate.P.sum(axis=2), 1.0, atol=1e-12)


def test_panel_data_gives_same_hazard():
    subjects = [
        Subject.create(id=1, times=[0.0, 1.0], labels=[0, 1]),
        Subject.create(id=2, times=[0.0, 1.0, 2.0], labels=[0, 0, 1]),
        Subject.create(id=3, times=[0.0, 1.0, 2.0, 3.0], labels=[0, 0, 0, 0]),
    ]
    data = panel_to_counting(PanelDataset(subjects), FORWARD_MASK)
    (hazard,) = nelson_aalen(data)
    assert hazard.at(2.0)[0] == pytest.approx(5 / 6, abs=1e-15)


def test_tied_events_share_one_factor():
    paths = {
        1: SamplePath(times=np.array([0.0, 1.0]), states=np.array([0, 1])),
        2: SamplePath(times=np.array([0.0, 1.0]), states=np.array([0, 1])),
        3: SamplePath(times=np.array([0.0]), states=np.array([0])),
        4: SamplePath(times=np.array([0.0]), states=np.array([0])),
    }
    data = counting_from_paths(paths, 2.0, FORWARD_MASK, absorbing=(1,))
    (hazard,) = nelson_aalen(data)
    assert hazard.times.tolist() == [1.0]
    assert hazard.increments[0, 0] == pytest.approx(0.5)
    (estimate,) = aalen_johansen(data)
    assert estimate.at(1.0)[0, 0] == pytest.approx(0.5)


def test_missing_labels_are_skipped():
    subject = Subject.create(id=1, times=[0.0, 1.0, 2.0], labels=[0, None, 1])
    data = panel_to_counting(PanelDataset([subject]), FORWARD_MASK)
    (stratum,) = data.strata
    assert stratum.event_times.tolist() == [2.0]


def test_disallowed_jump_is_censoring():
    mask = np.array(
        [[False, True, False], [False, False, True], [False, False, False]]
    )
    subjects = [
        Subject.create(id=1, times=[0.0, 1.0, 2.0], labels=[0, 2, 2]),
        Subject.create(id=2, times=[0.0, 1.5], labels=[0, 1]),
    ]
    data = panel_to_counting(PanelDataset(subjects), mask)
    (stratum,) = data.strata
    assert stratum.event_times.tolist() == [1.5]
    # subject 1 leaves the risk set of state 1 at 1.0 without an event
    assert at_risk(stratum, 0, np.array([1.0, 1.2])).tolist() == [2, 1]


def test_stratified_counting():
    subjects = [
        Subject.create(id=i, times=[0.0, 1.0 + i], labels=[0, 1], covariates=covs)
        for i, covs in enumerate([{"sex": 1.0}, {"sex": 0.0}, {"sex": 1.0}], start=1)
    ]
    data = panel_to_counting(
        PanelDataset(subjects, covariates=["sex"]), FORWARD_MASK, stratify_by=["sex"]
    )
    assert [s.key for s in data.strata] == [(0.0,), (1.0,)]
    assert [s.label for s in data.strata] == ["sex=0", "sex=1"]
    assert [s.n_events for s in data.strata] == [1, 2]


def test_event_outside_mask_is_rejected():
    paths = {1: SamplePath(times=np.array([0.0, 1.0]), states=np.array([1, 0]))}
    with pytest.raises(DataConsistencyError):
        counting_from_paths(paths, 2.0, FORWARD_MASK)


def test_negative_diagonal_is_rejected():
    hazard = CumulativeHazard(
        stratum=empty_stratum({}),
        transitions=[(0, 1)],
        times=np.array([1.0]),
        increments=np.array([[1.5]]),
    )
    with pytest.raises(DataConsistencyError):
        product_integral(hazard, 2)


def test_cumulative_rate_limit():
    t = np.array([0.5, 2.0, 7.0])
    assert cumulative_rate(0.3, 0.0, t) == pytest.approx(t * math.exp(0.3))
    assert cumulative_rate(0.3, 1e-9, t) == pytest.approx(t * math.exp(0.3))
    assert cumulative_rate(0.3, 1e-6, t) == pytest.approx(t * math.exp(0.3), rel=1e-5)
    expected = math.exp(0.3) * (math.exp(0.5 * 2.0) - 1) / 0.5
    assert cumulative_rate(0.3, 0.5, np.array([2.0]))[0] == pytest.approx(expected)


def test_recovery_self_consistency():
    beta = {"intercept": -1.0, "time": 0.3}
    hazard = exact_hazard(beta, np.linspace(0.2, 10.0, 50), {})
    estimate = fit_transition([hazard], 0, ["intercept", "time"])
    assert estimate.as_dict() == pytest.approx(beta, abs=1e-4)
    assert estimate.transition == "1-2"


def test_recovery_with_strata():
    beta = {"intercept": -1.0, "time": 0.2, "sex": 0.5}
    times = np.linspace(0.2, 8.0, 50)
    hazards = [exact_hazard(beta, times, {"sex": value}) for value in (0.0, 1.0)]
    design = RateSpec(mask=FORWARD_MASK.tolist(), terms=[["intercept", "time", "sex"]])
    (estimate,) = recover_rate_coefficients(hazards, design, seed=1)
    assert estimate.as_dict() == pytest.approx(beta, abs=1e-4)
    df = estimates_frame([estimate])
    assert list(df.columns) == ["transition", "term", "estimate"]
    assert df["term"].tolist() == ["intercept", "time", "sex"]


def test_recovery_needs_stratified_covariates():
    hazard = exact_hazard({"intercept": -1.0}, np.linspace(0.5, 5.0, 10), {})
    with pytest.raises(DataConsistencyError):
        fit_transition([hazard], 0, ["intercept", "sex"])


def test_output_frames():
    data = hand_counting()
    hazards = nelson_aalen(data)
    df = hazards_frame(hazards)
    assert list(df.columns) == ["stratum", "time", "1-2"]
    assert df["1-2"].tolist() == pytest.approx([1 / 3, 5 / 6])
    df = transition_frame(aalen_johansen(data, hazards))
    assert list(df.columns) == ["stratum", "time", "P1-1", "P1-2", "P2-1", "P2-2"]
    assert df["stratum"].unique().tolist() == ["all"]


def simulated_paths(n: int, theta: np.ndarray, horizon: float, seed: int):
    spec = forward_spec()
    simulator = PathSimulator(spec, theta, window=0.1)
    rng = make_rng(seed)
    return {i: simulator.simulate({}, horizon, rng) for i in range(1, n + 1)}


def test_aalen_johansen_matches_ode():
    spec = forward_spec()
    theta = np.array([math.log(0.4), 0.3])
    n = 5_000
    paths = simulated_paths(n, theta, 2.0, seed=21)
    data = counting_from_paths(paths, 2.0, FORWARD_MASK, absorbing=(1,))
    (estimate,) = aalen_johansen(data)
    for t in (0.5, 1.0, 2.0):
        expected = solve_ode(spec, theta, {}, 0.0, t).P[0, 0]
        se = math.sqrt(expected * (1 - expected) / n)
        assert abs(estimate.at(t)[0, 0] - expected) < 3 * se


def test_homogeneous_cumulative_rate_is_linear():
    q = 0.5
    n = 10_000
    paths = simulated_paths(n, np.array([math.log(q), 0.0]), 2.0, seed=23)
    data = counting_from_paths(paths, 2.0, FORWARD_MASK, absorbing=(1,))
    (hazard,) = nelson_aalen(data)
    for t in (0.5, 1.0, 2.0):
        se = math.sqrt(math.expm1(q * t) / n)
        assert abs(hazard.at(t)[0] - q * t) < 4 * se
        assert hazard.at(t)[0] / t == pytest.approx(q, abs=0.05)


@pytest.mark.slow
def test_recovery_from_simulated_paths():
    theta = np.array([math.log(0.3), 0.15])
    paths = simulated_paths(2_000, theta, 5.0, seed=22)
    data = counting_from_paths(paths, 5.0, FORWARD_MASK, absorbing=(1,))
    hazards = nelson_aalen(data)
    design = RateSpec(mask=FORWARD_MASK.tolist(), terms=[["intercept", "time"]])
    (estimate,) = recover_rate_coefficients(hazards, design)
    assert abs(estimate.coefficients[0] - theta[0]) < 0.1
