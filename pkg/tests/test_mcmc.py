import math

import numpy as np
import pytest
from conftest import forward_spec

from panelmsm.exceptions import ChainError, ConfigurationError, RejectedEvaluation
from panelmsm.mcmc.config import ChainConfig, load_chain_config
from panelmsm.mcmc.coverage import coverage_study
from panelmsm.mcmc.sampler import LogPosterior, run_chain, run_sampler
from panelmsm.mcmc.summary import (
    ParameterSummary,
    chain_frame,
    hpd,
    read_summary_csv,
    split_rhat,
    summarize,
    write_summary_csv,
)
from panelmsm.model.dataset import PanelDataset, Subject
from panelmsm.simulation.paths import PathSimulator
from panelmsm.transitions.engine import EngineSelector
from panelmsm.utils import make_rng


def standard_normal(theta: np.ndarray) -> float:
    return float(-0.5 * theta @ theta)


def test_gaussian_target_moments():
    config = ChainConfig(n_iter=100_000, n_burnin=10_000, seed=1, proposal_scale=0.5)
    chain = run_sampler(standard_normal, np.zeros(3), config)
    draws = chain.retained
    assert np.all(np.abs(draws.mean(axis=0)) < 0.05)
    cov = np.cov(draws.T)
    assert np.all(np.abs(np.diag(cov) - 1.0) < 0.1)
    assert np.all(np.abs(cov - np.diag(np.diag(cov))) < 0.1)
    assert 0.1 < chain.acceptance_rate < 0.5


def test_acceptance_rule_on_logged_proposals():
    config = ChainConfig(n_iter=3_000, n_burnin=1_000, seed=2, adapt_window=200)
    chain = run_sampler(standard_normal, np.ones(2), config)
    for i in range(1, chain.n_iter):
        rule = chain.log_u[i] < chain.proposal_log_post[i] - chain.log_post[i - 1]
        assert chain.accepted[i] == rule
        if not chain.accepted[i]:
            assert np.array_equal(chain.samples[i], chain.samples[i - 1])
    better = chain.proposal_log_post[1:] >= chain.log_post[:-1]
    assert np.all(chain.accepted[1:][better])
    assert np.all(np.isfinite(chain.log_post))


def test_adaptation_only_during_burnin():
    config = ChainConfig(n_iter=2_000, n_burnin=1_000, seed=3, adapt_window=250)
    chain = run_sampler(standard_normal, np.zeros(2), config)
    iterations = [i for i, _ in chain.proposal_cov_history]
    assert iterations == [0, 250, 500, 750, 1000]
    first = chain.proposal_cov_history[0][1]
    assert np.allclose(first, np.eye(2) * 0.05**2)


def test_fixed_seed_is_reproducible():
    config = ChainConfig(n_iter=1_000, n_burnin=500, seed=4, adapt_window=100)
    a = run_sampler(standard_normal, np.zeros(2), config)
    b = run_sampler(standard_normal, np.zeros(2), config)
    assert np.array_equal(a.samples, b.samples)
    assert chain_frame(a).to_csv() == chain_frame(b).to_csv()
    c = run_sampler(standard_normal, np.zeros(2), config, chain=1)
    assert not np.array_equal(a.samples, c.samples)


def test_numerical_failures_are_rejections():
    def half_broken(theta: np.ndarray) -> float:
        if theta[0] > 1.5:
            raise RejectedEvaluation("overflow")
        return standard_normal(theta)

    config = ChainConfig(
        n_iter=2_000, n_burnin=1_000, seed=5, adapt_window=100, proposal_scale=0.3
    )
    chain = run_sampler(half_broken, np.zeros(1), config)
    assert chain.failures > 0
    assert np.all(chain.samples[:, 0] <= 1.5)


def test_unbounded_target_is_rejected():
    def spiked(theta: np.ndarray) -> float:
        if theta[0] > 1.5:
            return math.inf
        return standard_normal(theta)

    config = ChainConfig(
        n_iter=2_000, n_burnin=1_000, seed=7, adapt_window=100, proposal_scale=0.3
    )
    chain = run_sampler(spiked, np.zeros(1), config)
    assert chain.failures > 0
    assert np.all(np.isfinite(chain.log_post))
    assert np.all(chain.samples[:, 0] <= 1.5)


def test_persistent_failures_abort():
    def broken(theta: np.ndarray) -> float:
        if np.any(theta != 0):
            raise RejectedEvaluation("overflow")
        return 0.0

    config = ChainConfig(n_iter=1_000, n_burnin=500, seed=6, adapt_window=100)
    with pytest.raises(ChainError):
        run_sampler(broken, np.zeros(2), config)


def test_infinite_initial_value():
    config = ChainConfig(n_iter=100, n_burnin=50, adapt_window=10)
    with pytest.raises(ChainError):
        run_sampler(lambda theta: -math.inf, np.zeros(1), config)


def test_chain_config_validation():
    with pytest.raises(ValueError):
        ChainConfig(n_iter=100, n_burnin=100)
    with pytest.raises(ValueError):
        ChainConfig(target_acceptance=1.0)
    with pytest.raises(ValueError):
        ChainConfig(engine="piecewise")
    config = ChainConfig(engine="piecewise(0.25)")
    assert config.engine_selector == EngineSelector("piecewise", 0.25)
    assert config.n_retained == 20_000


def test_load_chain_config(tmp_path):
    path = tmp_path / "model.toml"
    path.write_text("[sampler]\nn_iter = 500\nn_burnin = 100\nseed = 3\n")
    config = load_chain_config(str(path), seed=9, chains=None)
    assert config.n_iter == 500
    assert config.seed == 9
    assert config.chains == 1
    path.write_text("[sampler]\nn_iter = 100\nn_burnin = 200\n")
    with pytest.raises(ConfigurationError):
        load_chain_config(str(path))


def test_hpd_constant_chain():
    assert hpd(np.full(500, 2.5), 0.9) == (2.5, 2.5)


def test_hpd_gaussian():
    draws = make_rng(7).standard_normal(100_000)
    low, high = hpd(draws, 0.95)
    assert low == pytest.approx(-1.96, abs=0.05)
    assert high == pytest.approx(1.96, abs=0.05)


def test_hpd_shorter_than_equal_tails_on_skewed_draws():
    draws = make_rng(8).exponential(1.0, 20_000)
    low, high = hpd(draws, 0.9)
    q_low, q_high = np.quantile(draws, [0.05, 0.95])
    assert high - low < q_high - q_low
    assert low < q_low
    assert np.mean((draws >= low) & (draws <= high)) >= 0.9


def test_hpd_errors():
    with pytest.raises(ChainError):
        hpd(np.zeros(50))
    with pytest.raises(ChainError):
        hpd(np.zeros(500), 1.0)
    with pytest.raises(ChainError):
        hpd(np.zeros(500), 0.0)


def test_split_rhat():
    rng = make_rng(9)
    mixed = [rng.standard_normal(2_000) for _ in range(4)]
    assert split_rhat(mixed) == pytest.approx(1.0, abs=0.01)
    stuck = [rng.standard_normal(2_000), rng.standard_normal(2_000) + 5.0]
    assert split_rhat(stuck) > 1.5


def test_summarize_and_csv(tmp_path):
    config = ChainConfig(n_iter=2_000, n_burnin=1_000, seed=10, adapt_window=100)
    chains = [
        run_sampler(standard_normal, np.zeros(2), config, names=("a", "b"), chain=c)
        for c in range(2)
    ]
    summaries = summarize(chains, 0.9)
    assert [s.name for s in summaries] == ["a", "b"]
    assert all(s.rhat is not None for s in summaries)
    assert all(s.hpd_low < s.mean < s.hpd_high for s in summaries)
    path = str(tmp_path / "summary.csv")
    write_summary_csv(summaries, path)
    back = read_summary_csv(path)
    assert [s.name for s in back] == ["a", "b"]
    assert back[0].level == 0.9
    single = summarize(chains[0])
    assert single[0].rhat is None


def test_chain_frame_columns():
    config = ChainConfig(n_iter=300, n_burnin=100, seed=11, adapt_window=50)
    chain = run_sampler(standard_normal, np.zeros(2), config, names=("x", "y"))
    df = chain_frame(chain)
    assert list(df.columns) == ["iteration", "x", "y", "log_post", "accepted"]
    assert df["iteration"].iloc[0] == 101
    assert len(df) == 200
    assert set(df["accepted"].unique()) <= {0, 1}


def summary(name: str, mean: float, low: float, high: float) -> ParameterSummary:
    return ParameterSummary(name, mean, 1.0, low, high, 0.95)


def test_coverage_study():
    truth = {"a": 0.0, "b": 1.0}
    fits = [
        [summary("a", 0.1, -1.0, 1.0), summary("b", 2.0, 1.5, 2.5)],
        [summary("a", -0.1, -1.0, 1.0), summary("b", 1.2, 0.5, 1.5)],
    ]
    result = coverage_study(truth, fits)
    assert result.as_dict() == {"a": 1.0, "b": 0.5}
    assert result.n_replicates == 2
    assert result.median_abs_bias == pytest.approx([0.1, 0.6])
    with pytest.raises(ChainError):
        coverage_study(truth, fits[:1])
    with pytest.raises(ChainError):
        coverage_study(np.zeros(3), fits)


def simulated_two_state(n: int, seed: int) -> tuple[PanelDataset, float]:
    """Homogeneous alive/dead data observed yearly for five years."""
    spec = forward_spec()
    b0 = math.log(0.3)
    simulator = PathSimulator(spec, np.array([b0, 0.0]))
    rng = make_rng(seed)
    subjects = []
    for i in range(1, n + 1):
        path = simulator.simulate({}, 5.0, rng)
        times = np.arange(6.0)
        states = path.state_at(times)
        end = int(np.argmax(states == 1)) + 1 if np.any(states == 1) else 6
        subjects.append(
            Subject.create(id=i, times=times[:end], labels=states[:end].tolist())
        )
    return PanelDataset(subjects), b0


def test_two_state_posterior_recovers_rate():
    spec = forward_spec(terms=["intercept"])
    data, b0 = simulated_two_state(200, seed=12)
    config = ChainConfig(
        n_iter=3_000,
        n_burnin=1_000,
        seed=13,
        adapt_window=250,
        proposal_scale=0.1,
        engine="homogeneous",
        initial={"beta.1-2.intercept": -1.0},
    )
    chain = run_chain(spec, data, config, workers=1)
    draws = chain.retained[:, 0]
    assert abs(draws.mean() - b0) < 3 * draws.std()


def test_check_initial_names_impossible_subjects(two_state_spec):
    dead_then_alive = Subject.create(id=4, times=[0.0, 1.0], labels=[1, 0])
    target = LogPosterior(
        two_state_spec,
        PanelDataset([dead_then_alive]),
        EngineSelector.create("ode"),
    )
    with pytest.raises(ChainError, match="4"):
        target.check_initial(np.zeros(2))
