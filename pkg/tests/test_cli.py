import math
import os

import pandas as pd
import pytest
from conftest import config_path

from panelmsm.cli.main import main
from panelmsm.utils import json_loads

TWO_STATE_MODEL = """
[states]
labels = ["alive", "dead"]
absorbing = ["dead"]

[transitions]
mask = [[0, 1], [0, 0]]

[init]
mode = "fixed"
probabilities = [1.0, 0.0]
"""

# subject 1 dies at 1, subject 2 at 2, subject 3 is last seen alive at 3
HAND_PANEL = """subject_id,time,obs_state
1,0,1
1,1,2
2,0,1
2,1,1
2,2,2
3,0,1
3,1,1
3,2,1
3,3,1
"""


@pytest.fixture
def two_state_files(tmp_path):
    model = tmp_path / "model.toml"
    model.write_text(TWO_STATE_MODEL)
    data = tmp_path / "panel.csv"
    data.write_text(HAND_PANEL)
    return str(model), str(data)


def test_missing_config_is_usage_error(tmp_path):
    code = main(
        ["simulate", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path)]
    )
    assert code == 2


def test_unknown_command():
    assert main(["frobnicate"]) == 2


def test_piecewise_needs_resolution(two_state_files, tmp_path):
    model, data = two_state_files
    argv = ["loglik", "--model", model, "--data", data, "--out", str(tmp_path)]
    assert main(argv + ["--engine", "piecewise"]) == 2
    assert main(argv + ["--engine", "piecewise", "--d", "-1"]) == 2


def test_simulate_is_reproducible(tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        argv = [
            "simulate",
            "--config",
            config_path("sim_cav.toml"),
            "--out",
            str(out),
            "--subjects",
            "10",
            "--replicates",
            "1",
            "--seed",
            "5",
            "--workers",
            "1",
        ]
        assert main(argv) == 0
        outputs.append(out)
    for name in ("panel_001.csv", "paths_001.csv"):
        a = (outputs[0] / name).read_bytes()
        b = (outputs[1] / name).read_bytes()
        assert a == b
    manifest = json_loads((outputs[0] / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["seed"] == 5


def test_simulate_rejects_bad_override(tmp_path):
    argv = [
        "simulate",
        "--config",
        config_path("sim_cav.toml"),
        "--out",
        str(tmp_path),
        "--replicates",
        "0",
    ]
    assert main(argv) == 2


def test_empirical(two_state_files, tmp_path):
    model, data = two_state_files
    out = tmp_path / "out"
    argv = ["empirical", "--model", model, "--data", data, "--out", str(out)]
    assert main(argv + ["--workers", "1"]) == 0
    hazards = pd.read_csv(out / "hazards.csv")
    assert hazards["1-2"].tolist() == pytest.approx([1 / 3, 5 / 6])
    transitions = pd.read_csv(out / "aalen_johansen.csv")
    assert transitions["P1-1"].tolist() == pytest.approx([2 / 3, 1 / 3])
    estimates = pd.read_csv(out / "estimates.csv")
    assert estimates["term"].tolist() == ["intercept"]


def test_loglik_engines_agree(two_state_files, tmp_path):
    model, data = two_state_files
    totals = {}
    for engine in ("ode", "homogeneous"):
        out = tmp_path / engine
        argv = ["loglik", "--model", model, "--data", data, "--out", str(out)]
        assert main(argv + ["--engine", engine, "--workers", "1"]) == 0
        df = pd.read_csv(out / "loglik.csv", dtype={"subject_id": str})
        assert df["subject_id"].tolist() == ["1", "2", "3", "total"]
        totals[engine] = df["loglik"].iloc[-1]
    assert totals["ode"] == pytest.approx(totals["homogeneous"], abs=1e-8)
    # unit rate: two deaths in (k, k+1] and one survivor to 3
    expected = 2 * math.log(1 - math.exp(-1)) + math.log(math.exp(-1)) - 3
    assert totals["ode"] == pytest.approx(expected, abs=1e-8)


def test_transition(two_state_files, tmp_path):
    model, _ = two_state_files
    out = tmp_path / "out"
    argv = ["transition", "--model", model, "--t", "0", "--h", "1", "--out", str(out)]
    assert main(argv) == 0
    df = pd.read_csv(out / "transition.csv")
    assert list(df.columns) == ["from", "alive", "dead"]
    assert df["alive"].iloc[0] == pytest.approx(math.exp(-1), abs=1e-8)
    assert df["dead"].iloc[1] == pytest.approx(1.0, abs=1e-12)


def test_transition_bad_covariate(two_state_files, tmp_path):
    model, _ = two_state_files
    argv = ["transition", "--model", model, "--t", "0", "--h", "1"]
    assert main(argv + ["--out", str(tmp_path), "--cov", "sex"]) == 2


def test_bias_demo(tmp_path):
    assert main(["bias-demo", "--out", str(tmp_path)]) == 0
    names = sorted(os.listdir(tmp_path))
    assert names == [
        "manifest.json",
        "regime_integer.csv",
        "regime_random.csv",
        "regime_shifted.csv",
        "slope_sweep.csv",
    ]
    shifted = pd.read_csv(tmp_path / "regime_shifted.csv")
    assert shifted["b0"].iloc[0] == pytest.approx(0.1, abs=1e-10)
    sweep = pd.read_csv(tmp_path / "slope_sweep.csv")
    assert (sweep["bias"] <= sweep["bound"]).all()


def test_fit(two_state_files, tmp_path):
    model, data = two_state_files
    out = tmp_path / "out"
    argv = [
        "fit",
        "--model",
        model,
        "--data",
        data,
        "--out",
        str(out),
        "--iter",
        "400",
        "--burnin",
        "200",
        "--adapt-window",
        "50",
        "--engine",
        "homogeneous",
        "--workers",
        "1",
    ]
    assert main(argv) == 0
    chain = pd.read_csv(out / "chain.csv")
    assert list(chain.columns) == [
        "iteration",
        "beta.1-2.intercept",
        "log_post",
        "accepted",
    ]
    assert len(chain) == 200
    summary = pd.read_csv(out / "summary.csv")
    assert summary["parameter"].tolist() == ["beta.1-2.intercept"]
    manifest = json_loads((out / "manifest.json").read_text())
    assert manifest["engine"] == "homogeneous"


def test_empirical_from_latent_paths(tmp_path):
    sim = tmp_path / "sim"
    argv = [
        "simulate",
        "--config",
        config_path("sim_cav.toml"),
        "--out",
        str(sim),
        "--subjects",
        "40",
        "--replicates",
        "1",
        "--workers",
        "1",
    ]
    assert main(argv) == 0
    out = tmp_path / "out"
    argv = [
        "empirical",
        "--model",
        config_path("cav_model.toml"),
        "--data",
        str(sim / "panel_001.csv"),
        "--out",
        str(out),
        "--no-recovery",
    ]
    assert main(argv + ["--paths", str(sim / "paths_001.csv")]) == 2
    argv += ["--paths", str(sim / "paths_001.csv"), "--follow-up", "20"]
    assert main(argv) == 0
    hazards = pd.read_csv(out / "hazards.csv")
    assert set(hazards["stratum"]) <= {"sex=0", "sex=1"}
    assert list(hazards.columns)[2:] == ["1-2", "1-4", "2-3", "2-4", "3-4"]


def test_transition_rejects_negative_width(two_state_files, tmp_path):
    model, _ = two_state_files
    argv = ["transition", "--model", model, "--t", "0", "--out", str(tmp_path)]
    assert main(argv + ["--h", "-1"]) == 2
    assert main(argv + ["--h", "nan"]) == 2
