import os

import numpy as np
import pandas as pd
import pytest

from panelmsm.biaslab import (
    check_baseline_bias,
    check_slope_bias,
    project_lstsq,
    project_on_grid,
    regime_experiment,
    shifted_grid_times,
    slope_bias_sweep,
)
from panelmsm.exceptions import DegenerateDesignError
from panelmsm.utils import make_rng


def test_shifted_grid_baseline():
    times = shifted_grid_times(0.6, 1.0, 20)
    result = project_on_grid(times, -0.5, 1.0, 1.0)
    assert result.b1 == pytest.approx(1.0, abs=1e-12)
    assert result.b0 == pytest.approx(0.1, abs=1e-12)


def test_integer_times_are_exact():
    result = project_on_grid(np.arange(1.0, 21.0), -0.5, 1.0, 1.0)
    assert result.b0 == pytest.approx(-0.5, abs=1e-12)
    assert result.b1 == pytest.approx(1.0, abs=1e-12)


def test_closed_form_matches_lstsq():
    rng = make_rng(1)
    for _ in range(200):
        d = float(rng.choice([0.1, 0.5, 1.0, 2.0]))
        n = int(rng.integers(5, 60))
        times = rng.uniform(0.0, 10.0 * d, n)
        beta0, beta1 = rng.normal(0.0, 2.0, 2)
        closed = project_on_grid(times, beta0, beta1, d)
        generic = project_lstsq(times, beta0, beta1, d)
        assert closed.b0 == pytest.approx(generic.b0, abs=1e-10)
        assert closed.b1 == pytest.approx(generic.b1, abs=1e-10)
        assert closed.A_n == generic.A_n


def test_slope_bias_bound_on_random_designs():
    rng = make_rng(2)
    for _ in range(1_000):
        d = float(rng.choice([0.1, 0.5, 1.0, 2.0]))
        n = int(rng.integers(10, 200))
        span = float(rng.uniform(5.0, 50.0)) * d
        times = rng.uniform(0.0, span, n)
        beta1 = float(rng.normal(0.0, 3.0))
        result = check_slope_bias(times, beta1, d, beta0=float(rng.normal()))
        assert result.bias <= result.bound + 1e-10


@pytest.mark.parametrize("c", [0.0, 0.1, 0.6, 0.9])
def test_baseline_bias_equals_offset(c):
    assert check_baseline_bias(c, 1.0, -0.5, 1.0, 20) == pytest.approx(c, abs=1e-10)
    cells = make_rng(3).integers(0, 40, 25)
    bias = check_baseline_bias(c * 0.5, 0.5, 2.0, -3.0, 25, cells=cells)
    assert bias == pytest.approx(c * 0.5 * 3.0, abs=1e-10)


def test_shifted_grid_times():
    assert shifted_grid_times(0.25, 0.5, 3).tolist() == [0.75, 1.25, 1.75]
    assert shifted_grid_times(0.1, 1.0, 2, cells=np.array([4, 7])).tolist() == [
        pytest.approx(4.1),
        pytest.approx(7.1),
    ]
    with pytest.raises(ValueError):
        shifted_grid_times(1.0, 1.0, 5)
    with pytest.raises(ValueError):
        shifted_grid_times(-0.1, 1.0, 5)


def test_degenerate_design():
    with pytest.raises(DegenerateDesignError):
        project_on_grid(np.array([0.1, 0.4, 0.9]), 0.0, 1.0, 1.0)
    with pytest.raises(DegenerateDesignError):
        project_on_grid(np.array([]), 0.0, 1.0, 1.0)
    with pytest.raises(DegenerateDesignError):
        project_lstsq(np.array([2.0]), 0.0, 1.0, 1.0)


def test_slope_bias_sweep_shrinks_with_spread():
    rows = slope_bias_sweep([2.0, 5.0, 10.0, 50.0], n=500, seed=4)
    bounds = [row.bound for row in rows]
    assert bounds == sorted(bounds, reverse=True)
    assert all(row.bias <= row.bound for row in rows)
    assert rows[-1].bias < rows[0].bias
    assert rows[-1].A_n_per_n == pytest.approx(50.0**2 / 12, rel=0.15)


def test_regime_experiment(tmp_path):
    panels = regime_experiment(str(tmp_path))
    assert [p.name for p in panels] == ["integer", "shifted", "random"]
    assert [p.rows for p in panels] == [20, 20, 200]
    by_name = {p.name: p for p in panels}
    assert by_name["integer"].projection.b0 == pytest.approx(-0.5, abs=1e-12)
    assert by_name["shifted"].projection.b0 == pytest.approx(0.1, abs=1e-12)
    for panel in panels:
        assert os.path.basename(panel.path) == f"regime_{panel.name}.csv"
        df = pd.read_csv(panel.path)
        assert list(df.columns) == ["t", "g_d", "y", "b0", "b1", "beta0", "beta1"]
        assert np.all(df["g_d"] <= df["t"])
    again = regime_experiment(str(tmp_path / "again"))
    with open(panels[2].path) as f, open(again[2].path) as g:
        assert f.read() == g.read()
