from __future__ import annotations

import math

import pytest

from friendswarm.config import RunConfig, SweepConfig, load_config, parse_config
from friendswarm.errors import ConfigError


def test_named_scenario_defaults():
    rc = parse_config('scenario = "fig6"\nduration = 200\n')
    assert isinstance(rc, RunConfig)
    assert rc.params == (2.0, 0.5, 2.0)
    assert rc.duration == 200
    assert rc.integrator.dt == 0.01 and rc.integrator.method.value == "rk4"
    assert rc.hardware is None
    assert rc.thresholds.cv_max == 0.2


def test_scenario_required():
    with pytest.raises(ConfigError) as err:
        parse_config("")
    assert err.value.key == "scenario"


def test_negative_dt_names_key():
    with pytest.raises(ConfigError) as err:
        parse_config('scenario = "fig6"\ndt = -0.1\n')
    assert err.value.key == "dt"


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        parse_config('scenario = "fig6"\nbogus = 1\n')
    with pytest.raises(ConfigError, match="hardware.lasers"):
        parse_config('scenario = "fig6"\n[hardware]\nlasers = 1\n')


def test_syntax_error_has_line():
    with pytest.raises(ConfigError) as err:
        parse_config('scenario = "fig6"\nduration = = 3\n')
    assert err.value.line == 2


def test_param_and_matrix_scenarios():
    rc = parse_config('scenario = {k_p = 1.0, k_m = 0.2, k_a = 1.5, initial = "polygon", radius = 2.0}\n')
    assert rc.params == (1.0, 0.2, 1.5)
    assert rc.scenario.initial.positions[0] == pytest.approx([2.0, 0.0], abs=1e-2)
    rc = parse_config("scenario = {matrix = [[0, 3], [1, 0]], positions = [[0, 0], [1, 0]]}\n")
    assert rc.params is None and rc.scenario.K.k[0, 1] == 3
    rc = parse_config('scenario = {matrix = [[0, 1, 1], [1, 0, 1], [1, 1, 0]], initial = "polygon"}\n')
    assert rc.scenario.initial.n == 3


def test_matrix_scenario_needs_one_initial_source():
    with pytest.raises(ConfigError):
        parse_config("scenario = {matrix = [[0, 3], [1, 0]]}\n")


def test_downstream_rejections_are_front_loaded():
    with pytest.raises(ConfigError, match="scenario"):
        parse_config("scenario = {matrix = [[0, 3, 1], [1, 0, 1]], positions = [[0, 0], [1, 0]]}\n")
    with pytest.raises(ConfigError, match="mode"):
        parse_config('mode = "hardware"\nscenario = {matrix = [[0, 3], [1, 0]], positions = [[0, 0], [1, 0]]}\n')
    with pytest.raises(ConfigError, match="hardware"):
        parse_config('scenario = "fig8"\nmode = "hardware"\n[hardware]\nhalf_angle = 1.0\n')
    with pytest.raises(ConfigError, match="analysis"):
        parse_config('scenario = "fig8"\n[analysis]\ntransient_fraction = 1.5\n')


def test_hardware_section():
    rc = parse_config('scenario = "fig8"\nmode = "hardware"\nseed = 4\n[hardware]\nnoise_sigma = 0.02\nrange = 1.5\n')
    assert rc.hardware.noise_sigma == 0.02
    assert rc.hardware.layout.range == 1.5
    assert rc.hardware.layout.half_angle == pytest.approx(math.pi / 12)
    assert rc.hardware.seed == 4


def test_sweep_axes_grid_is_lexicographic():
    sc = parse_config(
        "duration = 10\n[sweep]\njobs = 2\nfixed = {k_a = 2.0}\n"
        "[sweep.axes.k_p]\nmin = 1\nmax = 2\nsteps = 2\n[sweep.axes.k_m]\nmin = -1\nmax = 1\nsteps = 3\n"
    )
    assert isinstance(sc, SweepConfig)
    grid = sc.grid()
    assert [(g["k_p"], g["k_m"]) for g in grid] == [(1, -1), (1, 0), (1, 1), (2, -1), (2, 0), (2, 1)]
    assert all(g["k_a"] == 2.0 for g in grid)
    assert sc.jobs == 2


def test_sweep_validation():
    with pytest.raises(ConfigError, match="steps"):
        parse_config("[sweep]\nfixed = {k_p = 1, k_a = 1}\n[sweep.axes.k_m]\nmin = 0\nmax = 1\nsteps = 1\n")
    with pytest.raises(ConfigError, match="fixed values missing"):
        parse_config("[sweep]\n[sweep.axes.k_m]\nmin = 0\nmax = 1\nsteps = 2\n")
    with pytest.raises(ConfigError, match="finite"):
        parse_config("[sweep]\nfixed = {k_p = 1, k_a = 1}\n[sweep.axes.k_m]\nmin = 0\nmax = inf\nsteps = 2\n")
    with pytest.raises(ConfigError):
        parse_config('[sweep]\ncells = [{scenario = "fig6", k_p = 1.0}]\n')


def test_sweep_cells():
    sc = parse_config('[sweep]\ncells = [{scenario = "fig7"}, {k_p = 2.0, k_m = 0.5, k_a = 2.0}]\n')
    assert sc.grid() == [{"scenario": "fig7"}, {"k_p": 2.0, "k_m": 0.5, "k_a": 2.0}]


def test_load_config_overrides(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('scenario = "fig6"\nduration = 20\n')
    rc = load_config(p, {"duration": 5.0, "hardware.noise_sigma": 0.1, "mode": "hardware"})
    assert rc.duration == 5.0 and rc.mode == "hardware" and rc.hardware.noise_sigma == 0.1
    with pytest.raises(ConfigError):
        load_config(p, {"dt": 0.0})
    with pytest.raises(OSError):
        load_config(tmp_path / "missing.toml")
