from __future__ import annotations

import csv
import json
import re

import numpy as np
import pytest

from friendswarm.cli import main
from friendswarm.config import parse_config
from friendswarm.dynamics import IntegratorConfig, run
from friendswarm.render import svg_filmstrip, svg_snapshot
from friendswarm.runner import cell_seed, execute_run, run_sweep
from friendswarm.scenario import named_scenario
from friendswarm.trajectory import read_trajectory


def test_execute_fig7_reports_translational(tmp_path):
    rep = execute_run(parse_config('scenario = "fig7"\nduration = 60\n'), tmp_path)
    assert rep["label"] == "Translational"
    saved = json.loads((tmp_path / "report.json").read_text())
    assert saved["label"] == "Translational"
    tr = read_trajectory(tmp_path / "trajectory.csv")
    assert tr.meta["scenario"] == "fig7" and tr.meta["seed"] == 0 and tr.meta["mode"] == "ideal"


def test_fig6_file_red_inside_blue_hull(tmp_path):
    execute_run(parse_config('scenario = "fig6"\nduration = 60\n'), tmp_path)
    rows = list(csv.reader(l for l in (tmp_path / "trajectory.csv").read_text().splitlines() if l[0] != "#"))
    last_step = rows[-1][0]
    final = [r for r in rows[1:] if r[0] == last_step]
    red = np.array([[float(r[4]), float(r[5])] for r in final if r[3] == "1"])[0]
    blue = np.array([[float(r[4]), float(r[5])] for r in final if r[3] == "0"])
    # red inside the hull: it lies on the inner side of every blue-blue edge
    from scipy.spatial import ConvexHull

    hull = ConvexHull(blue)
    assert np.all(hull.equations[:, :2] @ red + hull.equations[:, 2] < 0)


def test_same_config_twice_is_byte_identical(tmp_path):
    cfg = parse_config('scenario = "fig8"\nduration = 5\nmode = "hardware"\n[hardware]\nnoise_sigma = 0.02\n')
    execute_run(cfg, tmp_path / "a")
    execute_run(cfg, tmp_path / "b")
    for name in ("trajectory.csv", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cell_seed_is_stable():
    assert cell_seed(0, 0) == cell_seed(0, 0)
    assert len({cell_seed(0, i) for i in range(50)}) == 50
    assert cell_seed(1, 0) != cell_seed(0, 0)


def test_sweep_single_cell_fig6(tmp_path):
    sc = parse_config('duration = 60\n[sweep]\ncells = [{scenario = "fig6"}]\n')
    rows = run_sweep(sc, tmp_path)
    assert [r["kind"] for r in rows] == ["Stationary"]
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert len(lines) == 2


def test_sweep_three_figures(tmp_path):
    sc = parse_config('duration = 60\n[sweep]\ncells = [{scenario = "fig7"}, {scenario = "fig6"}, {scenario = "fig8"}]\n')
    rows = run_sweep(sc, tmp_path)
    assert [r["k_m"] for r in rows] == [-1.0, 0.5, 2.4]
    assert [r["kind"] for r in rows] == ["Translational", "Stationary", "Oscillatory"]


def test_sweep_km_axis_covers_three_regimes(tmp_path):
    sc = parse_config(
        "duration = 100\n[sweep]\nfixed = {k_p = 1.6, k_a = 1.6}\n"
        "[sweep.axes.k_m]\nmin = -1.0\nmax = 2.4\nsteps = 5\n"
    )
    kinds = {r["kind"] for r in run_sweep(sc, tmp_path)}
    assert {"Stationary", "Translational", "Oscillatory"} <= kinds


def test_sweep_records_failed_cells(tmp_path, monkeypatch):
    import friendswarm.runner as runner
    from friendswarm.errors import DegenerateStateError

    real = runner.simulate

    def flaky(rc):
        if rc.params[1] == 0.5:
            raise DegenerateStateError("agents collapsed", 7)
        return real(rc)

    monkeypatch.setattr(runner, "simulate", flaky)
    sc = parse_config('duration = 10\n[sweep]\ncells = [{scenario = "fig7"}, {scenario = "fig6"}]\n')
    rows = run_sweep(sc, tmp_path)
    assert rows[0]["kind"] == "Translational" and rows[0]["note"] == ""
    assert rows[1]["kind"] == "Unresolved"
    assert "DegenerateStateError" in rows[1]["note"] and "step 7" in rows[1]["note"]
    assert "Unresolved" in (tmp_path / "summary.csv").read_text()


def test_sweep_jobs_do_not_change_output(tmp_path):
    text = "duration = 8\n[sweep]\nfixed = {k_p = 1.6, k_a = 1.6}\n[sweep.axes.k_m]\nmin = -1.0\nmax = 2.4\nsteps = 4\n"
    sc = parse_config(text)
    run_sweep(sc, tmp_path / "one", jobs=1)
    run_sweep(sc, tmp_path / "four", jobs=4)
    for name in ("summary.csv", "labels.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "four" / name).read_bytes()


@pytest.fixture(scope="module")
def fig8_traj():
    sc = named_scenario("fig8")
    return run(sc.initial, sc.K, IntegratorConfig(), 20.0, sample_every=10)


def test_snapshot_svg(fig8_traj):
    svg = svg_snapshot(fig8_traj)
    assert svg.count("<circle") == 5
    assert svg.count('fill="#d62728"') == 1
    assert svg == svg_snapshot(fig8_traj)
    assert "<polyline" in svg
    assert "<polyline" not in svg_snapshot(fig8_traj, trail=0)


def test_filmstrip_svg(fig8_traj):
    svg = svg_filmstrip(fig8_traj, panels=6)
    assert svg.count('class="panel"') == 6
    assert svg.count("<circle") == 30
    assert len(re.findall(r'<circle[^>]*fill="#d62728"', svg)) == 6


def test_cli_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.toml"
    cfg.write_text('scenario = "fig7"\nduration = 40\n')
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    traj = tmp_path / "o" / "trajectory.csv"
    assert main(["classify", "--traj", str(traj)]) == 0
    assert '"label": "Translational"' in capsys.readouterr().out
    assert main(["render", "--traj", str(traj), "--mode", "filmstrip", "--out", str(tmp_path / "f.svg")]) == 0
    assert (tmp_path / "f.svg").read_text().count('class="panel"') == 6


def test_cli_flag_overrides_file(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('scenario = "fig6"\nduration = 40\n')
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path), "--duration", "2", "--seed", "9"]) == 0
    tr = read_trajectory(tmp_path / "trajectory.csv")
    assert tr.times[-1] == pytest.approx(2.0)
    assert tr.meta["seed"] == 9


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text('scenario = "fig6"\ndt = -0.1\n')
    assert main(["simulate", "--config", str(bad)]) == 1
    assert main(["simulate", "--config", str(tmp_path / "none.toml")]) == 3
    assert main(["classify", "--traj", str(tmp_path / "none.csv")]) == 3
    crash = tmp_path / "crash.toml"
    crash.write_text(
        'method = "euler"\ndt = 0.0050505050505050505\nduration = 1\n'
        "scenario = {matrix = [[0, 100], [100, 0]], positions = [[0, 0], [1, 0]]}\n"
    )
    assert main(["simulate", "--config", str(crash), "--out", str(tmp_path / "c")]) == 2
    sweep_doc = tmp_path / "s.toml"
    sweep_doc.write_text('[sweep]\ncells = [{scenario = "fig6"}]\n')
    assert main(["simulate", "--config", str(sweep_doc)]) == 1
