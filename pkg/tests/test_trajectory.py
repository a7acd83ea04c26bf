from __future__ import annotations

import numpy as np
import pytest

from friendswarm.dynamics import IntegratorConfig, run
from friendswarm.errors import TrajectoryError
from friendswarm.scenario import named_scenario
from friendswarm.trajectory import TrajectoryRecord, read_trajectory, write_trajectory


def test_single_sample_two_agents(tmp_path):
    tr = TrajectoryRecord([0.0], [[[0.0, 0.0], [1.0, 0.5]]], meta={"red_index": 1})
    path = write_trajectory(tr, tmp_path / "t.csv")
    data = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert data[0] == "step,time,agent_id,is_red,x,y"
    assert data[1:] == ["0,0.0,0,0,0.0,0.0", "0,0.0,1,1,1.0,0.5"]


def test_round_trip_is_lossless(tmp_path):
    sc = named_scenario("fig8")
    tr = run(sc.initial, sc.K, IntegratorConfig(), 2.0, sample_every=7, meta={"seed": 3, "note": "x"})
    back = read_trajectory(write_trajectory(tr, tmp_path / "t.csv"))
    assert back == tr


def test_red_index_inferred_from_column(tmp_path):
    tr = TrajectoryRecord([0.0, 1.0], np.arange(12.0).reshape(2, 3, 2), meta={"red_index": 2})
    path = write_trajectory(tr, tmp_path / "t.csv")
    lines = [l for l in path.read_text().splitlines() if not l.startswith("# meta")]
    (tmp_path / "u.csv").write_text("\n".join(lines) + "\n")
    assert read_trajectory(tmp_path / "u.csv").red_index == 2


def test_record_validation():
    with pytest.raises(TrajectoryError):
        TrajectoryRecord([0.0, 0.0], np.zeros((2, 2, 2)))
    with pytest.raises(TrajectoryError):
        TrajectoryRecord([0.0], np.zeros((1, 2, 3)))
    with pytest.raises(TrajectoryError):
        TrajectoryRecord([0.0, 1.0], np.zeros((1, 2, 2)))


def test_io_errors_name_the_path(tmp_path):
    with pytest.raises(OSError, match="missing.csv"):
        read_trajectory(tmp_path / "missing.csv")
    tr = TrajectoryRecord([0.0], np.zeros((1, 2, 2)) + [[0, 0], [1, 0]])
    with pytest.raises(OSError, match="nodir"):
        write_trajectory(tr, tmp_path / "nodir" / "t.csv")


def test_bad_file_rejected(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(TrajectoryError):
        read_trajectory(p)
