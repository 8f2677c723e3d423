from __future__ import annotations

import json

import numpy as np
import pytest

from photonflow import io
from photonflow.emfield import FlowState
from photonflow.ensemble import HistogramResult
from photonflow.flowlines import Termination, Trajectory


def test_fmt_twelve_significant_digits():
    assert io.fmt(1.0 / 3.0) == "3.33333333333e-01"
    assert io.fmt(-2.5e-6) == "-2.50000000000e-06"
    assert io.fmt(float("nan")) == "nan"
    assert float(io.fmt(np.pi)) == pytest.approx(np.pi, rel=1e-11)


def trajectories():
    a = Trajectory(np.array([[-1e-6, 5e-9, 0.0], [-1.2e-6, 1e-3, 3e-8]]), 0)
    b = Trajectory(np.array([[1e-6, 5e-9, 0.0], [1.1e-6, 5e-4, -2e-8]]), 1,
                   Termination.NODAL_STALL)
    return [a, b]


def test_trajectory_csv_round_trip(tmp_path):
    path = io.write_trajectories_csv(tmp_path / "sub" / "t.csv", trajectories())
    lines = path.read_text().splitlines()
    assert lines[0] == "traj_id,slit,x,y,z"
    assert len(lines) == 5 and lines[1].startswith("0,0,") and lines[3].startswith("1,1,")
    back = io.read_trajectories_csv(path)
    for a, b in zip(trajectories(), back):
        assert np.array_equal(a.points, b.points) and a.slit_index == b.slit_index


def test_trajectory_csv_rejects_foreign_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io.read_trajectories_csv(p)


def test_trajectory_json(tmp_path):
    data = json.loads(io.write_trajectories_json(tmp_path / "t.json", trajectories()).read_text())
    assert data["columns"] == ["traj_id", "slit", "x", "y", "z"]
    assert len(data["rows"]) == 4 and data["rows"][2]["traj_id"] == 1
    assert data["trajectories"][1]["terminated"] == "nodal-stall"


def test_fieldmap_is_row_major(tmp_path):
    xs = np.array([0.0, 1.0, 2.0])
    ys = np.array([10.0, 20.0])
    S = np.arange(18, dtype=float).reshape(3, 2, 3)
    U = np.arange(6, dtype=float).reshape(2, 3) + 1
    path = io.write_fieldmap_csv(tmp_path / "f.csv", xs, ys, FlowState(S, U))
    rows = [r.split(",") for r in path.read_text().splitlines()]
    assert rows[0] == ["x", "y", "Sx", "Sy", "Sz", "U"]
    body = np.array(rows[1:], dtype=float)
    assert np.array_equal(body[:, 0], np.tile(xs, 2))
    assert np.array_equal(body[:, 1], np.repeat(ys, 3))
    assert np.array_equal(body[:, 5], U.ravel())
    assert np.array_equal(body[:, 3], S[1].ravel())


def test_histogram_csv(tmp_path):
    h = HistogramResult("z", np.array([0.0, 1.0, 2.0]), np.array([0.25, 0.75]), None, None,
                        None, 4, 0)
    lines = io.write_histogram_csv(tmp_path / "h.csv", h).read_text().splitlines()
    assert lines[0] == "bin_center,count_density,theory_density"
    assert lines[1] == "5.00000000000e-01,2.50000000000e-01,nan"


def test_json_rounding_and_nonfinite(tmp_path):
    path = io.write_json(tmp_path / "s.json", {"b": 1 / 3, "a": [np.float64(np.inf), np.int64(3)],
                                               "c": np.bool_(True), "d": None})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    data = json.loads(text)
    assert data == {"a": [None, 3], "b": 0.333333333333, "c": True, "d": None}


@pytest.mark.parametrize("kind", ["trajectories", "trajectories3d", "histogram", "fieldmap"])
def test_gnuplot_scripts_reference_data_file(tmp_path, kind):
    text = io.write_gnuplot(tmp_path / "p.gp", kind, tmp_path / "deep" / "data.csv").read_text()
    assert "'data.csv'" in text and "separator ','" in text


def test_gnuplot_unknown_kind(tmp_path):
    with pytest.raises(ValueError):
        io.write_gnuplot(tmp_path / "p.gp", "polar", "x.csv")
