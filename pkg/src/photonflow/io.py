"""Deterministic CSV/JSON export and gnuplot scripts.

Floating-point numbers are written with 12 significant digits in a fixed
column order, so identical runs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .ensemble import HistogramResult
from .flowlines import Termination, Trajectory

__all__ = [
    "fmt",
    "TRAJECTORY_COLUMNS",
    "FIELDMAP_COLUMNS",
    "HISTOGRAM_COLUMNS",
    "write_trajectories_csv",
    "write_trajectories_json",
    "read_trajectories_csv",
    "write_fieldmap_csv",
    "write_histogram_csv",
    "write_json",
    "write_gnuplot",
]

TRAJECTORY_COLUMNS = ("traj_id", "slit", "x", "y", "z")
FIELDMAP_COLUMNS = ("x", "y", "Sx", "Sy", "Sz", "U")
HISTOGRAM_COLUMNS = ("bin_center", "count_density", "theory_density")


def fmt(value) -> str:
    """Twelve significant digits; ``nan`` for missing values."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.11e}"


def _round(value):
    return float(fmt(value)) if value is not None and math.isfinite(value) else None


def _write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return path


def _trajectory_rows(trajectories):
    for tid, traj in enumerate(trajectories):
        head = (str(tid), str(int(traj.slit_index)))
        for x, y, z in np.asarray(traj.points, dtype=float):
            yield head + (fmt(x), fmt(y), fmt(z))


def write_trajectories_csv(path, trajectories) -> Path:
    """One row per stored point, trajectories in input order."""
    return _write_rows(path, TRAJECTORY_COLUMNS, _trajectory_rows(trajectories))


def write_trajectories_json(path, trajectories) -> Path:
    """Same rows as the CSV as a list of records, plus per-trajectory status."""
    rows = [dict(zip(TRAJECTORY_COLUMNS, (int(r[0]), int(r[1]), *map(float, r[2:]))))
            for r in _trajectory_rows(trajectories)]
    status = [{"traj_id": i, "slit": int(t.slit_index), "terminated": t.terminated.value}
              for i, t in enumerate(trajectories)]
    return write_json(path, {"columns": list(TRAJECTORY_COLUMNS), "rows": rows,
                             "trajectories": status})


def read_trajectories_csv(path) -> list[Trajectory]:
    """Read trajectories written by :func:`write_trajectories_csv`.

    The termination status is not stored in the CSV and is reported as
    ``REACHED_SCREEN``.
    """
    groups: dict[int, tuple[int, list]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRAJECTORY_COLUMNS:
            raise ValueError(f"unexpected header {header!r}")
        for row in reader:
            tid, slit = int(row[0]), int(row[1])
            groups.setdefault(tid, (slit, []))[1].append([float(v) for v in row[2:]])
    return [Trajectory(np.array(pts), slit, Termination.REACHED_SCREEN)
            for _, (slit, pts) in sorted(groups.items())]


def write_fieldmap_csv(path, xs, ys, flow) -> Path:
    """Flow on the grid ``ys x xs``, row-major: ``y`` outer, ``x`` inner.

    ``flow`` is a FlowState whose arrays have shape ``(len(ys), len(xs))``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    S = np.asarray(flow.S, dtype=float)
    U = np.asarray(flow.U, dtype=float)

    def rows():
        for i, y in enumerate(ys):
            for j, x in enumerate(xs):
                yield (fmt(x), fmt(y), fmt(S[0, i, j]), fmt(S[1, i, j]), fmt(S[2, i, j]),
                       fmt(U[i, j]))

    return _write_rows(path, FIELDMAP_COLUMNS, rows())


def write_histogram_csv(path, hist: HistogramResult) -> Path:
    theory = hist.theory if hist.theory is not None else np.full(hist.counts.shape, np.nan)
    rows = ((fmt(c), fmt(n), fmt(t)) for c, n, t in zip(hist.bin_centers, hist.counts, theory))
    return _write_rows(path, HISTOGRAM_COLUMNS, rows)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    return obj


def write_json(path, data) -> Path:
    """Sorted keys, floats rounded to 12 significant digits, non-finite as null."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


_GNUPLOT = {
    "trajectories": """set datafile separator ','
set key off
set xlabel 'y (mm)'
set ylabel 'x (um)'
plot '{data}' skip 1 using ($4*1e3):($3*1e6) with lines lc rgb 'black'
""",
    "trajectories3d": """set datafile separator ','
set key off
set xlabel 'y (mm)'
set ylabel 'x (um)'
set zlabel 'z (um)'
splot '{data}' skip 1 using ($4*1e3):($3*1e6):($5*1e6) with lines lc rgb 'black'
""",
    "histogram": """set datafile separator ','
set xlabel 'x (um)'
set ylabel 'density (1/m)'
plot '{data}' skip 1 using ($1*1e6):2 with boxes title 'arrivals', \\
     '{data}' skip 1 using ($1*1e6):3 with lines lw 2 title 'energy density'
""",
    "fieldmap": """set datafile separator ','
set xlabel 'x (um)'
set ylabel 'y (mm)'
set view map
splot '{data}' skip 1 using ($1*1e6):($2*1e3):6 with points palette pt 5 ps 0.5 title 'U'
""",
}


def write_gnuplot(path, kind: str, data_file) -> Path:
    """A gnuplot script plotting ``data_file`` (referenced by file name)."""
    if kind not in _GNUPLOT:
        raise ValueError(f"unknown plot kind {kind!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_GNUPLOT[kind].format(data=Path(data_file).name), encoding="utf-8")
    return path
