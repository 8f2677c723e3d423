"""Command-line front end: ``photonflow {fieldmap,trajectories,histogram,validate}``.

Exit status is 0 on success, 1 when a validation check fails or a run hits a
numerical error, and 2 when the configuration cannot be read or is invalid.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, parse_config
from .ensemble import (find_minimum, histogram_arrivals, run_ensemble, sample_initials,
                       termination_counts)
from .errors import ParseError, PhotonFlowError, ValidationError
from .validation import format_table, report, run_suites

__all__ = ["main", "build_parser", "cmd_fieldmap", "cmd_trajectories", "cmd_histogram",
           "cmd_validate"]

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _integrate(cfg: RunConfig, workers: int, integrator=None):
    scenario = cfg.scenario()
    integrator = (integrator or cfg.integrator).resolved(cfg.wavelength)
    starts = sample_initials(cfg.grating, cfg.ensemble, cfg.wavelength, scenario,
                             y0=integrator.y0)
    t0 = time.perf_counter()
    trajs = run_ensemble(starts, scenario, cfg.screen, integrator, workers=workers)
    return scenario, trajs, time.perf_counter() - t0


def cmd_fieldmap(cfg: RunConfig, workers: int = 1) -> int:
    """Poynting vector and energy density on the configured grid."""
    out = cfg.output
    xs = np.linspace(*out.x_range, out.nx)
    ys = np.linspace(*out.y_range, out.ny)
    scenario = cfg.scenario()
    rows = [scenario.flow(xs, np.full(xs.shape, y)) for y in ys]
    S = np.stack([r.S for r in rows], axis=1)
    U = np.stack([r.U for r in rows])
    flow = type(rows[0])(S, U, rows[0].threshold)
    path = io.write_fieldmap_csv(out.directory / "fieldmap.csv", xs, ys, flow)
    if out.gnuplot:
        io.write_gnuplot(out.directory / "fieldmap.gp", "fieldmap", path)
    _log(f"wrote {path}")
    return EXIT_OK


def cmd_trajectories(cfg: RunConfig, workers: int = 1) -> int:
    """Integrate the ensemble and export every stored trajectory point."""
    out = cfg.output
    _, trajs, elapsed = _integrate(cfg, workers)
    written = []
    if "csv" in out.formats:
        written.append(io.write_trajectories_csv(out.directory / "trajectories.csv", trajs))
    if "json" in out.formats:
        written.append(io.write_trajectories_json(out.directory / "trajectories.json", trajs))
    if out.gnuplot and written:
        io.write_gnuplot(out.directory / "trajectories.gp", "trajectories", written[0])
        io.write_gnuplot(out.directory / "trajectories3d.gp", "trajectories3d", written[0])
    io.write_json(out.directory / "trajectories_summary.json",
                  {"n_trajectories": len(trajs), "termination": termination_counts(trajs)})
    _log(f"{len(trajs)} trajectories in {elapsed:.1f} s; "
         f"termination {termination_counts(trajs)}")
    return EXIT_OK


def _minima(hist, centre):
    """Histogram and theory minima near ``centre`` (histogram smoothed over 2 um)."""
    found = {"histogram": find_minimum(hist.bin_centers, hist.counts, centre, 20e-6,
                                       smooth=2e-6)}
    if hist.theory is not None:
        found["theory"] = find_minimum(hist.bin_centers, hist.theory, centre, 20e-6)
    return found


def cmd_histogram(cfg: RunConfig, workers: int = 1) -> int:
    """Arrival histograms along x and z plus a summary JSON."""
    out = cfg.output
    # only the screen points are needed
    integrator = replace(cfg.integrator, record_every=10**9)
    scenario, trajs, elapsed = _integrate(cfg, workers, integrator)
    hx = histogram_arrivals(trajs, "x", cfg.ensemble, scenario)
    hz = histogram_arrivals(trajs, "z", cfg.ensemble)
    px = io.write_histogram_csv(out.directory / "histogram_x.csv", hx)
    io.write_histogram_csv(out.directory / "histogram_z.csv", hz)
    if out.gnuplot:
        io.write_gnuplot(out.directory / "histogram_x.gp", "histogram", px)
    first_zero = cfg.wavelength * cfg.screen / cfg.grating.slit_width
    summary = {
        "n_trajectories": len(trajs),
        "n_binned": hx.n_used,
        "n_outside_range": hx.n_outside,
        "termination": termination_counts(trajs),
        "l2_distance": hx.l2_distance,
        "visibility": hx.visibility,
        "visibility_window": [-40e-6, 40e-6],
        "minima": {"minus": _minima(hx, -first_zero), "plus": _minima(hx, first_zero)},
    }
    io.write_json(out.directory / "summary.json", summary)
    _log(f"{len(trajs)} trajectories in {elapsed:.1f} s; l2_distance {hx.l2_distance:.4f}; "
         f"visibility {hx.visibility:.4f}")
    return EXIT_OK


def cmd_validate(cfg: RunConfig, workers: int = 1) -> int:
    """Cross-check suites; prints a pass/fail table and writes validation.json."""
    checks = run_suites(cfg.wavelength, cfg.grating, cfg.pol, cfg.screen)
    print(format_table(checks))
    rep = report(checks)
    io.write_json(cfg.output.directory / "validation.json", rep)
    print("all checks passed" if rep["passed"] else "some checks FAILED")
    return EXIT_OK if rep["passed"] else EXIT_FAILED


COMMANDS = {
    "fieldmap": cmd_fieldmap,
    "trajectories": cmd_trajectories,
    "histogram": cmd_histogram,
    "validate": cmd_validate,
}


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photonflow",
        description="Electromagnetic energy flow lines behind polarized N-slit gratings.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__.splitlines()[0])
        p.add_argument("--config", required=True, type=Path, metavar="PATH",
                       help="INI configuration file")
        p.add_argument("--out", type=Path, metavar="DIR",
                       help="output directory (overrides [output] directory)")
        p.add_argument("--workers", type=_positive, default=1, metavar="N",
                       help="worker processes for the ensemble (default 1)")
        p.add_argument("--seed", type=_u64, metavar="U64",
                       help="random seed (overrides [ensemble] seed)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except (ParseError, ValidationError) as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    if args.out is not None:
        cfg = cfg.with_directory(args.out)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    try:
        return COMMANDS[args.command](cfg, workers=args.workers)
    except PhotonFlowError as exc:
        _log(f"error: {type(exc).__name__}: {exc}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
