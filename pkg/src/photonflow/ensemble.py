"""Trajectory ensembles, arrival histograms and fringe visibility.

Start points are spread over every slit at ``y = 0+``.  Their end points on
the screen are binned into unit-area histograms and compared with the
energy density of the field on the screen, normalized over the same range.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import argrelextrema

from .errors import EmptyEnsemble, InvalidSpec, NoExtrema
from .flowlines import IntegratorConfig, Scenario, Termination, integrate_batch
from .gratingfield import GratingSpec

__all__ = [
    "Sampling",
    "EnsembleSpec",
    "HistogramResult",
    "sample_initials",
    "run_ensemble",
    "termination_counts",
    "theory_curve",
    "histogram_arrivals",
    "visibility",
    "find_minimum",
]


class Sampling(enum.Enum):
    """Start-point layouts along each slit.

    ``STRATIFIED`` places ``n`` equally spaced points between the edges
    shifted inwards by ``edge_margin``, end points included.  ``MIDPOINT``
    splits the slit into ``n`` equal cells and takes their centres, so each
    start carries the same share of the slit's flux.  ``RANDOM`` draws
    uniformly from a seeded generator.  ``FLUX`` splits the slit into ``n``
    strips that carry equal energy flux ``S_y`` at the start height and takes
    the flux midpoint of each strip, so every trajectory carries the same
    share of the transported energy even where the band-limited field near
    the edges is dimmer than in the slit interior.
    """

    STRATIFIED = "stratified"
    MIDPOINT = "midpoint"
    RANDOM = "random"
    FLUX = "flux"

    @classmethod
    def parse(cls, value) -> "Sampling":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"uniform-stratified": "stratified", "uniformstratified": "stratified",
                   "uniform-random": "random", "uniformrandom": "random", "cells": "midpoint"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown sampling {value!r}")


@dataclass(frozen=True)
class EnsembleSpec:
    """Ensemble layout and histogram binning (lengths in metres).

    ``edge_margin = None`` means two wavelengths for stratified and random
    sampling and zero for midpoint and flux sampling.
    """

    n_per_slit: int
    screen: float
    sampling: Sampling = Sampling.STRATIFIED
    seed: int = 0
    bin_width: float = 2e-6
    hist_range: tuple[float, float] = (-250e-6, 250e-6)
    edge_margin: float | None = None
    z0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sampling", Sampling.parse(self.sampling))
        if int(self.n_per_slit) != self.n_per_slit or self.n_per_slit < 1:
            raise InvalidSpec(f"n_per_slit must be a positive integer, got {self.n_per_slit!r}")
        if not self.screen > 0:
            raise InvalidSpec("screen distance must be positive")
        if not self.bin_width > 0:
            raise InvalidSpec("bin width must be positive")
        lo, hi = self.hist_range
        if not hi > lo:
            raise InvalidSpec("histogram range must be increasing")
        if self.edge_margin is not None and self.edge_margin < 0:
            raise InvalidSpec("edge margin must be non-negative")
        object.__setattr__(self, "hist_range", (float(lo), float(hi)))

    def margin(self, wavelength: float) -> float:
        if self.edge_margin is not None:
            return self.edge_margin
        if self.sampling in (Sampling.MIDPOINT, Sampling.FLUX):
            return 0.0
        return 2.0 * wavelength

    @property
    def bin_edges(self) -> np.ndarray:
        lo, hi = self.hist_range
        n = max(1, int(round((hi - lo) / self.bin_width)))
        return lo + self.bin_width * np.arange(n + 1)


@dataclass
class HistogramResult:
    """Unit-area arrival histogram with the matching theory curve.

    ``l2_distance`` is the L2 norm of ``counts - theory`` divided by the L2
    norm of ``theory`` (both with measure ``bin_width``), so it does not
    depend on the length unit.
    """

    axis: str
    bin_edges: np.ndarray
    counts: np.ndarray
    theory: np.ndarray | None
    l2_distance: float | None
    visibility: float | None
    n_used: int
    n_outside: int

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])


def _flux_quantiles(scenario: Scenario, a: float, b: float, n: int, y0: float) -> np.ndarray:
    x = np.linspace(a, b, 64 * n + 1)
    sy = np.clip(scenario.flow(x, np.full(x.shape, y0)).S[1], 0.0, None)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (sy[1:] + sy[:-1]) * np.diff(x))])
    if not cdf[-1] > 0:
        raise InvalidSpec("no energy flux through the slit at the start height")
    return np.interp((np.arange(n) + 0.5) / n * cdf[-1], cdf, x)


def sample_initials(grating: GratingSpec, spec: EnsembleSpec, wavelength: float,
                    scenario: Scenario | None = None, y0: float | None = None) -> np.ndarray:
    """Start points ``(x0, 0, z0)``, slit by slit, shape ``(n_slits * n_per_slit, 3)``.

    Flux sampling needs the ``scenario`` and the start height ``y0``
    (default ``wavelength / 100``, the integrator default).
    """
    n = int(spec.n_per_slit)
    margin = spec.margin(wavelength)
    if 2 * margin >= grating.slit_width:
        raise InvalidSpec("edge margin leaves no room inside the slit")
    if spec.sampling is Sampling.FLUX and scenario is None:
        raise InvalidSpec("flux sampling needs a scenario")
    rng = np.random.default_rng(spec.seed) if spec.sampling is Sampling.RANDOM else None
    y0 = wavelength / 100 if y0 is None else y0
    xs = []
    for i in range(grating.n_slits):
        lo, hi = grating.slit_bounds(i)
        a, b = lo + margin, hi - margin
        if spec.sampling is Sampling.STRATIFIED:
            x = np.array([0.5 * (a + b)]) if n == 1 else a + (b - a) * np.arange(n) / (n - 1)
        elif spec.sampling is Sampling.MIDPOINT:
            x = a + (b - a) * (np.arange(n) + 0.5) / n
        elif spec.sampling is Sampling.FLUX:
            x = _flux_quantiles(scenario, a, b, n, y0)
        else:
            x = rng.uniform(a, b, n)
        xs.append(x)
    x = np.concatenate(xs)
    return np.column_stack([x, np.zeros_like(x), np.full_like(x, spec.z0)])


def _run_chunk(args):
    starts, scenario, L, cfg = args
    return integrate_batch(starts, scenario, L, cfg)


def run_ensemble(starts, scenario: Scenario, L: float,
                 cfg: IntegratorConfig = IntegratorConfig(), workers: int = 1) -> list:
    """Integrate every start; output order follows the input order.

    With ``workers > 1`` contiguous chunks run in separate processes.  Each
    trajectory is computed element-wise, so the result does not depend on
    the number of workers.
    """
    starts = np.asarray(starts, dtype=float)
    if starts.size == 0:
        return []
    if workers < 1:
        raise InvalidSpec("workers must be >= 1")
    workers = min(workers, len(starts))
    if workers == 1:
        return integrate_batch(starts, scenario, L, cfg)
    bounds = np.linspace(0, len(starts), workers + 1).round().astype(int)
    jobs = [(starts[a:b], scenario, L, cfg) for a, b in zip(bounds[:-1], bounds[1:])]
    out = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, jobs):
            out.extend(part)
    return out


def termination_counts(trajectories) -> dict:
    counts = Counter(t.terminated for t in trajectories)
    return {term.value: counts.get(term, 0) for term in Termination}


def theory_curve(scenario: Scenario, x, L: float) -> np.ndarray:
    """Energy density on the screen, normalized to unit area over the sampled ``x``.

    ``x`` must be a uniform grid (bin centres); the free scenario includes
    the interference term, the polarizer scenario does not.
    """
    x = np.asarray(x, dtype=float)
    U = scenario.flow(x, np.full(x.shape, float(L))).U
    dx = float(x[1] - x[0]) if x.size > 1 else 1.0
    return U / (U.sum() * dx)


def _relative_l2(counts, theory, width):
    num = math.sqrt(float(np.sum((counts - theory) ** 2) * width))
    den = math.sqrt(float(np.sum(theory**2) * width))
    return num / den


def histogram_arrivals(trajectories, axis: str, spec: EnsembleSpec,
                       scenario: Scenario | None = None, *,
                       window: tuple[float, float] = (-40e-6, 40e-6)) -> HistogramResult:
    """Bin the screen coordinates of trajectories that reached the screen.

    Along ``x`` a scenario attaches the normalized theory curve, the
    ``l2_distance`` to it and the theory visibility in ``window``.
    """
    axis = str(axis).lower()
    if axis not in ("x", "z"):
        raise ValueError("axis must be 'x' or 'z'")
    ends = np.array([t.end for t in trajectories if t.reached]).reshape(-1, 3)
    if ends.shape[0] == 0:
        raise EmptyEnsemble("no trajectory reached the screen")
    coord = ends[:, 0] if axis == "x" else ends[:, 2]
    edges = spec.bin_edges
    idx = np.floor((coord - edges[0]) / spec.bin_width).astype(np.int64)
    inside = (idx >= 0) & (idx < edges.size - 1)
    if not np.any(inside):
        raise EmptyEnsemble("no arrival inside the histogram range")
    hist = np.bincount(idx[inside], minlength=edges.size - 1).astype(float)
    used = int(inside.sum())
    counts = hist / (used * spec.bin_width)
    result = HistogramResult(axis, edges, counts, None, None, None, used, int((~inside).sum()))
    if axis == "x" and scenario is not None:
        theory = theory_curve(scenario, result.bin_centers, spec.screen)
        result.theory = theory
        result.l2_distance = _relative_l2(counts, theory, spec.bin_width)
        result.visibility = visibility(result.bin_centers, theory, window)
    return result


def visibility(x, curve, window: tuple[float, float]) -> float:
    """Fringe contrast ``(I_max - I_min) / (I_max + I_min)`` inside ``window``.

    ``I_max`` is the largest interior local maximum and ``I_min`` the smallest
    interior local minimum.  A curve without interior minima carries no
    fringes and has visibility 0.

    Raises
    ------
    NoExtrema
        If a non-constant curve has no interior local maximum in the window.
    """
    x = np.asarray(x, dtype=float)
    curve = np.asarray(curve, dtype=float)
    lo, hi = window
    if lo < x.min() or hi > x.max():
        raise InvalidSpec("visibility window exceeds the curve range")
    sel = (x >= lo) & (x <= hi)
    c = curve[sel]
    if c.size < 3 or np.ptp(c) <= 1e-14 * max(np.max(np.abs(c)), 1e-300):
        return 0.0
    maxima = argrelextrema(c, np.greater_equal)[0]
    minima = argrelextrema(c, np.less_equal)[0]
    maxima = maxima[(maxima > 0) & (maxima < c.size - 1)]
    minima = minima[(minima > 0) & (minima < c.size - 1)]
    if maxima.size == 0:
        raise NoExtrema("no interior local maximum in the window")
    if minima.size == 0:
        return 0.0
    imax = float(c[maxima].max())
    imin = float(c[minima].min())
    return (imax - imin) / (imax + imin)


def find_minimum(x, curve, around: float, half_width: float, smooth: float = 0.0) -> float:
    """Position of the lowest point of ``curve`` within ``around +- half_width``.

    ``smooth`` is a Gaussian width in units of ``x`` applied before the
    search; a parabola through the three lowest samples refines the result.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(curve, dtype=float)
    dx = float(x[1] - x[0])
    if smooth > 0:
        c = gaussian_filter1d(c, smooth / dx, mode="nearest")
    sel = np.flatnonzero(np.abs(x - around) <= half_width)
    if sel.size < 3:
        raise NoExtrema("window holds fewer than three samples")
    j = sel[np.argmin(c[sel])]
    if j == 0 or j == x.size - 1:
        return float(x[j])
    a, b, d = c[j - 1], c[j], c[j + 1]
    den = a - 2 * b + d
    shift = 0.5 * (a - d) / den if den > 0 else 0.0
    return float(x[j] + shift * dx)
