"""Electromagnetic-energy flow lines behind the grating and in the incident region.

Flow lines are integral curves of the velocity field ``S / (c U)``.  Behind
the grating ``S_y > 0`` everywhere in the computed domain while ``S_x``
vanishes on the symmetry axis, so the curves are parametrized by ``y``:

    dx/dy = S_x / S_y,    dz/dy = S_z / S_y.

The fields do not depend on ``z``, so the slopes depend on ``(x, y)`` only
and many trajectories are advanced together with one vectorized field call
per Runge-Kutta stage.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .constants import C
from .emfield import FlowState, poynting_free, poynting_polarized
from .errors import BackflowError, InvalidSpec, NodalPoint
from .gratingfield import FieldSample, GratingSpec, PropagatorVariant, SpectralSlab, slit_fields
from .polarization import PolarizationSpec

__all__ = [
    "ScenarioKind",
    "Scenario",
    "Termination",
    "Trajectory",
    "IntegratorConfig",
    "velocity_slopes",
    "step_grid",
    "integrate",
    "integrate_batch",
    "integrate_arclength",
    "incident_path",
    "resample_x",
    "count_crossings",
]


class ScenarioKind(enum.Enum):
    FREE = "free"
    POLARIZERS = "polarizers"

    @classmethod
    def parse(cls, value) -> "ScenarioKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"free-slits": "free", "freeslits": "free",
                   "orthogonal-polarizers": "polarizers", "orthogonalpolarizers": "polarizers",
                   "polarized": "polarizers"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown scenario {value!r}")


@dataclass(frozen=True)
class Scenario:
    """Grating, incident polarization, slit covering and field model.

    In the polarizer scenario slit 0 carries the z-axis polarizer and slit 1
    the x-axis polarizer; ``swap_polarizers`` exchanges them.

    With a mode backend, points closer to the grating than ``near_zone``
    (default: 14 half-extents of the grating) are evaluated on a
    :class:`~photonflow.gratingfield.SpectralSlab` whenever they share one
    height.  Beyond ``near_zone`` the paraxial model is evaluated with the
    closed-form Fresnel integrals, which coincide with the truncated mode
    integral there up to the spectral-truncation tail.
    """

    grating: GratingSpec
    pol: PolarizationSpec
    wavelength: float
    kind: ScenarioKind = ScenarioKind.FREE
    backend: PropagatorVariant = PropagatorVariant.MODE_PARAXIAL
    swap_polarizers: bool = False
    near_zone: float | None = None
    _slab: SpectralSlab | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.wavelength > 0:
            raise InvalidSpec(f"wavelength must be positive, got {self.wavelength!r}")
        object.__setattr__(self, "kind", ScenarioKind.parse(self.kind))
        object.__setattr__(self, "backend", PropagatorVariant.parse(self.backend))
        if self.kind is ScenarioKind.POLARIZERS and self.grating.n_slits != 2:
            raise InvalidSpec("the orthogonal-polarizer scenario needs exactly two slits")
        if self.near_zone is None:
            object.__setattr__(self, "near_zone", 14.0 * self.grating.half_extent)
        if self.near_zone < 0:
            raise InvalidSpec("near_zone must be non-negative")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def slab(self) -> SpectralSlab:
        if self._slab is None:
            window = max(64.0 * self.grating.half_extent,
                         4.0 * (self.grating.half_extent + self.near_zone))
            object.__setattr__(self, "_slab", SpectralSlab(self.grating, self.k, self.backend,
                                                           window=window))
        return self._slab

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_slab"] = None
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    def slit_samples(self, x, y) -> FieldSample:
        """Per-slit fields (leading slit axis) at broadcast points ``(x, y)``."""
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        if self.backend is PropagatorVariant.FRESNEL_KIRCHHOFF:
            return slit_fields(x, y, self.grating, self.k, self.backend)
        far = x.size and np.all(y >= self.near_zone)
        if far and self.backend is PropagatorVariant.MODE_PARAXIAL:
            return slit_fields(x, y, self.grating, self.k, PropagatorVariant.FRESNEL_KIRCHHOFF)
        if x.size and np.all(y < self.near_zone) and np.all(y == y.flat[0]):
            if np.all(self.slab.covers(x)):
                f = self.slab.sample(x.ravel(), float(y.flat[0]))
                shape = (self.grating.n_slits,) + x.shape
                return FieldSample(f.psi.reshape(shape), f.dpsi_dx.reshape(shape),
                                   f.dpsi_dy.reshape(shape))
        return slit_fields(x, y, self.grating, self.k, self.backend)

    def covered(self, per_slit: FieldSample) -> tuple[FieldSample, FieldSample]:
        """Fields behind the z-axis and the x-axis polarizer, in that order."""
        zi = 1 if self.swap_polarizers else 0
        return per_slit[zi], per_slit[1 - zi]

    def flow(self, x, y, *, strict: bool = False) -> FlowState:
        per_slit = self.slit_samples(x, y)
        if self.kind is ScenarioKind.FREE:
            total = FieldSample(per_slit.psi.sum(axis=0), per_slit.dpsi_dx.sum(axis=0),
                                per_slit.dpsi_dy.sum(axis=0))
            return poynting_free(total, self.pol, self.k, strict=strict)
        f1, f2 = self.covered(per_slit)
        return poynting_polarized(f1, f2, self.pol, self.k, strict=strict)


class Termination(enum.Enum):
    REACHED_SCREEN = "reached-screen"
    NODAL_STALL = "nodal-stall"
    STEP_LIMIT = "step-limit"
    BACKFLOW = "backflow"


@dataclass
class Trajectory:
    """Polyline of ``(x, y, z)`` points in metres, shape ``(n, 3)``."""

    points: np.ndarray
    slit_index: int
    terminated: Termination = Termination.REACHED_SCREEN
    duration: float | None = None

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def reached(self) -> bool:
        return self.terminated is Termination.REACHED_SCREEN


@dataclass(frozen=True)
class IntegratorConfig:
    """Step control for the fixed-step RK4 integrator.

    The step at height ``y`` is ``max(step, growth * y)``, so ``growth = 0``
    gives a uniform grid and a small positive ``growth`` lets the step widen
    in the far field, where the flow lines are nearly straight.  ``step`` and
    ``y0`` default to ``wavelength / 20`` and ``wavelength / 100``.
    """

    step: float | None = None
    growth: float = 0.0
    y0: float | None = None
    max_steps: int | None = None
    max_halvings: int = 8
    record_every: int = 1
    block_size: int = 8192

    def __post_init__(self):
        if self.step is not None and not self.step > 0:
            raise InvalidSpec(f"step must be positive, got {self.step!r}")
        if self.y0 is not None and not self.y0 > 0:
            raise InvalidSpec(f"y0 must be positive, got {self.y0!r}")
        if not self.growth >= 0:
            raise InvalidSpec("growth must be non-negative")
        if self.record_every < 1 or self.block_size < 1 or self.max_halvings < 0:
            raise InvalidSpec("record_every and block_size must be >= 1, max_halvings >= 0")

    def resolved(self, wavelength: float) -> "IntegratorConfig":
        return replace(self, step=self.step if self.step is not None else wavelength / 20,
                       y0=self.y0 if self.y0 is not None else wavelength / 100)


def step_grid(cfg: IntegratorConfig, L: float) -> np.ndarray:
    """Heights visited by the integrator; the last entry is exactly ``L``."""
    if cfg.step is None or cfg.y0 is None:
        raise InvalidSpec("resolve the integrator config against a wavelength first")
    if not L > cfg.y0:
        raise InvalidSpec(f"screen distance {L!r} must exceed the start height {cfg.y0!r}")
    if cfg.growth == 0:
        n = math.ceil((L - cfg.y0) / cfg.step * (1 - 1e-12))
        ys = cfg.y0 + cfg.step * np.arange(n + 1)
    else:
        ys = [cfg.y0]
        while ys[-1] < L:
            ys.append(ys[-1] + max(cfg.step, cfg.growth * ys[-1]))
        ys = np.asarray(ys)
    ys[-1] = L
    ys = ys[:-1][ys[:-1] < L]
    return np.append(ys, L)


# --------------------------------------------------------------------------
# slopes

def _raw_slopes(scenario: Scenario, x, y):
    flow = scenario.flow(x, y)
    sx, sy, sz = flow.S
    nodal = flow.nodal | ~np.isfinite(flow.U)
    backflow = ~nodal & ~(sy > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return sx / sy, sz / sy, nodal, backflow


def velocity_slopes(x, y, scenario: Scenario):
    """``(dx/dy, dz/dy)`` at the given points.

    Raises
    ------
    NodalPoint
        If the energy density is below the nodal threshold.
    BackflowError
        If ``S_y <= 0``.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    dx, dz, nodal, backflow = _raw_slopes(scenario, x, y)
    if np.any(nodal):
        raise NodalPoint("energy density below the nodal threshold")
    if np.any(backflow):
        raise BackflowError("non-positive longitudinal flux S_y")
    return dx, dz


def _rk4(scenario, x, z, y, h):
    """One RK4 step for all trajectories; returns new x, z and failure masks."""
    n = x.size
    mid = np.full(n, y + 0.5 * h)
    a, az, n1, b1 = _raw_slopes(scenario, x, np.full(n, y))
    b, bz, n2, b2 = _raw_slopes(scenario, x + 0.5 * h * a, mid)
    c, cz, n3, b3 = _raw_slopes(scenario, x + 0.5 * h * b, mid)
    d, dz, n4, b4 = _raw_slopes(scenario, x + h * c, np.full(n, y + h))
    xn = x + h / 6.0 * (a + 2 * b + 2 * c + d)
    zn = z + h / 6.0 * (az + 2 * bz + 2 * cz + dz)
    nodal = n1 | n2 | n3 | n4
    backflow = (b1 | b2 | b3 | b4) & ~nodal
    return xn, zn, nodal, backflow


def _advance(scenario, x, z, y, h, level, max_level):
    """Advance from ``y`` to ``y + h``, halving the step where a stage fails.

    Returns new positions, a status array (0 ok, 1 nodal, 2 backflow) and the
    number of substeps taken per trajectory.
    """
    xn, zn, nodal, backflow = _rk4(scenario, x, z, y, h)
    status = np.where(nodal, 1, np.where(backflow, 2, 0))
    steps = np.ones(x.size, dtype=np.int64)
    bad = np.flatnonzero(status)
    if bad.size and level < max_level:
        hh = 0.5 * h
        x1, z1, s1, c1 = _advance(scenario, x[bad], z[bad], y, hh, level + 1, max_level)
        ok = s1 == 0
        x2, z2, s2, c2 = x1.copy(), z1.copy(), s1.copy(), np.zeros_like(c1)
        if np.any(ok):
            i = np.flatnonzero(ok)
            x2[i], z2[i], s2[i], c2[i] = _advance(scenario, x1[i], z1[i], y + hh, hh,
                                                  level + 1, max_level)
        xn[bad], zn[bad], status[bad], steps[bad] = x2, z2, s2, c1 + c2
    return xn, zn, status, steps


def _integrate_block(starts, slits, scenario, grid, cfg, max_steps):
    n = starts.shape[0]
    x = starts[:, 0].copy()
    z = starts[:, 2].copy()
    keep = list(range(0, grid.size, cfg.record_every))
    if keep[-1] != grid.size - 1:
        keep.append(grid.size - 1)
    slot = np.full(grid.size, -1)
    slot[keep] = np.arange(len(keep))
    xs = np.full((len(keep), n), np.nan)
    zs = np.full((len(keep), n), np.nan)
    xs[0], zs[0] = x, z
    last = np.zeros(n, dtype=np.int64)            # grid index of the last point reached
    state = np.full(n, -1)                        # -1 active, else Termination code
    used = np.zeros(n, dtype=np.int64)
    codes = [Termination.REACHED_SCREEN, Termination.NODAL_STALL, Termination.BACKFLOW,
             Termination.STEP_LIMIT]
    for j in range(grid.size - 1):
        live = np.flatnonzero(state < 0)
        if live.size == 0:
            break
        xn, zn, status, steps = _advance(scenario, x[live], z[live], grid[j],
                                         grid[j + 1] - grid[j], 0, cfg.max_halvings)
        used[live] += steps
        fail = status != 0
        state[live[fail]] = status[fail]
        good = live[~fail]
        x[good], z[good] = xn[~fail], zn[~fail]
        last[good] = j + 1
        over = good[used[good] > max_steps]
        state[over] = 3
        if slot[j + 1] >= 0:
            xs[slot[j + 1], good], zs[slot[j + 1], good] = x[good], z[good]
    state[state < 0] = 0
    out = []
    kept = np.asarray(keep)
    for i in range(n):
        rows = np.flatnonzero(kept <= last[i])
        px, pz = xs[rows, i], zs[rows, i]
        py = grid[kept[rows]]
        if kept[rows[-1]] != last[i]:              # unrecorded final point
            px, pz, py = np.append(px, x[i]), np.append(pz, z[i]), np.append(py, grid[last[i]])
        out.append(Trajectory(np.column_stack([px, py, pz]), int(slits[i]), codes[state[i]]))
    return out


def _prepare(starts, scenario, L, cfg):
    cfg = cfg.resolved(scenario.wavelength)
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    if starts.shape[1] == 2:                      # (x, z) pairs
        starts = np.column_stack([starts[:, 0], np.full(len(starts), cfg.y0), starts[:, 1]])
    if starts.shape[1] != 3:
        raise InvalidSpec("starts must have shape (n, 3) or (n, 2)")
    slits = scenario.grating.slit_of(starts[:, 0])
    if np.any(slits < 0):
        raise InvalidSpec("every start must lie inside a slit")
    grid = step_grid(cfg, L)
    max_steps = cfg.max_steps if cfg.max_steps is not None else 4 * grid.size
    if max_steps < grid.size - 1:
        raise InvalidSpec(f"max_steps={max_steps} cannot cover {grid.size - 1} grid steps")
    return starts, slits, grid, cfg, max_steps


def integrate_batch(starts, scenario: Scenario, L: float,
                    cfg: IntegratorConfig = IntegratorConfig(), *, blocks=None) -> list:
    """Integrate many flow lines from the slit plane to the screen at ``y = L``.

    ``starts`` holds ``(x0, y, z0)`` rows (``y`` is replaced by ``cfg.y0``) or
    ``(x0, z0)`` pairs.  Trajectories are processed in consecutive blocks of
    ``cfg.block_size``; each block is advanced with vectorized field calls.
    ``blocks`` restricts the work to the given block indices.
    """
    starts, slits, grid, cfg, max_steps = _prepare(starts, scenario, L, cfg)
    starts[:, 1] = cfg.y0
    nb = math.ceil(len(starts) / cfg.block_size)
    out = []
    for b in range(nb) if blocks is None else blocks:
        sl = slice(b * cfg.block_size, (b + 1) * cfg.block_size)
        out.extend(_integrate_block(starts[sl], slits[sl], scenario, grid, cfg, max_steps))
    return out


def integrate(start, scenario: Scenario, L: float,
              cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate the flow line through ``start = (x0, y, z0)``; ``y`` is set to ``cfg.y0``."""
    return integrate_batch([start], scenario, L, cfg)[0]


def integrate_arclength(start, scenario: Scenario, L: float, ds: float | None = None,
                        y0: float | None = None) -> Trajectory:
    """Flow line obtained by integrating the unit tangent ``S/|S|`` in arc length.

    The last step is shortened so that the curve ends on ``y = L``.  Used as a
    cross-check of the ``y``-parametrized integrator.
    """
    lam = scenario.wavelength
    ds = lam / 20 if ds is None else ds
    y = lam / 100 if y0 is None else y0
    r = np.array([start[0], y, start[2]], dtype=float)
    slit = int(scenario.grating.slit_of(r[0]))

    def tangent(p):
        S = scenario.flow(np.array([p[0]]), np.array([p[1]])).S[:, 0]
        return S / np.linalg.norm(S)

    pts = [r.copy()]
    while r[1] < L:
        t = tangent(r)
        h = ds
        if r[1] + h * t[1] > L:
            h = (L - r[1]) / t[1]
        k2 = tangent(r + 0.5 * h * t)
        k3 = tangent(r + 0.5 * h * k2)
        k4 = tangent(r + h * k3)
        r = r + h / 6.0 * (t + 2 * k2 + 2 * k3 + k4)
        if h < ds and abs(r[1] - L) < 1e-6 * ds:
            r[1] = L
        pts.append(r.copy())
    return Trajectory(np.array(pts), slit)


def incident_path(start, length: float) -> Trajectory:
    """Straight flow line of the incident plane wave, travelled at the speed of light."""
    if length < 0:
        raise InvalidSpec("length must be non-negative")
    p0 = np.asarray(start, dtype=float)
    p1 = p0 + np.array([0.0, length, 0.0])
    pts = p0[None, :] if length == 0 else np.stack([p0, p1])
    return Trajectory(pts, -1, Termination.REACHED_SCREEN, duration=length / C)


def resample_x(traj: Trajectory, ys, scenario: Scenario | None = None):
    """``x`` and ``z`` of a trajectory at the heights ``ys``.

    With a scenario the flow-line slopes at the vertices drive cubic Hermite
    interpolation; otherwise the polyline is interpolated linearly.
    """
    p = traj.points
    if scenario is None:
        return np.interp(ys, p[:, 1], p[:, 0]), np.interp(ys, p[:, 1], p[:, 2])
    dx, dz = velocity_slopes(p[:, 0], p[:, 1], scenario)
    return (CubicHermiteSpline(p[:, 1], p[:, 0], dx)(ys),
            CubicHermiteSpline(p[:, 1], p[:, 2], dz)(ys))


def _crosses(a: np.ndarray, b: np.ndarray) -> bool:
    lo = max(a[0, 1], b[0, 1])
    hi = min(a[-1, 1], b[-1, 1])
    if lo > hi:
        return False
    ys = np.union1d(a[:, 1], b[:, 1])
    ys = ys[(ys >= lo) & (ys <= hi)]
    diff = np.interp(ys, a[:, 1], a[:, 0]) - np.interp(ys, b[:, 1], b[:, 0])
    sign = np.sign(diff)
    return bool(np.any(sign == 0) or np.any(sign[1:] != sign[:-1]))


def count_crossings(trajectories) -> int:
    """Number of trajectory pairs whose XY projections touch or intersect."""
    trs = [t.points for t in trajectories]
    return sum(_crosses(trs[i], trs[j]) for i in range(len(trs)) for j in range(i + 1, len(trs)))
