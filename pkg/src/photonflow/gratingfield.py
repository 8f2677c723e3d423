"""Scalar field behind an N-slit grating.

The grating is transparent inside the slits and absorbing elsewhere, and is
lit at normal incidence by the unit plane wave ``exp(iky)``, so the field just
behind it is 1 inside every slit and 0 outside.  Three interchangeable
backends propagate that boundary value into ``y > 0``:

* ``MODE_PARAXIAL`` -- superposition of transverse modes with the paraxial
  longitudinal phase ``k y - kx**2 y / 2k``;
* ``MODE_EXACT`` -- the same superposition with the exact Helmholtz phase
  ``y sqrt(k**2 - kx**2)`` (decaying exponential when ``|kx| > k``);
* ``FRESNEL_KIRCHHOFF`` -- the Fresnel-Kirchhoff kernel integrated over each
  aperture.  The kernel integral over an interval is a difference of Fresnel
  integrals, which is evaluated in closed form.

All evaluators return the field together with its first derivatives, obtained
by differentiating under the integral sign.  Slit index 0 is the slit with
the largest centre coordinate (``+d/2`` for a double slit).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import fresnel

from .errors import InvalidSpec, QuadratureNotConverged

__all__ = [
    "GratingSpec",
    "FieldSample",
    "PropagatorVariant",
    "slit_coefficient",
    "spectrum_c2",
    "spectrum_cN",
    "kx_cutoff",
    "propagate",
    "slit_field",
    "slit_fields",
    "field_grid",
    "SpectralSlab",
]

_SERIES_THRESHOLD = 1e-8


@dataclass(frozen=True)
class GratingSpec:
    """Geometry of an N-slit grating (lengths in metres)."""

    n_slits: int
    slit_width: float
    pitch: float

    def __post_init__(self):
        if int(self.n_slits) != self.n_slits or self.n_slits < 1:
            raise InvalidSpec(f"n_slits must be a positive integer, got {self.n_slits!r}")
        if not self.slit_width > 0:
            raise InvalidSpec(f"slit width must be positive, got {self.slit_width!r}")
        if not self.pitch > self.slit_width:
            raise InvalidSpec(
                f"pitch ({self.pitch!r}) must exceed the slit width ({self.slit_width!r})"
            )

    @property
    def slit_centers(self) -> tuple[float, ...]:
        half = 0.5 * (self.n_slits - 1)
        return tuple((half - j) * self.pitch for j in range(self.n_slits))

    def slit_bounds(self, index: int) -> tuple[float, float]:
        if not 0 <= index < self.n_slits:
            raise IndexError(f"slit index {index} out of range for {self.n_slits} slits")
        c = self.slit_centers[index]
        h = 0.5 * self.slit_width
        return c - h, c + h

    @property
    def half_extent(self) -> float:
        """Distance from the axis to the outermost slit edge."""
        return 0.5 * (self.n_slits - 1) * self.pitch + 0.5 * self.slit_width

    def slit_of(self, x):
        """Index of the slit containing ``x``, or -1 outside all apertures."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, -1, dtype=int)
        for i in range(self.n_slits):
            lo, hi = self.slit_bounds(i)
            out[(x >= lo) & (x <= hi)] = i
        return out


class PropagatorVariant(enum.Enum):
    MODE_PARAXIAL = "mode-paraxial"
    MODE_EXACT = "mode-exact"
    FRESNEL_KIRCHHOFF = "fresnel-kirchhoff"

    @classmethod
    def parse(cls, value) -> "PropagatorVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"paraxial": "mode-paraxial", "exact": "mode-exact", "fk": "fresnel-kirchhoff",
                   "fresnel": "fresnel-kirchhoff"}
        key = aliases.get(key, key)
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown propagator variant {value!r}")


@dataclass(frozen=True)
class FieldSample:
    """Complex scalar field and its first spatial derivatives (arrays broadcast)."""

    psi: np.ndarray
    dpsi_dx: np.ndarray
    dpsi_dy: np.ndarray

    def __add__(self, other: "FieldSample") -> "FieldSample":
        return FieldSample(self.psi + other.psi, self.dpsi_dx + other.dpsi_dx,
                           self.dpsi_dy + other.dpsi_dy)

    def __getitem__(self, item) -> "FieldSample":
        return FieldSample(self.psi[item], self.dpsi_dx[item], self.dpsi_dy[item])

    def __mul__(self, factor) -> "FieldSample":
        return FieldSample(self.psi * factor, self.dpsi_dx * factor, self.dpsi_dy * factor)

    __rmul__ = __mul__

    @classmethod
    def plane_wave(cls, y, k) -> "FieldSample":
        psi = np.exp(1j * k * np.asarray(y, dtype=float))
        return cls(psi, np.zeros_like(psi), 1j * k * psi)


# --------------------------------------------------------------------------
# analytic spectra

def _sinc(u):
    """sin(u)/u with the removable point handled by its Taylor series."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SERIES_THRESHOLD
    safe = np.where(small, 1.0, u)
    return np.where(small, 1.0 - u * u / 6.0, np.sin(safe) / safe)


def slit_coefficient(kx, center, width):
    """Unit-norm spectrum of a single slit of ``width`` centred at ``center``.

    Returns ``sqrt(2/(pi*width)) * sin(kx*width/2)/kx * exp(-i*kx*center)``,
    with the limit ``sqrt(width/(2*pi))`` at ``kx = 0``.  This is the
    transform of the aperture function ``1/sqrt(width)``.
    """
    kx = np.asarray(kx, dtype=float)
    # sin(kx w/2)/kx == (w/2) * sinc(kx w/2)
    amp = math.sqrt(2.0 / (math.pi * width)) * 0.5 * width * _sinc(0.5 * kx * width)
    return amp * np.exp(-1j * kx * center)


def spectrum_c2(kx, d, width):
    """Real double-slit spectrum ``sqrt(width/pi) sinc(kx width/2) cos(kx d/2)``."""
    kx = np.asarray(kx, dtype=float)
    return math.sqrt(width / math.pi) * _sinc(0.5 * kx * width) * np.cos(0.5 * kx * d)


def _dirichlet(u, n):
    """sin(n u)/sin(u), taking the limit value at the zeros of sin(u)."""
    u = np.asarray(u, dtype=float)
    s = np.sin(u)
    near = np.abs(s) < 1e-6
    ratio = np.sin(n * u) / np.where(near, 1.0, s)
    if not np.any(near):
        return ratio
    # exact cosine sum sum_j cos((n-1-2j) u) near the removable points
    m = np.arange(n) * 2.0 - (n - 1)
    series = np.cos(np.multiply.outer(u[near], m)).sum(axis=-1)
    out = np.array(ratio, dtype=float)
    out[near] = series
    return out


def spectrum_cN(kx, n, d, width):
    """Unit-norm spectrum of ``n`` equal slits of ``width`` at pitch ``d``."""
    if int(n) != n or n < 1:
        raise InvalidSpec(f"slit count must be a positive integer, got {n!r}")
    n = int(n)
    kx = np.asarray(kx, dtype=float)
    return (math.sqrt(width / (2.0 * math.pi * n)) * _sinc(0.5 * kx * width)
            * _dirichlet(0.5 * kx * d, n))


def kx_cutoff(spec: GratingSpec, k: float) -> float:
    """Spectral truncation ``min(k, 40 pi / width)`` (at least 20 sinc lobes)."""
    return min(k, 40.0 * math.pi / spec.slit_width)


# --------------------------------------------------------------------------
# Fresnel-Kirchhoff backend (closed form)

_FK_PREFACTOR = np.exp(-0.25j * math.pi) / math.sqrt(2.0)


def _fk_slit(x, y, lo, hi, k):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    scale = np.sqrt(k / (math.pi * y))
    ua = scale * (lo - x)
    ub = scale * (hi - x)
    sa, ca = fresnel(ua)
    sb, cb = fresnel(ub)
    carrier = _FK_PREFACTOR * np.exp(1j * k * y)
    # exp(i pi u^2 / 2) == exp(i k (edge - x)^2 / 2y); the latter avoids squaring the scaled value
    ea = np.exp(0.5j * k * (lo - x) ** 2 / y)
    eb = np.exp(0.5j * k * (hi - x) ** 2 / y)
    psi = carrier * ((cb - ca) + 1j * (sb - sa))
    dpsi_dx = -carrier * scale * (eb - ea)
    dpsi_dy = 1j * k * psi - carrier * (ub * eb - ua * ea) / (2.0 * y)
    return psi, dpsi_dx, dpsi_dy


# --------------------------------------------------------------------------
# mode backends: adaptive Gauss-Legendre panels

_HIGH_ORDER = 12
_LOW_ORDER = 8
_MAX_LEVELS = 8
_CHUNK_ELEMENTS = 4_000_000


@lru_cache(maxsize=None)
def _reference_rule():
    xh, wh = np.polynomial.legendre.leggauss(_HIGH_ORDER)
    xl, wl = np.polynomial.legendre.leggauss(_LOW_ORDER)
    nodes = np.concatenate([xh, xl])
    w_high = np.concatenate([wh, np.zeros_like(wl)])
    w_low = np.concatenate([np.zeros_like(wh), wl])
    return nodes, w_high, w_low


def _segments(spec, k, variant, x_max, y_max):
    """Integration segments as (kind, lo, hi, rate) in the quadrature variable."""
    kmax = kx_cutoff(spec, k)
    reach = x_max + spec.half_extent
    if variant is PropagatorVariant.MODE_PARAXIAL:
        rate = reach + y_max * kmax / k
        return [("kx", -kmax, kmax, rate)]
    theta = math.asin(min(kmax, k) / k)
    segs = [("theta", -theta, theta, k * (reach + y_max))]
    if kmax > k:
        t = math.acosh(kmax / k)
        rate = kmax * reach + 1.0 / max(y_max, 1e-300)
        segs += [("evan-", 0.0, t, rate), ("evan+", 0.0, t, rate)]
    return segs


def _initial_panels(lo, hi, rate):
    # each panel spans at most pi of phase
    n = max(4, int(math.ceil((hi - lo) * rate / math.pi)))
    return np.linspace(lo, hi, n + 1)


def _nodes_for(kind, edges, k, variant):
    """Quadrature nodes mapped to kx with Jacobian-weighted rule weights."""
    ref, w_high, w_low = _reference_rule()
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    v = (a + half + half * ref).ravel()
    wh = (half * w_high).ravel()
    wl = (half * w_low).ravel()
    if kind == "kx":
        kx = v
        jac = np.ones_like(v)
        kz = (k - kx * kx / (2.0 * k)).astype(complex)
    elif kind == "theta":
        kx = k * np.sin(v)
        jac = k * np.cos(v)
        kz = (k * np.cos(v)).astype(complex)
    else:
        sign = -1.0 if kind == "evan-" else 1.0
        kx = sign * k * np.cosh(v)
        jac = k * np.sinh(v)
        kz = 1j * k * np.sinh(v)
    return kx, wh * jac, wl * jac, kz


def _mode_row(x, y, spec, k, variant, rtol, atol):
    """Per-slit (psi, dpsi_dx, dpsi_dy) for points sharing one ``y``; shape (n_slits, 3, P)."""
    centers = np.asarray(spec.slit_centers)
    width = spec.slit_width
    scale = math.sqrt(width) / math.sqrt(2.0 * math.pi)
    norm = np.array([1.0, 1.0 / k, 1.0 / k])[None, :, None]
    total = np.zeros((spec.n_slits, 3, x.size), dtype=complex)
    for kind, lo, hi, rate in _segments(spec, k, variant, float(np.max(np.abs(x))), float(y)):
        edges = _initial_panels(lo, hi, rate)
        for level in range(_MAX_LEVELS + 1):
            kx, wh, wl, kz = _nodes_for(kind, edges, k, variant)
            # node amplitudes: slit spectrum times (1, i kx, i kz) for psi and its derivatives
            amps = slit_coefficient(kx[None, :], centers[:, None], width) * scale
            factors = np.stack([np.ones_like(kz), 1j * kx, 1j * kz])
            rows = amps[:, None, :] * factors[None, :, :]
            longitudinal = np.exp(1j * kz * y)
            rows = rows * longitudinal
            flat_rows = np.concatenate([(rows * wh).reshape(-1, kx.size),
                                        (rows * wl).reshape(-1, kx.size)])
            chunk = max(1, _CHUNK_ELEMENTS // kx.size)
            sums = np.empty((flat_rows.shape[0], x.size), dtype=complex)
            for c0 in range(0, x.size, chunk):
                phase = _transverse_phase(kx, x[c0:c0 + chunk])
                sums[:, c0:c0 + chunk] = flat_rows @ phase.T
            half = sums.shape[0] // 2
            high = sums[:half].reshape(rows.shape[:2] + (x.size,))
            low = sums[half:].reshape(rows.shape[:2] + (x.size,))
            err = np.abs(high - low) * norm
            bound = np.maximum(rtol * np.abs(high) * norm, atol)
            if np.all(err <= bound):
                total += high
                break
            if level == _MAX_LEVELS:
                raise QuadratureNotConverged(
                    f"mode integral not converged after {_MAX_LEVELS} refinements "
                    f"(max error {float(np.max(err)):.3e})")
            # bisect the panels whose own error exceeds their share of the budget
            n_panels = edges.size - 1
            worst_point = int(np.argmax(np.max(err - bound, axis=(0, 1))))
            phase = _transverse_phase(kx, x[worst_point:worst_point + 1])
            share = float(np.min(bound[..., worst_point])) / n_panels
            bad = _panel_errors(rows, wh - wl, phase, n_panels) > share
            if not np.any(bad):
                bad[:] = True
            mids = 0.5 * (edges[:-1] + edges[1:])[bad]
            edges = np.sort(np.concatenate([edges, mids]))
    return total


def _transverse_phase(kx, x):
    """exp(i kx x) with points along axis 0 and nodes along axis 1."""
    if x.size > 2:
        dx = np.diff(x)
        if dx[0] != 0 and np.all(np.abs(dx - dx[0]) <= 1e-12 * abs(dx[0])):
            # uniform row: a recurrence in x replaces most complex exponentials
            step = np.exp(1j * kx * dx[0])
            out = np.empty((x.size, kx.size), dtype=complex)
            for p in range(x.size):
                if p % 16 == 0:
                    out[p] = np.exp(1j * kx * x[p])
                else:
                    np.multiply(out[p - 1], step, out=out[p])
            return out
    return np.exp(1j * np.multiply.outer(x, kx))


def _panel_errors(rows, wdiff, phase, n_panels):
    """Per-panel |high - low| at one point, maximised over slits and quantities."""
    contrib = (rows * wdiff) * phase[0]
    per_panel = contrib.reshape(rows.shape[:2] + (n_panels, -1)).sum(axis=-1)
    return np.abs(per_panel).max(axis=(0, 1))


def _mode_fields(x, y, spec, k, variant, rtol, atol):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    out = np.empty((spec.n_slits, 3, x.size), dtype=complex)
    if x.size == 0:
        return out
    # group by y so each row shares nodes and longitudinal factors
    order = np.lexsort((x, y))
    xs, ys = x[order], y[order]
    breaks = np.flatnonzero(np.diff(ys)) + 1
    starts = np.concatenate([[0], breaks])
    stops = np.concatenate([breaks, [xs.size]])
    for s0, s1 in zip(starts, stops):
        out[:, :, order[s0:s1]] = _mode_row(xs[s0:s1], ys[s0], spec, k, variant, rtol, atol)
    return out


# --------------------------------------------------------------------------
# public evaluators

def _check_args(y, k):
    if not k > 0:
        raise InvalidSpec(f"wavenumber must be positive, got {k!r}")
    if np.any(np.asarray(y) <= 0):
        raise InvalidSpec("the field behind the grating is defined for y > 0 only")


def slit_fields(x, y, spec: GratingSpec, k: float,
                variant: PropagatorVariant = PropagatorVariant.FRESNEL_KIRCHHOFF,
                *, rtol: float = 1e-9, atol: float = 1e-11) -> FieldSample:
    """Fields of every slit at once; arrays gain a leading slit axis.

    All slits of one call share the same quadrature nodes, so their sum is the
    full grating field to rounding.
    """
    variant = PropagatorVariant.parse(variant)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    _check_args(y, k)
    shape = x.shape
    if variant is PropagatorVariant.FRESNEL_KIRCHHOFF:
        parts = [_fk_slit(x, y, *spec.slit_bounds(i), k) for i in range(spec.n_slits)]
        psi, dx, dy = (np.stack([p[j] for p in parts]) for j in range(3))
        return FieldSample(psi, dx, dy)
    fields = _mode_fields(x, y, spec, k, variant, rtol, atol)
    fields = fields.reshape((spec.n_slits, 3) + shape)
    return FieldSample(fields[:, 0], fields[:, 1], fields[:, 2])


def slit_field(slit_index: int, x, y, spec: GratingSpec, k: float,
               variant: PropagatorVariant = PropagatorVariant.FRESNEL_KIRCHHOFF,
               **kw) -> FieldSample:
    """Field radiated by slit ``slit_index`` alone."""
    if not 0 <= slit_index < spec.n_slits:
        raise IndexError(f"slit index {slit_index} out of range for {spec.n_slits} slits")
    return slit_fields(x, y, spec, k, variant, **kw)[slit_index]


def propagate(x, y, spec: GratingSpec, k: float,
              variant: PropagatorVariant = PropagatorVariant.FRESNEL_KIRCHHOFF,
              **kw) -> FieldSample:
    """Total field behind the grating at ``(x, y)`` (arrays broadcast)."""
    per_slit = slit_fields(x, y, spec, k, variant, **kw)
    return FieldSample(per_slit.psi.sum(axis=0), per_slit.dpsi_dx.sum(axis=0),
                       per_slit.dpsi_dy.sum(axis=0))


def field_grid(xs, ys, spec: GratingSpec, k: float,
               variant: PropagatorVariant = PropagatorVariant.FRESNEL_KIRCHHOFF,
               **kw) -> FieldSample:
    """Total field on the tensor grid ``ys x xs`` (arrays of shape (len(ys), len(xs)))."""
    X, Y = np.meshgrid(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
    return propagate(X, Y, spec, k, variant, **kw)


# --------------------------------------------------------------------------
# band-limited field on a periodic grid (fast evaluation near the grating)

_TAPS = np.arange(-2, 4)


def _lagrange_weights(s):
    """Six-point Lagrange weights for nodes -2..3 at fractional offsets ``s``."""
    w = np.ones((_TAPS.size,) + s.shape)
    for i, o in enumerate(_TAPS):
        for p in _TAPS:
            if p != o:
                w[i] *= (s - p) / (o - p)
    return w


class SpectralSlab:
    """Mode-backend fields of every slit on a uniform periodic ``x`` grid.

    The truncated mode integral is sampled with spacing ``2 pi / window`` and
    summed with one inverse FFT per component, which gives ``psi`` and both
    derivatives on ``n_points`` grid nodes at once.  Off-grid points use
    six-point Lagrange interpolation.  The periodic images of the field are
    ``window`` apart, so the window must be several times wider than the
    region of interest; the aliasing error decays as ``window**-2``.
    """

    def __init__(self, spec: GratingSpec, k: float,
                 variant: PropagatorVariant = PropagatorVariant.MODE_PARAXIAL,
                 window: float | None = None, n_points: int | None = None, cache: int = 4):
        variant = PropagatorVariant.parse(variant)
        if variant is PropagatorVariant.FRESNEL_KIRCHHOFF:
            raise InvalidSpec("a spectral slab needs a mode backend")
        self.spec, self.k, self.variant = spec, float(k), variant
        lam = 2.0 * math.pi / k
        self.window = float(window) if window is not None else 64.0 * spec.half_extent
        if n_points is None:
            n_points = 1 << int(math.ceil(math.log2(self.window / (lam / 32.0))))
        self.n_points = int(n_points)
        self.dx = self.window / self.n_points
        self.x0 = -0.5 * self.window
        kx = 2.0 * math.pi / self.window * np.fft.fftfreq(self.n_points, 1.0 / self.n_points)
        keep = np.abs(kx) <= kx_cutoff(spec, k)
        kx = kx[keep]
        self._kx = kx
        self._keep = keep
        if variant is PropagatorVariant.MODE_PARAXIAL:
            self._kz = (k - kx * kx / (2.0 * k)).astype(complex)
        else:
            self._kz = np.sqrt((k * k - kx * kx).astype(complex))
        # sum -> integral (dk / 2pi) and undo ifft's 1/M; grid starts at x0
        base = (self.n_points / self.window) * np.exp(-1j * kx * self.x0)
        w = spec.slit_width
        self._spectra = [w * _sinc(0.5 * kx * w) * np.exp(-1j * kx * c) * base
                         for c in spec.slit_centers]
        self._cache: dict[float, np.ndarray] = {}
        self._cache_size = cache

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n_points)

    def grid_fields(self, y: float) -> np.ndarray:
        """Array of shape ``(n_slits, 3, n_points)``: psi, dpsi_dx, dpsi_dy."""
        y = float(y)
        hit = self._cache.get(y)
        if hit is not None:
            return hit
        if not y > 0:
            raise InvalidSpec("the field behind the grating is defined for y > 0 only")
        prop = np.exp(1j * self._kz * y)
        out = np.empty((self.spec.n_slits, 3, self.n_points), dtype=complex)
        full = np.zeros(self.n_points, dtype=complex)
        for i, spectrum in enumerate(self._spectra):
            a = spectrum * prop
            for j, factor in enumerate((1.0, 1j * self._kx, 1j * self._kz)):
                full[self._keep] = a * factor
                out[i, j] = np.fft.ifft(full)
        if len(self._cache) >= self._cache_size:
            self._cache.pop(next(iter(self._cache)))
        self._cache[y] = out
        return out

    def covers(self, x) -> np.ndarray:
        margin = 8 * self.dx
        return np.abs(np.asarray(x, dtype=float)) <= 0.5 * self.window - margin

    def sample(self, x, y: float) -> FieldSample:
        """Per-slit fields at points ``x`` on the line ``y`` (leading slit axis)."""
        x = np.asarray(x, dtype=float)
        if not np.all(self.covers(x)):
            raise InvalidSpec("points outside the spectral slab window")
        table = self.grid_fields(y)
        t = (x - self.x0) / self.dx
        j = np.floor(t).astype(np.int64)
        w = _lagrange_weights(t - j)
        idx = j[None, :] + _TAPS[:, None]
        g = table[:, :, idx]                        # (slits, 3, taps, n)
        vals = g[:, :, 0] * w[0]
        for m in range(1, _TAPS.size):
            vals = vals + g[:, :, m] * w[m]
        return FieldSample(vals[:, 0], vals[:, 1], vals[:, 2])
