"""Vector EM field, time-averaged Poynting vector and energy density.

Two scenarios are covered.  In the free scenario both the E- and the
H-polarized parts of the incident wave pass every slit, so E and H are
built from the total scalar field.  In the orthogonal-polarizer scenario the
slit carrying the z-axis polarizer transmits only the E-polarized part and the
slit carrying the x-axis polarizer only the H-polarized part.

The closed forms below are checked against ``Re[E x H*]/2`` and
``(eps0 |E|^2 + mu0 |H|^2)/4`` of the assembled fields.  Trajectories only
use the ratio ``S / (c U)``, in which every overall prefactor cancels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import C, EPSILON_0, MU_0
from .errors import NodalPoint
from .gratingfield import FieldSample
from .polarization import PolarizationSpec

__all__ = [
    "EMSample",
    "FlowState",
    "NODAL_THRESHOLD",
    "incident_energy",
    "assemble_free",
    "assemble_polarized",
    "poynting_free",
    "poynting_polarized",
    "decompose_energy",
    "vorticity_sz",
    "divergence_s",
]

NODAL_THRESHOLD = 1e-14


@dataclass(frozen=True)
class EMSample:
    """Time-independent phasors; ``E`` and ``H`` have a leading axis of length 3."""

    E: np.ndarray
    H: np.ndarray

    def poynting(self) -> np.ndarray:
        return 0.5 * np.real(np.cross(self.E, np.conj(self.H), axis=0))

    def energy(self) -> np.ndarray:
        e2 = np.sum(np.abs(self.E) ** 2, axis=0)
        h2 = np.sum(np.abs(self.H) ** 2, axis=0)
        return 0.25 * (EPSILON_0 * e2 + MU_0 * h2)


@dataclass(frozen=True)
class FlowState:
    """Poynting vector ``S`` (leading axis 3) and energy density ``U``."""

    S: np.ndarray
    U: np.ndarray
    threshold: float = 0.0

    @property
    def nodal(self) -> np.ndarray:
        return np.asarray(self.U) < self.threshold

    @property
    def v(self) -> np.ndarray:
        """Flow velocity in units of c; NaN where the density is below threshold."""
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self.S / (C * self.U)
        return np.where(self.nodal, np.nan, v)


def incident_energy(pol: PolarizationSpec) -> float:
    """Energy density ``eps0 (alpha^2 + beta^2) / 2`` of the incident plane wave."""
    return 0.5 * EPSILON_0 * pol.intensity


def _threshold(pol):
    return NODAL_THRESHOLD * incident_energy(pol)


def _check_nodal(flow: FlowState, strict: bool) -> FlowState:
    if strict and np.any(flow.nodal):
        raise NodalPoint(
            f"energy density {float(np.min(flow.U)):.3e} J/m^3 below nodal threshold "
            f"{flow.threshold:.3e} J/m^3")
    return flow


def _omega(k):
    return C * k


# --------------------------------------------------------------------------
# free scenario

def assemble_free(f: FieldSample, pol: PolarizationSpec, k: float) -> EMSample:
    """E and H of the superposed E- and H-polarized waves built on one scalar field."""
    b = pol.h_amplitude
    wm = _omega(k) * MU_0
    E = np.stack([1j * b / k * f.dpsi_dy, -1j * b / k * f.dpsi_dx, pol.alpha * f.psi])
    H = np.stack([-1j * pol.alpha / wm * f.dpsi_dy, 1j * pol.alpha / wm * f.dpsi_dx,
                  k * b / wm * f.psi])
    return EMSample(E, H)


def _flux(psi, dpsi):
    """Im(psi* dpsi) = (i/2)(psi dpsi* - psi* dpsi)."""
    return np.imag(np.conj(psi) * dpsi)


def _density(f: FieldSample, k):
    return np.abs(f.dpsi_dx) ** 2 + np.abs(f.dpsi_dy) ** 2 + k * k * np.abs(f.psi) ** 2


def poynting_free(f: FieldSample, pol: PolarizationSpec, k: float, *,
                  strict: bool = True) -> FlowState:
    """Closed-form S and U for the free scenario."""
    w = _omega(k)
    flux = pol.intensity / (2.0 * w * MU_0)
    sx = flux * _flux(f.psi, f.dpsi_dx)
    sy = flux * _flux(f.psi, f.dpsi_dy)
    sz = pol.alpha * pol.beta * pol.sin_phi / (k * w * MU_0) * np.imag(
        f.dpsi_dx * np.conj(f.dpsi_dy))
    U = pol.intensity / (4.0 * w * w * MU_0) * _density(f, k)
    return _check_nodal(FlowState(np.stack([sx, sy, sz]), U, _threshold(pol)), strict)


def decompose_energy(f1: FieldSample, f2: FieldSample, pol: PolarizationSpec, k: float):
    """Single-slit densities ``U1``, ``U2`` and the interference term ``U12``."""
    w = _omega(k)
    pref = pol.intensity / (4.0 * w * w * MU_0)
    u1 = pref * _density(f1, k)
    u2 = pref * _density(f2, k)
    cross = (f1.dpsi_dx * np.conj(f2.dpsi_dx) + f1.dpsi_dy * np.conj(f2.dpsi_dy)
             + k * k * f1.psi * np.conj(f2.psi))
    u12 = pref * 2.0 * np.real(cross)
    return u1, u2, u12


# --------------------------------------------------------------------------
# orthogonal polarizers: f1 behind the z-axis polarizer, f2 behind the x-axis one

def assemble_polarized(f1: FieldSample, f2: FieldSample, pol: PolarizationSpec,
                       k: float) -> EMSample:
    """E-polarized wave from ``f1`` plus H-polarized wave from ``f2``."""
    b = pol.h_amplitude
    wm = _omega(k) * MU_0
    E = np.stack([1j * b / k * f2.dpsi_dy, -1j * b / k * f2.dpsi_dx, pol.alpha * f1.psi])
    H = np.stack([-1j * pol.alpha / wm * f1.dpsi_dy, 1j * pol.alpha / wm * f1.dpsi_dx,
                  k * b / wm * f2.psi])
    return EMSample(E, H)


def poynting_polarized(f1: FieldSample, f2: FieldSample, pol: PolarizationSpec, k: float,
                       *, strict: bool = True) -> FlowState:
    """Closed-form S and U behind orthogonal polarizers (no interference term in U)."""
    w = _omega(k)
    a2, b2 = pol.alpha**2, pol.beta**2
    pref = 1.0 / (2.0 * w * MU_0)
    sx = pref * (a2 * _flux(f1.psi, f1.dpsi_dx) + b2 * _flux(f2.psi, f2.dpsi_dx))
    sy = pref * (a2 * _flux(f1.psi, f1.dpsi_dy) + b2 * _flux(f2.psi, f2.dpsi_dy))
    cross = pol.alpha * pol.h_amplitude / (k * w * MU_0) * (
        f2.dpsi_dy * np.conj(f1.dpsi_dx) - f2.dpsi_dx * np.conj(f1.dpsi_dy))
    sz = 0.5 * np.real(cross)
    U = (a2 * _density(f1, k) + b2 * _density(f2, k)) / (4.0 * w * w * MU_0)
    return _check_nodal(FlowState(np.stack([sx, sy, sz]), U, _threshold(pol)), strict)


# --------------------------------------------------------------------------
# finite-difference diagnostics

def _stencil(field, x, y, h):
    xs = np.array([x, x + h, x - h, x, x])
    ys = np.array([y, y, y, y + h, y - h])
    return field(xs, ys)


def vorticity_sz(x: float, y: float, field, pol: PolarizationSpec, k: float, h: float) -> float:
    """Residual of the identity tying S_z to the curl of (S_x, S_y).

    ``field`` maps coordinate arrays to a :class:`FieldSample` of the total
    scalar field (free scenario).  The curl uses central differences of step
    ``h``, so the residual shrinks as ``h**2``.
    """
    flow = poynting_free(_stencil(field, x, y, h), pol, k, strict=False)
    sx, sy, sz = flow.S
    curl = (sy[1] - sy[2]) / (2 * h) - (sx[3] - sx[4]) / (2 * h)
    coeff = pol.alpha * pol.beta * pol.sin_phi / (pol.intensity * k)
    return float(abs(sz[0] + coeff * curl))


def divergence_s(x: float, y: float, flow_at, h: float) -> float:
    """Central-difference divergence of S (the fields do not depend on z).

    ``flow_at`` maps coordinate arrays to a :class:`FlowState`.
    """
    xs = np.array([x + h, x - h, x, x])
    ys = np.array([y, y, y + h, y - h])
    S = flow_at(xs, ys).S
    return float((S[0, 0] - S[0, 1]) / (2 * h) + (S[1, 2] - S[1, 3]) / (2 * h))
