"""Incident polarized plane wave, polarization classification and ideal polarizers.

The incident wave travels along +y.  Its E-polarized part (electric field
along z) has amplitude ``alpha``; its H-polarized part (magnetic field along
z) has amplitude ``beta`` and leads by the phase ``phi``.

Handedness labels are a fixed convention: RIGHT for ``-pi < phi < 0`` and
LEFT for ``0 < phi < pi`` (alpha, beta > 0).  For reference, the angle
``atan2(E_z, E_x)`` of the real electric field at a fixed point turns at the
rate ``alpha beta omega sin(phi) / (E_x^2 + E_z^2)``, so it increases in time
when ``0 < phi < pi``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .constants import EPSILON_0, MU_0
from .errors import InvalidSpec

__all__ = [
    "PolarizationSpec",
    "PolarizationKind",
    "Handedness",
    "PolarizationClass",
    "PolarizerAxis",
    "Transmission",
    "classify",
    "incident_fields",
    "polarizer_transmit",
    "real_components",
    "ellipse_residual",
]

ADMITTANCE = math.sqrt(EPSILON_0 / MU_0)


def _wrap_phase(phi: float) -> float:
    """Map an angle into (-pi, pi]."""
    wrapped = math.remainder(phi, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class PolarizationSpec:
    """Amplitudes of the E- and H-polarized parts and their phase shift (radians)."""

    alpha: float
    beta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise InvalidSpec("alpha and beta are non-negative amplitudes")
        if not (self.alpha > 0 or self.beta > 0):
            raise InvalidSpec("alpha and beta cannot both vanish")
        if not math.isfinite(self.phi):
            raise InvalidSpec(f"phase must be finite, got {self.phi!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "phi", _wrap_phase(float(self.phi)))

    @classmethod
    def from_degrees(cls, alpha: float, beta: float, phi_degrees: float) -> "PolarizationSpec":
        return cls(alpha, beta, math.radians(phi_degrees))

    @property
    def sin_phi(self) -> float:
        # exact zero for the linear phases so z-motion is identically absent
        if self.phi == 0.0 or self.phi == math.pi:
            return 0.0
        return math.sin(self.phi)

    @property
    def intensity(self) -> float:
        return self.alpha**2 + self.beta**2

    @property
    def h_amplitude(self) -> complex:
        """Complex amplitude ``beta exp(i phi)`` of the H-polarized part."""
        return self.beta * complex(math.cos(self.phi), self.sin_phi)

    @property
    def z_prefactor(self) -> float:
        """``2 alpha beta sin(phi) / (alpha^2 + beta^2)``, bounded by 1 in magnitude."""
        return 2.0 * self.alpha * self.beta * self.sin_phi / self.intensity


class PolarizationKind(enum.Enum):
    LINEAR = "linear"
    CIRCULAR = "circular"
    ELLIPTIC = "elliptic"


class Handedness(enum.Enum):
    RIGHT = "right"
    LEFT = "left"
    NONE = "none"


@dataclass(frozen=True)
class PolarizationClass:
    kind: PolarizationKind
    handedness: Handedness


def classify(pol: PolarizationSpec, tol: float = 1e-12) -> PolarizationClass:
    """Linear, circular or elliptic polarization, with handedness."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    a, b, phi = pol.alpha, pol.beta, pol.phi
    if a * b == 0 or abs(math.sin(phi)) <= tol:
        return PolarizationClass(PolarizationKind.LINEAR, Handedness.NONE)
    hand = Handedness.RIGHT if phi < 0 else Handedness.LEFT
    if abs(abs(phi) - 0.5 * math.pi) <= tol and abs(a - b) <= tol * (a + b):
        return PolarizationClass(PolarizationKind.CIRCULAR, hand)
    return PolarizationClass(PolarizationKind.ELLIPTIC, hand)


def incident_fields(y, pol: PolarizationSpec, k: float):
    """Phasors ``(E, H)`` of the incident plane wave, each of shape ``(3,) + y.shape``."""
    carrier = np.exp(1j * k * np.asarray(y, dtype=float))
    zero = np.zeros_like(carrier)
    lead = pol.h_amplitude * carrier
    E = np.stack([-lead, zero, pol.alpha * carrier])
    H = ADMITTANCE * np.stack([pol.alpha * carrier, zero, lead])
    return E, H


def real_components(y, t, pol: PolarizationSpec, k: float, omega: float):
    """Real transverse electric components ``(E_x, E_z)`` at position ``y`` and time ``t``."""
    arg = k * np.asarray(y, dtype=float) - omega * np.asarray(t, dtype=float)
    return -pol.beta * np.cos(arg + pol.phi), pol.alpha * np.cos(arg)


def ellipse_residual(ex, ez, pol: PolarizationSpec):
    """Left side minus right side of the polarization-ellipse identity."""
    u = ex / pol.beta
    w = ez / pol.alpha
    return u * u + w * w + 2.0 * u * w * math.cos(pol.phi) - math.sin(pol.phi) ** 2


class PolarizerAxis(enum.Enum):
    X = "x"
    Z = "z"


@dataclass(frozen=True)
class Transmission:
    """Field passed by an ideal, lossless linear polarizer.

    ``part`` names the surviving decomposition ("E" keeps E_z/H_x, "H" keeps
    E_x/H_z); ``amplitude`` is the complex weight that multiplies the scalar
    field of the covered slit.
    """

    axis: PolarizerAxis
    part: str
    amplitude: complex

    def fields(self, y, k: float):
        carrier = np.exp(1j * k * np.asarray(y, dtype=float))
        zero = np.zeros_like(carrier)
        a = self.amplitude * carrier
        if self.part == "E":
            return np.stack([zero, zero, a]), ADMITTANCE * np.stack([a, zero, zero])
        return np.stack([-a, zero, zero]), ADMITTANCE * np.stack([zero, zero, a])


def polarizer_transmit(pol: PolarizationSpec, axis) -> Transmission:
    """Project the incident wave on a polarizer axis (X keeps the H-part, Z the E-part)."""
    axis = PolarizerAxis(axis) if not isinstance(axis, PolarizerAxis) else axis
    if axis is PolarizerAxis.Z:
        return Transmission(axis, "E", complex(pol.alpha))
    return Transmission(axis, "H", pol.h_amplitude)
