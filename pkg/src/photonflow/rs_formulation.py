"""Riemann-Silberstein form of the time-harmonic EM field.

The phasors ``E = E1 + i E2`` and ``H = H1 + i H2`` split into real parts,
each of which defines a Riemann-Silberstein vector

    F_i = (sqrt(eps0) E_i + i sqrt(mu0) H_i) / sqrt(2).

Time averages follow the phasor convention (a factor 1/2 for products of
harmonic fields), so

    U = 1/2 sum_i F_i . F_i*,     S = 1/2 Re(i c sum_i F_i x F_i*),

which reproduce ``(eps0 |E|^2 + mu0 |H|^2)/4`` and ``Re(E x H*)/2``.

For the Maxwell check the complex phasor ``F = (sqrt(eps0) E + i sqrt(mu0) H)/sqrt(2)``
is used: with time dependence ``exp(-i omega t)`` it obeys ``omega F = c curl F``
and ``div F = 0``.  The two real-part vectors do not obey this equation one by
one; they are coupled, ``c curl F1 = i omega F2`` and ``c curl F2 = -i omega F1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C, EPSILON_0, MU_0
from .emfield import EMSample
from .errors import NodalPoint
from .polarization import PolarizationSpec, incident_fields

__all__ = [
    "RSPair",
    "build_rs",
    "invert",
    "phasor_rs",
    "rs_energy",
    "rs_poynting",
    "rs_velocity",
    "instantaneous_energy",
    "maxwell_residual",
    "helmholtz_residual",
    "plane_wave_residual",
]

_SQ_EPS = math.sqrt(EPSILON_0)
_SQ_MU = math.sqrt(MU_0)
_SQ2 = math.sqrt(2.0)


@dataclass(frozen=True)
class RSPair:
    """Riemann-Silberstein vectors of the real and the imaginary field parts."""

    F1: np.ndarray
    F2: np.ndarray


def _rs(E, H):
    return (_SQ_EPS * E + 1j * _SQ_MU * H) / _SQ2


def build_rs(em: EMSample) -> RSPair:
    E = np.asarray(em.E)
    H = np.asarray(em.H)
    return RSPair(_rs(E.real, H.real), _rs(E.imag, H.imag))


def invert(pair: RSPair) -> EMSample:
    """Recover the complex phasors from the two Riemann-Silberstein vectors."""
    def parts(F):
        return (F + np.conj(F)).real / math.sqrt(2.0 * EPSILON_0), \
            ((F - np.conj(F)) / 1j).real / math.sqrt(2.0 * MU_0)

    E1, H1 = parts(pair.F1)
    E2, H2 = parts(pair.F2)
    return EMSample(E1 + 1j * E2, H1 + 1j * H2)


def phasor_rs(em: EMSample) -> np.ndarray:
    """Complex-phasor Riemann-Silberstein vector used by the Maxwell check."""
    return _rs(np.asarray(em.E), np.asarray(em.H))


def _dot(a, b):
    return np.sum(a * b, axis=0)


def rs_energy(pair: RSPair) -> np.ndarray:
    return 0.5 * (_dot(pair.F1, np.conj(pair.F1)) + _dot(pair.F2, np.conj(pair.F2))).real


def rs_poynting(pair: RSPair) -> np.ndarray:
    cross = (np.cross(pair.F1, np.conj(pair.F1), axis=0)
             + np.cross(pair.F2, np.conj(pair.F2), axis=0))
    return 0.5 * np.real(1j * C * cross)


def rs_velocity(pair: RSPair, floor: float = 0.0) -> np.ndarray:
    """``S / (c U)`` from the Riemann-Silberstein expressions.

    Raises :class:`NodalPoint` where the energy density is not above ``floor``.
    """
    U = rs_energy(pair)
    if np.any(~(U > floor)):
        raise NodalPoint("energy density below the nodal threshold")
    return rs_poynting(pair) / (C * U)


def instantaneous_energy(em: EMSample, omega_t) -> np.ndarray:
    """``F . F*`` of the single Riemann-Silberstein vector built from the real
    fields ``Re(E exp(-i omega t))`` and ``Re(H exp(-i omega t))``."""
    phase = np.exp(-1j * np.asarray(omega_t, dtype=float))
    E = np.real(np.multiply.outer(np.asarray(em.E), phase))
    H = np.real(np.multiply.outer(np.asarray(em.H), phase))
    F = _rs(E, H)
    return _dot(F, np.conj(F)).real


# --------------------------------------------------------------------------
# finite-difference residuals

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFF = np.arange(-2, 3)


def _stencil_points(x, y, h):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xs = np.concatenate([x[None, :] + h * _OFF[:, None], np.repeat(x[None, :], 5, axis=0)])
    ys = np.concatenate([np.repeat(y[None, :], 5, axis=0), y[None, :] + h * _OFF[:, None]])
    return xs, ys


def _stats(values):
    values = np.asarray(values, dtype=float)
    return {"max": float(np.max(values)), "mean": float(np.mean(values))}


def _field_scale(E, H):
    """``sqrt((eps0 |E|^2 + mu0 |H|^2) / 2)``.

    This bounds ``|F|`` but does not vanish with it: a circularly polarized
    plane wave of one handedness has ``F = 0`` identically.
    """
    e2 = np.sum(np.abs(E) ** 2, axis=0)
    h2 = np.sum(np.abs(H) ** 2, axis=0)
    return np.sqrt(0.5 * (EPSILON_0 * e2 + MU_0 * h2))


def maxwell_residual(em_at, x, y, k: float, h: float) -> dict:
    """Relative residuals of ``omega F = c curl F`` and ``div F = 0``.

    ``em_at`` maps coordinate arrays to an :class:`EMSample`; fields do not
    depend on ``z``.  Derivatives use five-point central differences of step
    ``h``.  Residuals are normalized by ``omega`` (resp. ``k``) times the
    field scale ``sqrt((eps0 |E|^2 + mu0 |H|^2) / 2)``.
    """
    xs, ys = _stencil_points(x, y, h)
    em = em_at(xs, ys)
    F = phasor_rs(em)                                # (3, 10, n)
    dx = np.tensordot(_D1, F[:, :5], axes=([0], [1])) / h
    dy = np.tensordot(_D1, F[:, 5:], axes=([0], [1])) / h
    F0 = F[:, 2]
    curl = np.stack([dy[2], -dx[2], dx[1] - dy[0]])
    omega = C * k
    norm = _field_scale(np.asarray(em.E)[:, 2], np.asarray(em.H)[:, 2])
    res = np.sqrt(np.sum(np.abs(omega * F0 - C * curl) ** 2, axis=0)) / (omega * norm)
    div = np.abs(dx[0] + dy[1]) / (k * norm)
    return {"curl": _stats(res), "divergence": _stats(div)}


def helmholtz_residual(field_at, x, y, k: float, h: float) -> dict:
    """Relative residual ``|lap psi + k^2 psi| / (k^2 |psi|)`` by five-point stencils.

    ``field_at`` maps coordinate arrays to a :class:`FieldSample`.
    """
    xs, ys = _stencil_points(x, y, h)
    psi = np.asarray(field_at(xs, ys).psi)
    lap = (np.tensordot(_D2, psi[:5], axes=([0], [0]))
           + np.tensordot(_D2, psi[5:], axes=([0], [0]))) / (h * h)
    centre = psi[2]
    res = np.abs(lap + k * k * centre) / (k * k * np.abs(centre))
    return _stats(res)


def plane_wave_residual(pol: PolarizationSpec, k: float, y) -> float:
    """Largest relative residual of ``omega F = c curl F`` for the incident wave.

    Normalized by the field scale as in :func:`maxwell_residual`.

    The curl of a field varying as ``exp(i k y)`` is ``i k y_hat x F``,
    applied analytically.
    """
    E, H = incident_fields(y, pol, k)
    F = _rs(E, H)
    yhat = np.zeros_like(F.real)
    yhat[1] = 1.0
    curl = 1j * k * np.cross(yhat, F, axis=0)
    omega = C * k
    res = np.sqrt(np.sum(np.abs(omega * F - C * curl) ** 2, axis=0)) / (
        omega * _field_scale(E, H))
    return float(np.max(res))
