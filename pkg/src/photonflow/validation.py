"""Cross-check suites run by ``photonflow validate``.

Each check measures one number and compares it with a tolerance.  Checks
with ``tolerance=None`` are measurements reported for information only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import argrelextrema

from . import rs_formulation as rs
from .emfield import assemble_free, poynting_free, vorticity_sz
from .flowlines import Scenario, ScenarioKind
from .gratingfield import (FieldSample, GratingSpec, PropagatorVariant, propagate,
                           slit_coefficient, spectrum_c2, spectrum_cN)
from .polarization import PolarizationSpec

__all__ = [
    "Check",
    "backend_agreement",
    "helmholtz_check",
    "maxwell_checks",
    "rs_equivalence",
    "vorticity_check",
    "sz_checks",
    "spectrum_checks",
    "fringe_spacing",
    "fringe_check",
    "speed_report",
    "run_suites",
    "format_table",
    "report",
]


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    tolerance: float | None
    passed: bool
    relation: str = "<"

    @classmethod
    def below(cls, suite, name, value, tolerance):
        value = float(value)
        return cls(suite, name, value, tolerance, bool(value < tolerance), "<")

    @classmethod
    def above(cls, suite, name, value, tolerance):
        value = float(value)
        return cls(suite, name, value, tolerance, bool(value > tolerance), ">")

    @classmethod
    def info(cls, suite, name, value):
        return cls(suite, name, float(value), None, True, "")


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


# --------------------------------------------------------------------------
# field backends

def backend_agreement(grating: GratingSpec, k: float, xs, ys) -> list[Check]:
    """Pairwise ``max|psi_a - psi_b| / max|psi_b|`` over the grid ``ys x xs``.

    Derivative differences are reported without a tolerance.
    """
    X, Y = np.meshgrid(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))
    fields = {v: propagate(X, Y, grating, k, v) for v in PropagatorVariant}
    names = {PropagatorVariant.MODE_PARAXIAL: "paraxial", PropagatorVariant.MODE_EXACT: "exact",
             PropagatorVariant.FRESNEL_KIRCHHOFF: "fk"}
    pairs = [(PropagatorVariant.MODE_PARAXIAL, PropagatorVariant.FRESNEL_KIRCHHOFF),
             (PropagatorVariant.MODE_PARAXIAL, PropagatorVariant.MODE_EXACT),
             (PropagatorVariant.FRESNEL_KIRCHHOFF, PropagatorVariant.MODE_EXACT)]
    out = []
    for a, b in pairs:
        fa, fb = fields[a], fields[b]
        tag = f"{names[a]} vs {names[b]}"
        out.append(Check.below("backends", f"{tag}: psi", _rel(fa.psi, fb.psi), 1e-3))
        out.append(Check.info("backends", f"{tag}: dpsi/dx", _rel(fa.dpsi_dx, fb.dpsi_dx)))
        out.append(Check.info("backends", f"{tag}: dpsi/dy", _rel(fa.dpsi_dy, fb.dpsi_dy)))
    return out


def helmholtz_check(grating: GratingSpec, k: float, x, y, h: float) -> Check:
    def field_at(xx, yy):
        return propagate(xx, yy, grating, k, PropagatorVariant.MODE_EXACT)
    res = rs.helmholtz_residual(field_at, x, y, k, h)
    return Check.below("helmholtz", "exact propagator, max relative residual", res["max"], 1e-5)


# --------------------------------------------------------------------------
# Riemann-Silberstein

def maxwell_checks(grating: GratingSpec, pol: PolarizationSpec, k: float, x, y,
                   h: float) -> list[Check]:
    """Plane wave with ``pol``; diffracted fields with a diagonal linear polarization.

    The phasor ``F`` of a circularly polarized field holds a single helicity
    and may vanish identically, which would make the diffracted-field check
    empty; a linear polarization carries both helicities.
    """
    diffracted = PolarizationSpec(1.0, 1.0, 0.0)
    out = [Check.below("maxwell", "plane wave, analytic curl",
                       rs.plane_wave_residual(pol, k, np.linspace(0.0, 4 * math.pi / k, 17)),
                       1e-14)]
    for variant, tol in ((PropagatorVariant.MODE_EXACT, 1e-4),
                         (PropagatorVariant.MODE_PARAXIAL, None)):
        def em_at(xx, yy, variant=variant):
            return assemble_free(propagate(xx, yy, grating, k, variant), diffracted, k)
        res = rs.maxwell_residual(em_at, x, y, k, h)
        label = "exact" if variant is PropagatorVariant.MODE_EXACT else "paraxial"
        for key in ("curl", "divergence"):
            name = f"{label} propagator, {key}"
            if tol is None:
                out.append(Check.info("maxwell", name, res[key]["max"]))
            else:
                out.append(Check.below("maxwell", name, res[key]["max"], tol))
    return out


def random_samples(n: int, seed: int = 0) -> tuple[FieldSample, PolarizationSpec, float]:
    """Random complex scalar fields with O(1) derivatives scaled by ``k``."""
    rng = np.random.default_rng(seed)
    k = 2 * math.pi / 500e-9

    def cplx(scale):
        return scale * (rng.normal(size=n) + 1j * rng.normal(size=n))

    f = FieldSample(cplx(1.0), cplx(k), cplx(k))
    pol = PolarizationSpec(*rng.uniform(0.2, 1.5, 2), rng.uniform(-math.pi, math.pi))
    return f, pol, k


def rs_equivalence(n: int = 1000, seed: int = 0) -> list[Check]:
    f, pol, k = random_samples(n, seed)
    em = assemble_free(f, pol, k)
    pair = rs.build_rs(em)
    U = em.energy()
    S = em.poynting()
    Snorm = np.linalg.norm(S, axis=0)
    v_classic = poynting_free(f, pol, k).v
    back = rs.invert(pair)
    return [
        Check.below("rs", "energy vs classical", np.max(np.abs(rs.rs_energy(pair) - U) / U), 1e-12),
        Check.below("rs", "Poynting vs Re(E x H*)/2",
                    np.max(np.linalg.norm(rs.rs_poynting(pair) - S, axis=0) / Snorm), 1e-12),
        Check.below("rs", "velocity vs emfield",
                    np.max(np.abs(rs.rs_velocity(pair) - v_classic)), 1e-12),
        Check.below("rs", "round trip E", _rel(back.E, em.E), 1e-14),
        Check.below("rs", "round trip H", _rel(back.H, em.H), 1e-14),
    ]


# --------------------------------------------------------------------------
# S_z laws

_CIRCULAR = PolarizationSpec(1.0, 1.0, math.pi / 2)


def vorticity_check(grating: GratingSpec, k: float, points, h: float,
                    pol: PolarizationSpec = _CIRCULAR) -> Check:
    """Largest ``residual / |S|`` of the S_z curl identity over ``points``."""
    def field_at(xx, yy):
        return propagate(xx, yy, grating, k, PropagatorVariant.FRESNEL_KIRCHHOFF)

    worst = 0.0
    for x, y in points:
        res = vorticity_sz(x, y, field_at, pol, k, h)
        S = poynting_free(field_at(np.array([x]), np.array([y])), pol, k).S[:, 0]
        worst = max(worst, res / float(np.linalg.norm(S)))
    return Check.below("sz", "vorticity identity, circular", worst, 1e-6)


def sz_checks(grating: GratingSpec, wavelength: float, probe: tuple[float, float]) -> list[Check]:
    x = np.linspace(-60e-6, 60e-6, 121)
    y = np.full(x.shape, probe[1])
    linear = Scenario(grating, PolarizationSpec(1.0, 1.0, 0.0), wavelength)
    flow = linear.flow(x, y)
    lin = float(np.max(np.abs(flow.S[2]) / np.linalg.norm(flow.S, axis=0)))
    pol_scn = Scenario(grating, PolarizationSpec(1.0, 1.0, 0.0), wavelength,
                       kind=ScenarioKind.POLARIZERS)
    s = pol_scn.flow(np.array([probe[0]]), np.array([probe[1]])).S[:, 0]
    return [Check.below("sz", "free linear, max |Sz|/|S|", lin, 1e-12),
            Check.above("sz", f"polarizers phi=0, |Sz|/|S| at x={probe[0]:.3g} m, "
                        f"y={probe[1]:.3g} m", abs(s[2]) / np.linalg.norm(s), 1e-6)]


# --------------------------------------------------------------------------
# spectra and fringes

def spectrum_checks(grating: GratingSpec, k: float, n: int = 10_000) -> list[Check]:
    d, w = grating.pitch, grating.slit_width
    kx = np.linspace(-k, k, n)
    c2 = spectrum_c2(kx, d, w)
    scale = float(np.max(np.abs(c2)))
    summed = (slit_coefficient(kx, 0.5 * d, w) + slit_coefficient(kx, -0.5 * d, w)) / math.sqrt(2)
    return [
        Check.below("spectrum", "cN(N=2) vs c2",
                    np.max(np.abs(spectrum_cN(kx, 2, d, w) - c2)) / scale, 1e-12),
        Check.below("spectrum", "c2 vs slit-coefficient sum",
                    np.max(np.abs(summed - c2)) / scale, 1e-12),
    ]


def fringe_spacing(x, curve) -> float:
    """Mean spacing of the interior local minima (dark fringes), refined by parabolas.

    Minima are used because the slowly varying single-slit envelope pulls
    the maxima towards the axis, while the zeros of the two-beam factor stay
    in place.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(curve, dtype=float)
    idx = argrelextrema(c, np.less)[0]
    if idx.size < 2:
        raise ValueError("fewer than two dark fringes")
    dx = x[1] - x[0]
    a, b, d = c[idx - 1], c[idx], c[idx + 1]
    dark = x[idx] + 0.5 * (a - d) / (a - 2 * b + d) * dx
    return float(np.mean(np.diff(dark)))


def fringe_check(grating: GratingSpec, wavelength: float, L: float) -> list[Check]:
    scn = Scenario(grating, PolarizationSpec(1.0, 0.0, 0.0), wavelength)
    # stay inside the central single-slit lobe, whose first zero is at lambda L / width
    half = 0.9 * wavelength * L / grating.slit_width
    x = np.linspace(-half, half, 4001)
    U = scn.flow(x, np.full(x.shape, L)).U
    expected = wavelength * L / grating.pitch
    spacing = fringe_spacing(x, U)
    return [Check.below("fringes", f"spacing {spacing * 1e6:.4g} um vs lambda L / d",
                        abs(spacing / expected - 1.0), 0.02)]


# --------------------------------------------------------------------------

def speed_report(grating: GratingSpec, pol: PolarizationSpec, wavelength: float,
                 L: float) -> list[Check]:
    """Largest observed ``|v| = |S| / (c U)`` behind the grating, reported only."""
    x = np.linspace(-60e-6, 60e-6, 121)
    kinds = [ScenarioKind.FREE] + ([ScenarioKind.POLARIZERS] if grating.n_slits == 2 else [])
    out = []
    for kind in kinds:
        scn = Scenario(grating, pol, wavelength, kind=kind)
        vmax = max(float(np.nanmax(np.linalg.norm(scn.flow(x, np.full(x.shape, y)).v, axis=0)))
                   for y in np.linspace(0.05 * L, L, 5))
        out.append(Check.info("speed", f"max |v|/c, {kind.value}", vmax))
    return out


def run_suites(wavelength: float, grating: GratingSpec, pol: PolarizationSpec, L: float, *,
               nx: int = 41, ny: int = 11) -> list[Check]:
    """All suites at the given geometry; ``nx`` by ``ny`` is the backend grid."""
    k = 2 * math.pi / wavelength
    xs = np.linspace(-20e-6, 20e-6, nx)
    ys = np.linspace(0.8 * L, L, ny)
    probes_x = np.array([-13e-6, -2e-6, 7e-6, 18e-6])
    probes_y = np.full(probes_x.shape, 0.5 * L)
    vort_pol = pol if pol.sin_phi != 0 else _CIRCULAR
    checks = []
    checks += spectrum_checks(grating, k)
    checks += backend_agreement(grating, k, xs, ys)
    checks.append(helmholtz_check(grating, k, probes_x, probes_y, wavelength / 100))
    checks += maxwell_checks(grating, pol, k, probes_x, probes_y, wavelength / 100)
    checks += rs_equivalence()
    checks.append(vorticity_check(grating, k, list(zip(probes_x, probes_y)), wavelength / 200,
                                  vort_pol))
    if grating.n_slits == 2:
        checks += sz_checks(grating, wavelength, (20e-6, 0.5 * L))
    checks += fringe_check(grating, wavelength, L)
    checks += speed_report(grating, pol, wavelength, L)
    return checks


def format_table(checks) -> str:
    rows = [("suite", "check", "value", "tolerance", "result")]
    for c in checks:
        tol = "-" if c.tolerance is None else f"{c.relation} {c.tolerance:.1e}"
        status = "info" if c.tolerance is None else ("PASS" if c.passed else "FAIL")
        rows.append((c.suite, c.name, f"{c.value:.3e}", tol, status))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def report(checks) -> dict:
    return {
        "passed": all(c.passed for c in checks),
        "checks": [{"suite": c.suite, "name": c.name, "value": c.value,
                    "tolerance": c.tolerance, "relation": c.relation, "passed": c.passed}
                   for c in checks],
    }
