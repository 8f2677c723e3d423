from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import PITCH, SCREEN, WAVELENGTH, WIDTH
from photonflow.ensemble import (EnsembleSpec, Sampling, find_minimum, histogram_arrivals,
                                 run_ensemble, sample_initials, termination_counts,
                                 theory_curve, visibility)
from photonflow.errors import EmptyEnsemble, InvalidSpec, NoExtrema
from photonflow.flowlines import IntegratorConfig, Scenario, Termination, Trajectory
from photonflow.gratingfield import GratingSpec
from photonflow.polarization import PolarizationSpec

GRATING = GratingSpec(2, WIDTH, PITCH)
CIRCULAR = PolarizationSpec(1.0, 1.0, math.pi / 2)
SCENARIO = Scenario(GRATING, CIRCULAR, WAVELENGTH)


def spec(n, sampling="stratified", **kw):
    return EnsembleSpec(n, SCREEN, sampling, **kw)


def test_sampling_aliases():
    assert Sampling.parse("UniformStratified") is Sampling.STRATIFIED
    assert Sampling.parse("uniform_random") is Sampling.RANDOM
    with pytest.raises(ValueError):
        Sampling.parse("sobol")


def test_fifteen_per_slit_gives_thirty_starts():
    starts = sample_initials(GRATING, spec(15), WAVELENGTH)
    assert starts.shape == (30, 3)
    assert np.all(GRATING.slit_of(starts[:15, 0]) == 0)
    assert np.all(GRATING.slit_of(starts[15:, 0]) == 1)
    assert np.all(starts[:, 1] == 0) and np.all(starts[:, 2] == 0)


def test_stratified_spacing_and_margin():
    starts = sample_initials(GRATING, spec(15), WAVELENGTH)
    lo, hi = GRATING.slit_bounds(0)
    x = starts[:15, 0]
    assert x[0] == pytest.approx(lo + 2 * WAVELENGTH)
    assert x[-1] == pytest.approx(hi - 2 * WAVELENGTH)
    assert np.allclose(np.diff(x), (WIDTH - 4 * WAVELENGTH) / 14)


def test_stratified_starts_are_mirror_pairs():
    x = sample_initials(GRATING, spec(15), WAVELENGTH)[:, 0]
    assert np.allclose(x, -x[::-1], atol=1e-18)


def test_random_sampling_is_seeded():
    a = sample_initials(GRATING, spec(50, "random", seed=7), WAVELENGTH)
    b = sample_initials(GRATING, spec(50, "random", seed=7), WAVELENGTH)
    c = sample_initials(GRATING, spec(50, "random", seed=8), WAVELENGTH)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.all(GRATING.slit_of(a[:, 0]) >= 0)


def test_midpoint_sampling_cells():
    x = sample_initials(GRATING, spec(5, "midpoint"), WAVELENGTH)[:5, 0]
    lo, _ = GRATING.slit_bounds(0)
    assert np.allclose(x, lo + WIDTH * (np.arange(5) + 0.5) / 5)


def test_flux_sampling_gives_equal_flux_strips():
    n = 40
    x = sample_initials(GRATING, spec(n, "flux"), WAVELENGTH, SCENARIO)[:n, 0]
    lo, hi = GRATING.slit_bounds(0)
    assert np.all(np.diff(x) > 0) and lo < x[0] and x[-1] < hi
    # flux between consecutive starts is (nearly) constant
    grid = np.linspace(lo, hi, 20001)
    sy = SCENARIO.flow(grid, np.full(grid.shape, WAVELENGTH / 100)).S[1]
    cdf = np.concatenate([[0], np.cumsum(0.5 * (sy[1:] + sy[:-1]) * np.diff(grid))])
    share = np.diff(np.interp(x, grid, cdf)) / cdf[-1]
    assert np.allclose(share, 1 / n, rtol=0.02)


def test_flux_sampling_needs_scenario():
    with pytest.raises(InvalidSpec):
        sample_initials(GRATING, spec(5, "flux"), WAVELENGTH)


def test_ensemble_spec_validation():
    with pytest.raises(InvalidSpec):
        spec(0)
    with pytest.raises(InvalidSpec):
        spec(5, hist_range=(1e-6, -1e-6))
    with pytest.raises(InvalidSpec):
        sample_initials(GRATING, spec(5, edge_margin=3e-6), WAVELENGTH)


def fake_trajectories(xs, zs=None, status=Termination.REACHED_SCREEN):
    zs = np.zeros_like(xs) if zs is None else zs
    return [Trajectory(np.array([[x, 0.0, 0.0], [x, SCREEN, z]]), 0, status)
            for x, z in zip(xs, zs)]


def test_histogram_has_unit_area(rng):
    trajs = fake_trajectories(rng.normal(0, 50e-6, 4000))
    h = histogram_arrivals(trajs, "x", spec(1))
    assert np.sum(h.counts) * h.bin_width == pytest.approx(1.0)
    assert h.n_used + h.n_outside == 4000
    assert h.theory is None and h.l2_distance is None


def test_histogram_ignores_unfinished_trajectories(rng):
    good = fake_trajectories(rng.normal(0, 20e-6, 100))
    bad = fake_trajectories(np.zeros(5), status=Termination.NODAL_STALL)
    assert histogram_arrivals(good + bad, "x", spec(1)).n_used == 100


def test_histogram_of_theory_samples_is_close_to_theory(rng):
    # draw arrivals from the theory density itself
    s = spec(1)
    fine = np.linspace(-250e-6, 250e-6, 50001)
    pdf = theory_curve(SCENARIO, fine, SCREEN)
    cdf = np.cumsum(pdf)
    cdf /= cdf[-1]
    xs = np.interp(rng.uniform(size=200000), cdf, fine)
    h = histogram_arrivals(fake_trajectories(xs), "x", s, SCENARIO)
    assert h.l2_distance < 0.05
    assert h.visibility > 0.9


def test_z_histogram(rng):
    trajs = fake_trajectories(np.zeros(200), rng.normal(0, 1e-6, 200))
    h = histogram_arrivals(trajs, "z", spec(1, bin_width=0.5e-6, hist_range=(-5e-6, 5e-6)))
    assert h.axis == "z" and h.n_used > 190


def test_empty_ensemble_raises():
    with pytest.raises(EmptyEnsemble):
        histogram_arrivals([], "x", spec(1))
    with pytest.raises(EmptyEnsemble):
        histogram_arrivals(fake_trajectories(np.array([1.0])), "x", spec(1))
    with pytest.raises(ValueError):
        histogram_arrivals(fake_trajectories(np.zeros(1)), "y", spec(1))


def test_theory_curve_unit_area():
    x = np.linspace(-250e-6, 250e-6, 251)
    t = theory_curve(SCENARIO, x, SCREEN)
    assert np.sum(t) * (x[1] - x[0]) == pytest.approx(1.0)


def test_visibility_of_known_curves():
    x = np.linspace(-50e-6, 50e-6, 2001)
    k = 2 * math.pi / 20e-6
    assert visibility(x, 1 + 0.5 * np.cos(k * x), (-40e-6, 40e-6)) == pytest.approx(0.5, abs=1e-6)
    assert visibility(x, np.cos(k * x) ** 2, (-40e-6, 40e-6)) == pytest.approx(1.0, abs=1e-6)
    # a single smooth hump has no fringes
    assert visibility(x, np.exp(-(x / 30e-6) ** 2), (-40e-6, 40e-6)) == 0.0
    assert visibility(x, np.ones_like(x), (-40e-6, 40e-6)) == 0.0


def test_visibility_errors():
    x = np.linspace(-50e-6, 50e-6, 101)
    with pytest.raises(NoExtrema):
        visibility(x, x, (-40e-6, 40e-6))
    with pytest.raises(InvalidSpec):
        visibility(x, np.ones_like(x), (-60e-6, 40e-6))


def test_find_minimum_refines_between_samples():
    x = np.linspace(0, 10, 101)
    c = (x - 4.237) ** 2
    assert find_minimum(x, c, 4.0, 2.0) == pytest.approx(4.237, abs=1e-9)
    with pytest.raises(NoExtrema):
        find_minimum(x, c, 4.0, 0.01)


def test_run_ensemble_independent_of_workers():
    starts = sample_initials(GRATING, spec(2), WAVELENGTH)
    cfg = IntegratorConfig(growth=2e-2)
    one = run_ensemble(starts, SCENARIO, 100e-6, cfg, workers=1)
    two = run_ensemble(starts, SCENARIO, 100e-6, cfg, workers=2)
    assert len(one) == 4
    for a, b in zip(one, two):
        assert np.array_equal(a.points, b.points) and a.slit_index == b.slit_index
    counts = termination_counts(one)
    assert counts["reached-screen"] == 4 and sum(counts.values()) == 4
    assert run_ensemble(np.empty((0, 3)), SCENARIO, 100e-6, cfg) == []


def test_stratified_reference_ensemble_reaches_screen():
    """5,000 stratified starts at the reference geometry; slow (about a minute)."""
    s = spec(2500)
    starts = sample_initials(GRATING, s, WAVELENGTH)
    trajs = run_ensemble(starts, SCENARIO, SCREEN, IntegratorConfig(growth=1e-3,
                                                                    record_every=10**9))
    counts = termination_counts(trajs)
    assert counts["reached-screen"] >= 0.999 * 5000
    # mirror-pair starts give a mirror-symmetric arrival histogram
    h = histogram_arrivals(trajs, "x", s)
    assert np.array_equal(h.counts, h.counts[::-1])
