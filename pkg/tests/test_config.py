from __future__ import annotations

import math
from pathlib import Path

import pytest

from photonflow.config import parse_config, parse_config_text
from photonflow.ensemble import Sampling
from photonflow.errors import ParseError, ValidationError
from photonflow.flowlines import ScenarioKind
from photonflow.gratingfield import PropagatorVariant
from photonflow.polarization import Handedness, PolarizationKind, classify

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
MINIMAL = "[scenario]\nwavelength = 500e-9\n"


def test_defaults():
    cfg = parse_config_text(MINIMAL)
    assert cfg.wavelength == 500e-9 and cfg.screen == 1e-3
    assert cfg.grating.n_slits == 2
    assert (cfg.grating.slit_width, cfg.grating.pitch) == (5e-6, 10e-6)
    assert cfg.pol.phi == pytest.approx(math.pi / 2)
    assert cfg.kind is ScenarioKind.FREE
    assert cfg.backend is PropagatorVariant.MODE_PARAXIAL
    assert cfg.ensemble.sampling is Sampling.FLUX and cfg.ensemble.seed == 0
    assert cfg.output.formats == ("csv",)
    assert cfg.k == pytest.approx(2 * math.pi / 500e-9)


def test_full_config():
    cfg = parse_config_text("""
[grating]
n_slits = 3
slit_width = 2e-6   ; inline comment
pitch = 6e-6
[polarization]
alpha = 2
beta = 0
phi_degrees = 0
[scenario]
wavelength = 633e-9
screen = 5e-4
backend = fresnel-kirchhoff
[ensemble]
n_per_slit = 7
sampling = random
seed = 18446744073709551615
[integrator]
growth = 1e-3
record_every = 4
[output]
formats = csv, json
gnuplot = no
""")
    assert cfg.grating.n_slits == 3 and cfg.grating.slit_width == 2e-6
    assert classify(cfg.pol).kind is PolarizationKind.LINEAR
    assert cfg.backend is PropagatorVariant.FRESNEL_KIRCHHOFF
    assert cfg.ensemble.sampling is Sampling.RANDOM and cfg.ensemble.seed == 2**64 - 1
    assert cfg.integrator.record_every == 4
    assert cfg.output.formats == ("csv", "json") and cfg.output.gnuplot is False


def test_missing_wavelength():
    with pytest.raises(ValidationError):
        parse_config_text("[grating]\nn_slits = 2\n")


def test_pitch_must_exceed_width():
    with pytest.raises(ValidationError):
        parse_config_text(MINIMAL + "[grating]\nslit_width = 10e-6\npitch = 10e-6\n")


def test_polarizers_need_two_slits():
    with pytest.raises(ValidationError):
        parse_config_text("[grating]\nn_slits = 3\n" + MINIMAL + "kind = polarizers\n")


@pytest.mark.parametrize("text,line", [
    (MINIMAL + "colour = red\n", 3),
    ("# comment\n" + MINIMAL + "[optics]\nfocus = 1\n", 4),
    (MINIMAL + "screen = far\n", 3),
    (MINIMAL + "wavelength = 1e-6\n", 3),
    ("wavelength = 500e-9\n", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_config_text(text)
    assert info.value.lineno == line
    assert f"line {line}" in str(info.value)


@pytest.mark.parametrize("extra", [
    "[ensemble]\nseed = -1\n",
    "[ensemble]\nn_per_slit = 0\n",
    "[output]\nformats = xml\n",
    "[output]\nx_min = 1e-4\nx_max = -1e-4\n",
    "[grating]\nslit_width = -5e-6\n",
])
def test_invalid_values(extra):
    with pytest.raises((ParseError, ValidationError)):
        parse_config_text(MINIMAL + extra)


def test_negative_screen():
    with pytest.raises(ValidationError):
        parse_config_text(MINIMAL + "screen = -1\n")


def test_unreadable_file(tmp_path):
    with pytest.raises(ParseError):
        parse_config(tmp_path / "missing.ini")


def test_overrides(tmp_path):
    cfg = parse_config_text(MINIMAL).with_seed(42).with_directory(tmp_path)
    assert cfg.ensemble.seed == 42 and cfg.output.directory == tmp_path


@pytest.mark.parametrize("name", ["fig1.ini", "fig2.ini", "fig3.ini", "fig4.ini", "defaults.ini"])
def test_shipped_configs_use_reference_geometry(name):
    cfg = parse_config(CONFIGS / name)
    assert cfg.wavelength == 500e-9 and cfg.screen == 1e-3
    assert (cfg.grating.n_slits, cfg.grating.slit_width, cfg.grating.pitch) == (2, 5e-6, 10e-6)


def test_figure_configs():
    fig1 = parse_config(CONFIGS / "fig1.ini")
    assert fig1.ensemble.n_per_slit == 15
    assert classify(fig1.pol).kind is PolarizationKind.CIRCULAR
    assert fig1.kind is ScenarioKind.FREE
    fig2 = parse_config(CONFIGS / "fig2.ini")
    assert 2 * fig2.ensemble.n_per_slit == 5000
    for name in ("fig3.ini", "fig4.ini"):
        cfg = parse_config(CONFIGS / name)
        assert cfg.kind is ScenarioKind.POLARIZERS
        assert classify(cfg.pol).handedness is Handedness.NONE
