"""Run configuration: an INI file with flat sections, parsed and validated.

Sections and keys (lengths in metres, angles in degrees)::

    [grating]       n_slits, slit_width, pitch
    [polarization]  alpha, beta, phi_degrees
    [scenario]      wavelength, screen, kind, backend, swap_polarizers, near_zone
    [ensemble]      n_per_slit, sampling, seed, bin_width, hist_min, hist_max,
                    edge_margin, z0
    [integrator]    step, growth, y0, max_steps, max_halvings, record_every, block_size
    [output]        directory, formats, gnuplot, x_min, x_max, nx, y_min, y_max, ny

Only ``wavelength`` is required; every other key has a default.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .ensemble import EnsembleSpec, Sampling
from .errors import InvalidSpec, ParseError, ValidationError
from .flowlines import IntegratorConfig, Scenario, ScenarioKind
from .gratingfield import GratingSpec, PropagatorVariant
from .polarization import PolarizationSpec

__all__ = ["OutputSpec", "RunConfig", "parse_config", "parse_config_text", "DEFAULTS"]

# key -> default, or None when the key is optional and has no fixed default
DEFAULTS: dict[str, dict[str, object]] = {
    "grating": {"n_slits": 2, "slit_width": 5e-6, "pitch": 10e-6},
    "polarization": {"alpha": 1.0, "beta": 1.0, "phi_degrees": 90.0},
    "scenario": {"wavelength": None, "screen": 1e-3, "kind": "free",
                 "backend": "mode-paraxial", "swap_polarizers": False, "near_zone": None},
    "ensemble": {"n_per_slit": 2500, "sampling": "flux", "seed": 0, "bin_width": 2e-6,
                 "hist_min": -250e-6, "hist_max": 250e-6, "edge_margin": None, "z0": 0.0},
    "integrator": {"step": None, "growth": 1e-3, "y0": None, "max_steps": None,
                   "max_halvings": 8, "record_every": 1, "block_size": 8192},
    "output": {"directory": "out", "formats": "csv", "gnuplot": True,
               "x_min": -150e-6, "x_max": 150e-6, "nx": 301,
               "y_min": 1e-6, "y_max": 1e-3, "ny": 200},
}

_FORMATS = ("csv", "json")


@dataclass(frozen=True)
class OutputSpec:
    directory: Path = Path("out")
    formats: tuple[str, ...] = ("csv",)
    gnuplot: bool = True
    x_range: tuple[float, float] = (-150e-6, 150e-6)
    nx: int = 301
    y_range: tuple[float, float] = (1e-6, 1e-3)
    ny: int = 200


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs, validated."""

    wavelength: float
    grating: GratingSpec
    pol: PolarizationSpec
    kind: ScenarioKind
    screen: float
    ensemble: EnsembleSpec
    integrator: IntegratorConfig
    backend: PropagatorVariant = PropagatorVariant.MODE_PARAXIAL
    swap_polarizers: bool = False
    near_zone: float | None = None
    output: OutputSpec = field(default_factory=OutputSpec)

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    def scenario(self) -> Scenario:
        return Scenario(self.grating, self.pol, self.wavelength, kind=self.kind,
                        backend=self.backend, swap_polarizers=self.swap_polarizers,
                        near_zone=self.near_zone)

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, ensemble=replace(self.ensemble, seed=int(seed)))

    def with_directory(self, directory) -> "RunConfig":
        return replace(self, output=replace(self.output, directory=Path(directory)))


# --------------------------------------------------------------------------
# parsing

_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` line, by section."""
    lines: dict[tuple[str, str], int] = {}
    section = None
    for n, line in enumerate(text.splitlines(), start=1):
        if line[:1].isspace() and section is not None and not line.strip().startswith(("#", ";")):
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1).strip().lower()
            lines.setdefault((section, ""), n)
            continue
        m = _KEY.match(line)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), n)
    return lines


class _Reader:
    def __init__(self, parser, lines):
        self.parser = parser
        self.lines = lines

    def raw(self, section, key):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        return None

    def _convert(self, section, key, conv, what):
        raw = self.raw(section, key)
        if raw is None:
            return DEFAULTS[section][key]
        try:
            return conv(raw.strip())
        except ValueError:
            raise ParseError(f"[{section}] {key}: expected {what}, got {raw!r}",
                             self.lines.get((section, key))) from None

    def float(self, section, key):
        def conv(s):
            value = float(s)
            if not math.isfinite(value):
                raise ValueError(s)
            return value
        return self._convert(section, key, conv, "a finite number")

    def int(self, section, key):
        return self._convert(section, key, int, "an integer")

    def bool(self, section, key):
        states = configparser.ConfigParser.BOOLEAN_STATES

        def conv(s):
            if s.lower() not in states:
                raise ValueError(s)
            return states[s.lower()]
        return self._convert(section, key, conv, "a boolean")

    def enum(self, section, key, parse):
        return parse(self._convert(section, key, parse, "one of the documented names"))

    def str(self, section, key):
        return self._convert(section, key, str, "a string")


def _require_positive(name, value):
    if value is not None and not value > 0:
        raise ValidationError(f"{name} must be positive, got {value!r}")


def _build(reader: _Reader) -> RunConfig:
    wavelength = reader.float("scenario", "wavelength")
    if wavelength is None:
        raise ValidationError("[scenario] wavelength is required")
    _require_positive("wavelength", wavelength)
    screen = reader.float("scenario", "screen")
    _require_positive("screen", screen)

    n_slits = reader.int("grating", "n_slits")
    width = reader.float("grating", "slit_width")
    pitch = reader.float("grating", "pitch")
    _require_positive("n_slits", n_slits)
    _require_positive("slit_width", width)
    _require_positive("pitch", pitch)
    if not pitch > width:
        raise ValidationError(f"pitch d = {pitch!r} must exceed the slit width {width!r}")

    kind = reader.enum("scenario", "kind", ScenarioKind.parse)
    if kind is ScenarioKind.POLARIZERS and n_slits != 2:
        raise ValidationError("the orthogonal-polarizer scenario requires n_slits = 2")
    near_zone = reader.float("scenario", "near_zone")
    _require_positive("near_zone", near_zone)

    hist_min = reader.float("ensemble", "hist_min")
    hist_max = reader.float("ensemble", "hist_max")
    bin_width = reader.float("ensemble", "bin_width")
    _require_positive("bin_width", bin_width)
    if not hist_max > hist_min:
        raise ValidationError("hist_max must exceed hist_min")
    edge_margin = reader.float("ensemble", "edge_margin")
    if edge_margin is not None and edge_margin < 0:
        raise ValidationError("edge_margin must be non-negative")
    seed = reader.int("ensemble", "seed")
    if not 0 <= seed < 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer")

    step = reader.float("integrator", "step")
    y0 = reader.float("integrator", "y0")
    _require_positive("step", step)
    _require_positive("y0", y0)
    max_steps = reader.int("integrator", "max_steps")
    _require_positive("max_steps", max_steps)
    if y0 is not None and not screen > y0:
        raise ValidationError("screen must exceed the start height y0")

    formats = tuple(f.strip().lower() for f in reader.str("output", "formats").split(",")
                    if f.strip())
    bad = [f for f in formats if f not in _FORMATS]
    if bad or not formats:
        raise ValidationError(f"[output] formats must be drawn from {_FORMATS}, got {formats!r}")
    x_range = (reader.float("output", "x_min"), reader.float("output", "x_max"))
    y_range = (reader.float("output", "y_min"), reader.float("output", "y_max"))
    nx, ny = reader.int("output", "nx"), reader.int("output", "ny")
    if not x_range[1] > x_range[0] or not y_range[1] > y_range[0]:
        raise ValidationError("field-map ranges must be increasing")
    _require_positive("y_min", y_range[0])
    if nx < 1 or ny < 1:
        raise ValidationError("nx and ny must be >= 1")

    try:
        grating = GratingSpec(n_slits, width, pitch)
        pol = PolarizationSpec.from_degrees(reader.float("polarization", "alpha"),
                                            reader.float("polarization", "beta"),
                                            reader.float("polarization", "phi_degrees"))
        ensemble = EnsembleSpec(
            n_per_slit=reader.int("ensemble", "n_per_slit"), screen=screen,
            sampling=reader.enum("ensemble", "sampling", Sampling.parse), seed=seed,
            bin_width=bin_width, hist_range=(hist_min, hist_max), edge_margin=edge_margin,
            z0=reader.float("ensemble", "z0"))
        integrator = IntegratorConfig(
            step=step, growth=reader.float("integrator", "growth"), y0=y0, max_steps=max_steps,
            max_halvings=reader.int("integrator", "max_halvings"),
            record_every=reader.int("integrator", "record_every"),
            block_size=reader.int("integrator", "block_size"))
    except InvalidSpec as exc:
        raise ValidationError(str(exc)) from None

    output = OutputSpec(Path(reader.str("output", "directory")), formats,
                        reader.bool("output", "gnuplot"), x_range, nx, y_range, ny)
    return RunConfig(wavelength, grating, pol, kind, screen, ensemble, integrator,
                     backend=reader.enum("scenario", "backend", PropagatorVariant.parse),
                     swap_polarizers=reader.bool("scenario", "swap_polarizers"),
                     near_zone=near_zone, output=output)


def parse_config_text(text: str) -> RunConfig:
    """Parse configuration text; see the module docstring for the keys.

    Raises
    ------
    ParseError
        Malformed text, unknown sections or keys, unconvertible values; the
        message carries the line number.
    ValidationError
        A value violates a documented invariant.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key outside any section", exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line", lineno) from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ParseError(exc.message.split(": ", 1)[-1], exc.lineno) from None
    lines = _key_lines(text)
    for section in parser.sections():
        name = section
        if name not in DEFAULTS:
            raise ParseError(f"unknown section [{section}]", lines.get((name, "")))
        for key in parser.options(section):
            if key not in DEFAULTS[name]:
                raise ParseError(f"unknown key {key!r} in [{section}]", lines.get((name, key)))
    return _build(_Reader(parser, lines))


def parse_config(path) -> RunConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config_text(text)
