"""Electromagnetic energy flow lines behind slit gratings for polarized light."""

from .config import RunConfig, parse_config, parse_config_text
from .emfield import assemble_free, assemble_polarized, poynting_free, poynting_polarized
from .ensemble import (EnsembleSpec, Sampling, histogram_arrivals, run_ensemble, sample_initials,
                       visibility)
from .flowlines import (IntegratorConfig, Scenario, ScenarioKind, Termination, Trajectory,
                        integrate, integrate_batch)
from .gratingfield import (FieldSample, GratingSpec, PropagatorVariant, field_grid, propagate,
                           slit_coefficient, slit_field, slit_fields, spectrum_c2, spectrum_cN)
from .polarization import PolarizationSpec, classify

__version__ = "0.1.0"

__all__ = [
    "RunConfig", "parse_config", "parse_config_text",
    "assemble_free", "assemble_polarized", "poynting_free", "poynting_polarized",
    "EnsembleSpec", "Sampling", "histogram_arrivals", "run_ensemble", "sample_initials",
    "visibility",
    "IntegratorConfig", "Scenario", "ScenarioKind", "Termination", "Trajectory", "integrate",
    "integrate_batch",
    "FieldSample", "GratingSpec", "PropagatorVariant", "field_grid", "propagate",
    "slit_coefficient", "slit_field", "slit_fields", "spectrum_c2", "spectrum_cN",
    "PolarizationSpec", "classify",
]
