"""Finite-difference solver for inductionless quasi-MHD thermocapillary convection."""

from .boundary import CaseKind, apply_all_bc, apply_temperature_bc, apply_velocity_bc, pressure_bc_data
from .config import PRESETS, CaseConfig, ConfigError, get_preset, list_presets, parse_config
from .fields import (
    DimensionalInputs,
    FieldVariant,
    FlowState,
    Geometry,
    Grid,
    PhysParams,
    ScalarField,
    VectorField,
    apply_initial_conditions,
    dimensionless_groups,
    effective_tau,
    make_grid,
)
from .integrator import BlowUpError, SteadyResult, run_to_steady, steady_residual, step
from .poisson import NeumannData, PoissonReport, residual_norm, solve_poisson
from .postprocess import PsiField, count_vortices, export_fields, psi_extremum, stream_function

__version__ = "0.1.0"

__all__ = [
    "CaseKind", "apply_all_bc", "apply_temperature_bc", "apply_velocity_bc", "pressure_bc_data",
    "PRESETS", "CaseConfig", "ConfigError", "get_preset", "list_presets", "parse_config",
    "DimensionalInputs", "FieldVariant", "FlowState", "Geometry", "Grid", "PhysParams", "ScalarField",
    "VectorField", "apply_initial_conditions", "dimensionless_groups", "effective_tau", "make_grid",
    "BlowUpError", "SteadyResult", "run_to_steady", "steady_residual", "step",
    "NeumannData", "PoissonReport", "residual_norm", "solve_poisson",
    "PsiField", "count_vortices", "export_fields", "psi_extremum", "stream_function",
]
