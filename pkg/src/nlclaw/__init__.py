"""Finite-volume solver for a conservation law whose flux is steered by the
prefix integral of the solution, with monitors for the bounds the scheme is
supposed to obey.
"""

from .constraint import (ReconstructedState, RegimeReport, RegimeRow,
                         RegionMap, classify_regions, reconstruct,
                         regime_equation_residual, write_region_csv)
from .diagnostics import (DependenceReport, DependenceTerms, MonitorEntry,
                          MonitorReport, StabilityRecord,
                          all_pairs_dependence_residual, bounds_monitor,
                          continuous_dependence_check, dependence_terms,
                          stability_experiment, stability_growth_bound,
                          stability_report)
from .errors import (CflError, ConfigError, MonitorViolation, NlclawError,
                     ResolutionError, SolverError, ValidationError)
from .frozen import (FrozenCoefficient, StepParameters, admissible_dt,
                     build_coefficient, constant_coefficient,
                     discrete_entropy_residual, evolve, numerical_flux, step)
from .mesh import (DiscreteField, Mesh, field_from_samples, inject_to_finer,
                   l1_distance, l1_distance_nested, l1_norm, linf_norm,
                   prefix_integral, read_field_csv, support_bounds,
                   total_variation, write_field_csv)
from .model import (ConstraintFunction, FluxModel, Profile, Scenario,
                    ValidationReport, Violation, box_profile, bump_profile,
                    burgers_flux, cubic_flux, flux_from_callables,
                    generic_constraint, linear_flux, make_truncation_g,
                    polynomial_flux, reachable_velocity_bound,
                    required_margin, step_profile, sum_profile,
                    validate_scenario)
from .stepper import (DIAGNOSTIC_COLUMNS, ConvergenceRow, ConvergenceTable,
                      SplittingParameters, StepDiagnostics, Trajectory,
                      default_entropy_levels, export_trajectory, refine_delta,
                      solve, tv_growth_constant)

__version__ = "0.1.0"

__all__ = [
    "CflError", "ConfigError", "ConstraintFunction", "ConvergenceRow",
    "ConvergenceTable", "DIAGNOSTIC_COLUMNS", "DependenceReport",
    "DependenceTerms", "DiscreteField", "FluxModel", "FrozenCoefficient",
    "Mesh", "MonitorEntry", "MonitorReport", "MonitorViolation",
    "NlclawError", "Profile", "ReconstructedState", "RegimeReport",
    "RegimeRow", "RegionMap", "ResolutionError", "Scenario", "SolverError",
    "SplittingParameters", "StabilityRecord", "StepDiagnostics",
    "StepParameters", "Trajectory", "ValidationError", "ValidationReport",
    "Violation", "admissible_dt", "all_pairs_dependence_residual",
    "bounds_monitor", "box_profile", "build_coefficient", "bump_profile",
    "burgers_flux", "classify_regions", "constant_coefficient",
    "continuous_dependence_check", "cubic_flux", "default_entropy_levels",
    "dependence_terms", "discrete_entropy_residual", "evolve",
    "export_trajectory", "field_from_samples", "flux_from_callables",
    "generic_constraint", "inject_to_finer", "l1_distance",
    "l1_distance_nested", "l1_norm", "linear_flux", "linf_norm",
    "make_truncation_g", "numerical_flux", "polynomial_flux",
    "prefix_integral", "reachable_velocity_bound", "read_field_csv",
    "reconstruct", "refine_delta", "regime_equation_residual",
    "required_margin", "solve", "stability_experiment",
    "stability_growth_bound", "stability_report", "step", "step_profile",
    "sum_profile", "support_bounds", "total_variation", "tv_growth_constant",
    "validate_scenario", "write_field_csv", "write_region_csv",
]
