"""Closed-form local models and the singular-ODE contraction solvers."""
from .closed_forms import (
    ModelSpec,
    OffVariety,
    ZeroCoordinate,
    extended_coordinates,
    invariants_of_model,
    lipschitz_probe,
    phi_pair,
    second_difference_probe,
    section_coordinates,
)
from .picard import (
    ContractionFailure,
    EigenvalueViolation,
    PicardSolution,
    SingularODEProblem,
    beta_continuity_probe,
    expected_initial_slope,
    matrix_power_eig,
    measured_c2,
    no_extra_solutions_probe,
    picard_solve,
)

__all__ = [
    "ModelSpec", "OffVariety", "ZeroCoordinate", "extended_coordinates",
    "invariants_of_model", "lipschitz_probe", "phi_pair",
    "second_difference_probe", "section_coordinates",
    "ContractionFailure", "EigenvalueViolation", "PicardSolution",
    "SingularODEProblem", "beta_continuity_probe", "expected_initial_slope",
    "matrix_power_eig", "measured_c2", "no_extra_solutions_probe",
    "picard_solve",
]
