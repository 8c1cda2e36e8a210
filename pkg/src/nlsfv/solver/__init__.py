"""Time stepping: nonlinear coefficient, step systems, Picard loop, GMRES."""

from .krylov import GMRESResult, gmres
from .scheme import (
    SchemeConfig,
    SimulationResult,
    SparseComplexSystem,
    StepOperator,
    StepResult,
    assemble_step_system,
    flux_matrix,
    gmres_solve,
    nonlinear_coefficient,
    picard_step,
    run_simulation,
    sample_initial_condition,
    time_grid,
)

__all__ = [
    "GMRESResult",
    "gmres",
    "SchemeConfig",
    "SimulationResult",
    "SparseComplexSystem",
    "StepOperator",
    "StepResult",
    "assemble_step_system",
    "flux_matrix",
    "gmres_solve",
    "nonlinear_coefficient",
    "picard_step",
    "run_simulation",
    "sample_initial_condition",
    "time_grid",
]
