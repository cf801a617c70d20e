"""Energy-stable SAV pressure-correction solvers for 2D incompressible
Navier-Stokes on a staggered (MAC) grid."""

from .grid import CellField, Grid, ShapeMismatchError, VelocityField, unit_square
from .harness import (
    ConfigError,
    ConvergenceRow,
    EnergyTrace,
    ErrorReport,
    InvariantViolation,
    RunConfig,
    convergence_study,
    rates,
    run_simulation,
    stability_study,
)
from .linsolve import (
    IncompatibleRhsError,
    SolveFailure,
    SolveReport,
    Tolerances,
    solve_helmholtz,
    solve_poisson_neumann,
)
from .operators import (
    convect,
    divergence,
    gradient,
    inner,
    inner_cell,
    laplacian_dirichlet,
    norm_h1_semi,
    norm_l2,
    norm_l2_cell,
)
from .schemes import (
    MissingHistoryError,
    NoRealRootError,
    Scheme,
    SchemeParams,
    SingularScalarError,
    SolverState,
    StepDiagnostics,
    initial_state,
    modified_energy1,
    modified_energy2,
    project,
    solve_sav_scalar,
    solve_sav_scalar_bdf2,
    step,
    step_scheme1,
    step_scheme2,
    step_scheme3,
)

__version__ = "0.1.0"
