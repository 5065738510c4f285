from hhx.helmholtz.krylov import (
    SolveInfo,
    SolverConfig,
    SolverConvergenceError,
    diagonal_preconditioner,
    pcg,
)
from hhx.helmholtz.projections import (
    DecompositionResult,
    GlobalZeroMean,
    VectorPotentialResult,
    decompose3,
    global_zero_mean_check,
    project_gradient,
    rotational_projection,
    scalar_flavor,
    vector_potential,
)
