# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

r"""
Inverse iteration for the smallest eigenvalue of $A x = \lambda M x$ with lumped
(diagonal) $M$.

Two ways of restricting the problem to a subspace are offered:

- projected mode: linear constraints $C^\top x = 0$, enforced by projecting every CG
  step; the eigen equation then reads $Q(Ax - \lambda Mx) = 0$.
- invariant mode: a projection onto an $A$-invariant subspace (e.g. divergence-free
  fields) applied after each solve with the shifted operator $A + sM$.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp
from tqdm.auto import tqdm

from hhx.helmholtz.krylov import (
    SolverConfig,
    SolverConvergenceError,
    diagonal_preconditioner,
    pcg,
)
from hhx.utils.hhxutils import dot
from hhx.utils.typechecks import is_nonnegative_int, is_positive_int

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigenConfig:
    """Settings of the eigenvalue iteration.

    Attributes:
        solver: Settings of the inner linear solves.
        eig_tol: Relative eigen residual at which the iteration stops.
        max_outer: Cap on outer iterations.
        seed: Seed of the random start vector.
        shift_fraction: Shift $s$ of invariant mode as a fraction of $(\\pi / d)^2$.
        show_progress_bars: Whether to show a progress bar over outer iterations.
    """

    solver: SolverConfig = field(default_factory=SolverConfig)
    eig_tol: float = 1e-6
    max_outer: int = 300
    seed: int = 0
    shift_fraction: float = 0.1
    show_progress_bars: bool = False

    def __post_init__(self):
        if not (0.0 < self.eig_tol < 1.0):
            raise ValueError(f"eig_tol must lie in (0, 1), got {self.eig_tol}.")
        if not is_positive_int(self.max_outer):
            raise ValueError(f"max_outer must be positive, got {self.max_outer}.")
        if not is_nonnegative_int(self.seed):
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}.")
        if not (0.0 < self.shift_fraction < 1.0):
            raise ValueError(
                f"shift_fraction must lie in (0, 1), got {self.shift_fraction}."
            )

    def to_dict(self) -> dict:
        return dict(
            solver=self.solver.to_dict(),
            eig_tol=self.eig_tol,
            max_outer=self.max_outer,
            seed=self.seed,
            shift_fraction=self.shift_fraction,
        )


@dataclass
class EigenResult:
    eigenvalue: float
    eigenvector: np.ndarray
    iterations: int
    eigen_residual: float
    constraint_residual: float
    history: List[float]


def _constraint_projector(constraints: Optional[np.ndarray]):
    if constraints is None:
        return None, None
    C = np.asarray(constraints, dtype=np.float64)
    if C.ndim == 1:
        C = C[:, None]
    basis, _ = np.linalg.qr(C)

    def project(v: np.ndarray) -> np.ndarray:
        return v - basis @ (basis.T @ v)

    return project, C


def inverse_iteration(
    A: sp.spmatrix,
    M: np.ndarray,
    config: Optional[EigenConfig] = None,
    constraints: Optional[np.ndarray] = None,
    projection: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    constraint_residual: Optional[Callable[[np.ndarray], float]] = None,
    shift: float = 0.0,
    name: str = "eigen",
) -> EigenResult:
    r"""
    Return the smallest eigenpair of $A x = \lambda M x$ on a subspace.

    Args:
        A: Symmetric positive semi-definite stiffness matrix.
        M: Positive diagonal of the lumped mass matrix.
        config: Iteration settings.
        constraints: Columns $c$ of the constraints $c^\top x = 0$ (projected mode).
        projection: Projection onto an invariant subspace, applied after each solve
            (invariant mode).
        constraint_residual: Relative violation of the subspace by a vector; defaults
            to $\|C^\top x\| / (\|C\| \|x\|)$ in projected mode.
        shift: Shift $s$ of the solves with $A + sM$.
        name: Label for log messages and errors.

    Raises:
        SolverConvergenceError: If the eigen residual misses `config.eig_tol` within
            `config.max_outer` iterations, or an inner solve fails.
    """
    config = EigenConfig() if config is None else config
    det = config.solver.deterministic
    M = np.asarray(M, dtype=np.float64)
    n = A.shape[0]
    Q, C = _constraint_projector(constraints)
    P = (lambda v: v) if Q is None else Q
    restrict = (lambda v: v) if projection is None else projection

    if constraint_residual is None and C is not None:

        def constraint_residual(v):
            scale = np.linalg.norm(C) * np.linalg.norm(v)
            return float(np.linalg.norm(C.T @ v) / scale) if scale > 0 else 0.0

    B = (A + shift * sp.diags(M)).tocsr() if shift else A
    preconditioner = diagonal_preconditioner(B)

    def m_normalize(v):
        return v / np.sqrt(dot(v, M * v, det))

    def rayleigh(v):
        return dot(v, A @ v, det) / dot(v, M * v, det)

    rng = np.random.default_rng(config.seed)
    x = m_normalize(restrict(P(rng.standard_normal(n))))
    eigenvalue = rayleigh(x)
    history = [eigenvalue]
    residual = np.inf

    progress = tqdm(
        range(1, config.max_outer + 1),
        disable=not config.show_progress_bars,
        desc=f"Inverse iteration ({name})",
    )
    iteration = 0
    for iteration in progress:
        y, _ = pcg(
            B,
            M * x,
            config.solver,
            x0=x / (eigenvalue + shift),
            preconditioner=preconditioner,
            projector=Q,
            name=f"{name} inner solve",
        )
        x = m_normalize(restrict(P(y)))
        eigenvalue = rayleigh(x)
        history.append(eigenvalue)
        Mx = M * x
        r = P(A @ x - eigenvalue * Mx)
        residual = float(np.linalg.norm(r) / (abs(eigenvalue) * np.linalg.norm(P(Mx))))
        logger.debug("%s: lambda %.10g, residual %.3e", name, eigenvalue, residual)
        if residual <= config.eig_tol:
            break
    else:
        raise SolverConvergenceError(
            f"{name}: eigen residual {residual:.3e} > {config.eig_tol:.1e} after "
            f"{config.max_outer} iterations.",
            history,
            config.max_outer,
        )

    violation = 0.0 if constraint_residual is None else constraint_residual(x)
    logger.info(
        "%s: lambda = %.10g after %d iterations (residual %.2e).",
        name,
        eigenvalue,
        iteration,
        residual,
    )
    return EigenResult(
        eigenvalue=float(eigenvalue),
        eigenvector=x,
        iterations=iteration,
        eigen_residual=residual,
        constraint_residual=float(violation),
        history=history,
    )
