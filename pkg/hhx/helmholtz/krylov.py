# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
import scipy.sparse as sp

from hhx.utils.hhxutils import dot
from hhx.utils.typechecks import is_positive_int

logger = logging.getLogger(__name__)


class SolverConvergenceError(RuntimeError):
    """Raised when an iteration misses its tolerance.

    Attributes:
        residual_history: Relative residuals, one per iteration.
        iterations: Iterations performed.
    """

    def __init__(self, message: str, residual_history: List[float], iterations: int):
        super().__init__(message)
        self.residual_history = list(residual_history)
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    """Settings shared by all linear solves.

    Attributes:
        rtol: Relative residual accepted from a solve.
        max_iterations: Iteration cap per solve.
        deterministic: Exactly rounded inner products, independent of summation order.
        inner_factor: Solves aim for `rtol * inner_factor` and accept `rtol`.
    """

    rtol: float = 1e-10
    max_iterations: int = 5000
    deterministic: bool = False
    inner_factor: float = 1e-2

    def __post_init__(self):
        if not (0.0 < self.rtol <= 1e-2):
            raise ValueError(f"rtol must lie in (0, 1e-2], got {self.rtol}.")
        if not is_positive_int(self.max_iterations):
            raise ValueError(
                f"max_iterations must be a positive integer, got {self.max_iterations}."
            )
        if not (0.0 < self.inner_factor <= 1.0):
            raise ValueError(
                f"inner_factor must lie in (0, 1], got {self.inner_factor}."
            )

    @property
    def target(self) -> float:
        return self.rtol * self.inner_factor

    def to_dict(self) -> dict:
        return dict(
            rtol=self.rtol,
            max_iterations=self.max_iterations,
            deterministic=self.deterministic,
            inner_factor=self.inner_factor,
        )


@dataclass
class SolveInfo:
    iterations: int = 0
    residual: float = 0.0
    residual_history: List[float] = field(default_factory=list)


def diagonal_preconditioner(A: sp.spmatrix) -> np.ndarray:
    """Inverse diagonal of `A`, with 1 where the diagonal vanishes."""
    diagonal = np.asarray(A.diagonal(), dtype=np.float64)
    safe = np.where(np.abs(diagonal) > 0, diagonal, 1.0)
    return 1.0 / safe


def _identity(x: np.ndarray) -> np.ndarray:
    return x


def pcg(
    A,
    b: np.ndarray,
    config: Optional[SolverConfig] = None,
    x0: Optional[np.ndarray] = None,
    preconditioner: Optional[np.ndarray] = None,
    projector: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    tol: Optional[float] = None,
    scale: Optional[float] = None,
    name: str = "pcg",
):
    r"""
    Preconditioned conjugate gradients for symmetric positive (semi-)definite `A`.

    Singular systems are solved when they are consistent. With `projector`, every
    residual and search direction is projected, so that iterates stay in the subspace
    where `A` is definite (e.g. zero-mean vectors for Neumann problems).

    Args:
        A: Sparse matrix or anything with `@`.
        b: Right hand side.
        config: Solver settings.
        x0: Start vector.
        preconditioner: Inverse diagonal applied to residuals.
        projector: Projection onto the solution subspace.
        tol: Target relative residual; defaults to `config.target`.
        scale: Reference size of the residual when it exceeds `|b|`, e.g. the size
            of the data `b` was assembled from. A right hand side that is round-off
            of that data is then solved by zero.
        name: Label for log messages and errors.

    Returns:
        Solution and `SolveInfo`.

    Raises:
        SolverConvergenceError: If the true relative residual misses `config.rtol`.
    """
    config = SolverConfig() if config is None else config
    target = config.target if tol is None else tol
    accept = max(config.rtol, target)
    P = _identity if projector is None else projector
    M = np.ones_like(b) if preconditioner is None else preconditioner
    det = config.deterministic

    def norm(v):
        return float(np.sqrt(max(dot(v, v, det), 0.0)))

    b = P(np.asarray(b, dtype=np.float64))
    b_norm = norm(b)
    if scale is not None:
        b_norm = max(b_norm, float(scale))
    info = SolveInfo()
    if b_norm == 0.0:
        return np.zeros_like(b), info

    x = np.zeros_like(b) if x0 is None else P(np.array(x0, dtype=np.float64))
    r = P(b - A @ x)
    z = P(M * r)
    p = z.copy()
    rz = dot(r, z, det)
    history = [norm(r) / b_norm]
    best, since_best, restarts = history[0], 0, 0
    iteration = 0

    while history[-1] > target and iteration < config.max_iterations:
        iteration += 1
        Ap = A @ p
        pAp = dot(p, Ap, det)
        if pAp <= 0.0:
            logger.debug("%s: breakdown, pAp=%g at step %d.", name, pAp, iteration)
            break
        alpha = rz / pAp
        x += alpha * p
        r = P(r - alpha * Ap)
        residual = norm(r) / b_norm
        history.append(residual)

        if residual <= target:
            # The recursive residual drifts; confirm with the true one.
            r = P(b - A @ x)
            residual = norm(r) / b_norm
            history[-1] = residual
            if residual <= target or restarts >= 3:
                break
            restarts += 1
            z = P(M * r)
            p = z.copy()
            rz = dot(r, z, det)
            continue

        if residual < 0.5 * best:
            best, since_best = residual, 0
        else:
            since_best += 1
        if since_best > max(200, config.max_iterations // 10):
            logger.debug("%s: stagnated at %g after %d.", name, residual, iteration)
            break

        z = P(M * r)
        rz_new = dot(r, z, det)
        p = z + (rz_new / rz) * p
        rz = rz_new

    true_residual = norm(P(b - A @ x)) / b_norm
    info.iterations = iteration
    info.residual = true_residual
    info.residual_history = history
    if true_residual > accept:
        raise SolverConvergenceError(
            f"{name} did not converge: relative residual {true_residual:.3e} > "
            f"{accept:.1e} after {iteration} iterations.",
            history,
            iteration,
        )
    logger.debug("%s: residual %.3e in %d iterations.", name, true_residual, iteration)
    return x, info
