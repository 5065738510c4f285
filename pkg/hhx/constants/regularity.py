# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Literal, Sequence, Tuple

import numpy as np

from hhx.domain.voxel import VoxelDomain
from hhx.grid_calculus.grid import Kind, staggered_grid

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-10


@dataclass(frozen=True)
class AnalyticField:
    r"""
    Vector field with closed-form derivatives.

    Attributes:
        value: `value(x1, x2, x3)` returns the three components.
        jacobian: `jacobian(x1, x2, x3)[i][j]` is $\partial_j \varphi_i$ (0-based).
        trace: The trace that vanishes on the boundary, `tangential` or `normal`.
        name: Label for reports.
    """

    value: Callable
    jacobian: Callable
    trace: Literal["tangential", "normal"] = "tangential"
    name: str = "field"


@dataclass
class RegularityCheck:
    r"""
    Squared norms $\|\nabla\varphi\|^2$, $\|\mathrm{div}\,\varphi\|^2$,
    $\|\mathrm{rot}\,\varphi\|^2$ with quadrature error bars.

    `margin` is $\|\mathrm{div}\,\varphi\|^2 + \|\mathrm{rot}\,\varphi\|^2 -
    \|\nabla\varphi\|^2$; the inequality holds if it is at least minus the error bar.
    """

    grad_sq: float
    div_sq: float
    rot_sq: float
    errors: Dict[str, float]
    margin: float
    holds: bool

    def to_dict(self) -> dict:
        return dict(
            grad_sq=self.grad_sq,
            div_sq=self.div_sq,
            rot_sq=self.rot_sq,
            errors=self.errors,
            margin=self.margin,
            holds=self.holds,
        )


@dataclass
class SplitBoundCheck:
    r"""$\|\varphi\|^2$ against $c_f^2 \|\mathrm{div}\,\varphi\|^2 + \max_i
    c_{pw,i}^2 \|\mathrm{rot}\,\varphi\|^2$."""

    lhs: float
    rhs: float
    error: float
    holds: bool


def _cell_points(domain: VoxelDomain, order: int):
    """Gauss-Legendre points and weights of all occupied cells."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes, weights = 0.5 * (nodes + 1.0), 0.5 * weights
    h = domain.h
    corners = np.argwhere(domain.mask) * h
    q = np.stack(np.meshgrid(nodes, nodes, nodes, indexing="ij"), axis=-1)
    q = q.reshape(-1, 3)
    w = np.einsum("i,j,k->ijk", weights, weights, weights).ravel()
    points = corners[:, None, :] + h * q[None, :, :]
    return points.reshape(-1, 3), np.tile(w * h ** 3, len(corners))


def _integrands(field: AnalyticField, points: np.ndarray) -> Dict[str, np.ndarray]:
    x1, x2, x3 = points.T
    value = np.stack([np.broadcast_to(v, x1.shape) for v in field.value(x1, x2, x3)])
    J = np.array(
        [
            [np.broadcast_to(entry, x1.shape) for entry in row]
            for row in field.jacobian(x1, x2, x3)
        ]
    )
    curl = np.stack([J[2, 1] - J[1, 2], J[0, 2] - J[2, 0], J[1, 0] - J[0, 1]])
    return dict(
        value_sq=(value ** 2).sum(axis=0),
        grad_sq=(J ** 2).sum(axis=(0, 1)),
        div_sq=(J[0, 0] + J[1, 1] + J[2, 2]) ** 2,
        rot_sq=(curl ** 2).sum(axis=0),
    )


def _integrate(field: AnalyticField, domain: VoxelDomain, order: int) -> dict:
    points, weights = _cell_points(domain, order)
    return {k: float(weights @ v) for k, v in _integrands(field, points).items()}


def _quadrature(field: AnalyticField, domain: VoxelDomain, orders: Sequence[int]):
    low, high = (_integrate(field, domain, order) for order in orders)
    errors = {k: abs(high[k] - low[k]) for k in high}
    return high, errors


def check_trace(field: AnalyticField, domain: VoxelDomain, tol: float = TRACE_TOL):
    """Check the vanishing trace on every boundary face of the voxel domain.

    Raises:
        ValueError: Naming the first face on which the trace does not vanish.
    """
    if field.trace not in ("tangential", "normal"):
        raise ValueError(f"trace must be tangential or normal, got {field.trace!r}.")
    grid = staggered_grid(domain)
    count, _ = grid.counts(Kind.FACE)
    boundary = grid.split(Kind.FACE, count == 1)
    nodes, _ = np.polynomial.legendre.leggauss(3)
    nodes = 0.5 * (nodes + 1.0)
    h = domain.h
    scale = 1.0
    for a, faces in enumerate(boundary):
        index = np.argwhere(faces)
        if len(index) == 0:
            continue
        others = [b for b in range(3) if b != a]
        s, t = np.meshgrid(nodes, nodes, indexing="ij")
        points = np.repeat(index[:, None, :] * h, s.size, axis=1).astype(float)
        points[:, :, others[0]] += h * s.ravel()
        points[:, :, others[1]] += h * t.ravel()
        flat = points.reshape(-1, 3)
        value = np.stack(
            [np.broadcast_to(v, flat.shape[:1]) for v in field.value(*flat.T)]
        )
        scale = max(scale, float(np.abs(value).max()))
        checked = others if field.trace == "tangential" else [a]
        trace = np.abs(value[checked]).max(axis=0).reshape(len(index), -1).max(axis=1)
        worst = int(np.argmax(trace))
        if trace[worst] > tol * scale:
            position = index[worst] * h
            raise ValueError(
                f"{field.trace} trace of {field.name} does not vanish on the boundary "
                f"face x{a + 1}={position[a]:.6g} at cell corner "
                f"{tuple(round(float(p), 6) for p in position)} "
                f"(|trace| = {trace[worst]:.3e})."
            )


def check_regularity(
    field: AnalyticField, domain: VoxelDomain, orders: Tuple[int, int] = (2, 3)
) -> RegularityCheck:
    r"""
    Evaluate $\|\nabla\varphi\|^2 \le \|\mathrm{div}\,\varphi\|^2 +
    \|\mathrm{rot}\,\varphi\|^2$ by Gauss-Legendre quadrature on the occupied cells.

    The error bars are the differences between the two quadrature orders.

    Raises:
        ValueError: If the domain is not flagged convex or the trace does not vanish.
    """
    if not domain.convex:
        raise ValueError("The regularity estimate needs a convex domain.")
    check_trace(field, domain)
    values, errors = _quadrature(field, domain, orders)
    margin = values["div_sq"] + values["rot_sq"] - values["grad_sq"]
    slack = errors["div_sq"] + errors["rot_sq"] + errors["grad_sq"]
    scale = max(values["grad_sq"], 1.0)
    holds = margin >= -(slack + 1e-12 * scale)
    logger.info(
        "Regularity of %s: |grad|^2 %.6g, |div|^2 %.6g, |rot|^2 %.6g.",
        field.name,
        values["grad_sq"],
        values["div_sq"],
        values["rot_sq"],
    )
    return RegularityCheck(
        grad_sq=values["grad_sq"],
        div_sq=values["div_sq"],
        rot_sq=values["rot_sq"],
        errors={k: errors[k] for k in ("grad_sq", "div_sq", "rot_sq")},
        margin=margin,
        holds=bool(holds),
    )


def check_split_bound(
    field: AnalyticField,
    domain: VoxelDomain,
    c_f: float,
    c_pw: Sequence[float],
    orders: Tuple[int, int] = (2, 3),
) -> SplitBoundCheck:
    r"""
    Evaluate $\|\varphi\|^2 \le c_f^2 \|\mathrm{div}\,\varphi\|^2 + \max_i c_{pw,i}^2
    \|\mathrm{rot}\,\varphi\|^2$ for a field with vanishing tangential trace.
    """
    if field.trace != "tangential":
        raise ValueError("The split bound needs a vanishing tangential trace.")
    check_trace(field, domain)
    values, errors = _quadrature(field, domain, orders)
    c_rot = max(c_pw)
    lhs = values["value_sq"]
    rhs = c_f ** 2 * values["div_sq"] + c_rot ** 2 * values["rot_sq"]
    error = (
        errors["value_sq"]
        + c_f ** 2 * errors["div_sq"]
        + c_rot ** 2 * errors["rot_sq"]
    )
    return SplitBoundCheck(lhs, rhs, error, holds=bool(lhs <= rhs + error))
