# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

r"""
Grid estimates of the constants in

- Poincaré: $\|u\| \le c_p \|\nabla u\|$ for $u \in H^1 \cap L^2_0$,
- Friedrichs: $\|u\| \le c_f \|\nabla u\|$ for $u \in \mathring{H}^1$,
- Maxwell: $\|\varphi\| \le c_{m,1} \|\mathrm{rot}\,\varphi\|$ on
  $\mathring{R} \cap D_0$ and $c_{m,2}$ on $R \cap \mathring{D}_0$,
- mixed: $\|\varphi\|^2 \le c^2 (\|\mathrm{div}\,\varphi\|^2 +
  \|\mathrm{rot}\,\varphi\|^2)$ with $c_{m,t}$ on $\mathring{R} \cap D$ and $c_{m,n}$
  on $R \cap \mathring{D}$,
- specialized Poincaré $c_{pw,i}$: functions with zero mean on every slab of a
  uniform decomposition along axis $i$.

Each constant is $1 / \sqrt{\lambda}$ with $\lambda$ the smallest eigenvalue of the
matching discrete problem. Values depend on `h` and are reported with it.
"""

import logging
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp

from hhx.constants.eigen import EigenConfig, EigenResult, inverse_iteration
from hhx.domain.diameters import diameter, projected_diameter
from hhx.domain.subdomains import uniform_decomposition
from hhx.domain.voxel import VoxelDomain
from hhx.grid_calculus.fields import EdgeField
from hhx.grid_calculus.grid import Flavor, Kind, staggered_grid
from hhx.grid_calculus.operators import div_dual, norm_l2
from hhx.helmholtz.projections import project_gradient
from hhx.types import Axis

logger = logging.getLogger(__name__)

_MAXWELL_NAMES = {Flavor.ESSENTIAL: "c_m1", Flavor.NATURAL: "c_m2"}
_MIXED_NAMES = {Flavor.ESSENTIAL: "c_mt", Flavor.NATURAL: "c_mn"}


@dataclass
class ConstantEstimate:
    """A constant estimated on one grid.

    Attributes:
        name: `c_p`, `c_f`, `c_m1`, `c_m2`, `c_mt`, `c_mn` or `c_pw1` .. `c_pw3`.
        value: $1 / \\sqrt{\\lambda}$.
        eigenvalue: Smallest eigenvalue $\\lambda$ of the discrete problem.
        h: Grid spacing of the estimate.
        bound: Analytic upper bound attached to the constant, if any.
        limit_bound: Limit of `bound` under refinement of the decomposition.
    """

    name: str
    value: float
    eigenvalue: float
    h: float
    iterations: int
    eigen_residual: float
    constraint_residual: float
    bound: Optional[float] = None
    limit_bound: Optional[float] = None
    axis: Optional[int] = None
    N: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"{self.name} must be positive, got {self.value}.")

    def to_dict(self) -> dict:
        return asdict(self)


def maxwell_flavor(flavor: Union[str, Flavor]) -> Flavor:
    """`tangential` (vanishing tangential trace) or `normal` to a flavor."""
    if isinstance(flavor, str):
        names = {"tangential": Flavor.ESSENTIAL, "normal": Flavor.NATURAL}
        if flavor.lower() not in names:
            raise ValueError(f"flavor must be tangential or normal, got {flavor!r}.")
        return names[flavor.lower()]
    return Flavor(flavor)


def _require_convex(domain: VoxelDomain, name: str):
    if not domain.convex:
        raise ValueError(
            f"{name} is only estimated on convex domains; the domain is not flagged "
            f"convex."
        )


def _estimate(
    name: str, domain: VoxelDomain, result: EigenResult, **kwargs
) -> ConstantEstimate:
    return ConstantEstimate(
        name=name,
        value=float(1.0 / np.sqrt(result.eigenvalue)),
        eigenvalue=result.eigenvalue,
        h=domain.h,
        iterations=result.iterations,
        eigen_residual=result.eigen_residual,
        constraint_residual=result.constraint_residual,
        **kwargs,
    )


def node_laplacian(domain: VoxelDomain, flavor: Flavor):
    r"""Stiffness $G^\top W_E G$ and lumped mass $W_N$ on the nodes of `flavor`."""
    grid = staggered_grid(domain)
    G = grid.operator(Kind.NODE, flavor)
    A = (G.T @ sp.diags(grid.dof_weights(Kind.EDGE, flavor)) @ G).tocsr()
    return A, grid.dof_weights(Kind.NODE, flavor)


def curl_curl(domain: VoxelDomain, flavor: Flavor):
    r"""Stiffness $C^\top W_F C$ and lumped mass $W_E$ on the edges of `flavor`."""
    grid = staggered_grid(domain)
    C = grid.operator(Kind.EDGE, flavor)
    A = (C.T @ sp.diags(grid.dof_weights(Kind.FACE, flavor)) @ C).tocsr()
    return A, grid.dof_weights(Kind.EDGE, flavor)


def estimate_poincare(
    domain: VoxelDomain, config: Optional[EigenConfig] = None
) -> ConstantEstimate:
    r"""
    Estimate $c_p$ from the smallest Neumann eigenvalue on zero-mean node functions.

    Raises:
        ValueError: If the domain is not flagged convex.
        SolverConvergenceError: If the iteration fails.
    """
    _require_convex(domain, "c_p")
    A, M = node_laplacian(domain, Flavor.NATURAL)
    result = inverse_iteration(A, M, config, constraints=M, name="c_p")
    return _estimate(
        "c_p", domain, result, bound=diameter(domain) / np.pi, N=1
    )


def estimate_friedrichs(
    domain: VoxelDomain, config: Optional[EigenConfig] = None
) -> ConstantEstimate:
    """Estimate $c_f$ from the smallest Dirichlet eigenvalue."""
    _require_convex(domain, "c_f")
    A, M = node_laplacian(domain, Flavor.ESSENTIAL)
    result = inverse_iteration(A, M, config, name="c_f")
    return _estimate("c_f", domain, result)


def _gradient_free(domain: VoxelDomain, flavor: Flavor, config: EigenConfig):
    """Projection of edge unknowns onto the complement of the gradients."""

    def project(x: np.ndarray) -> np.ndarray:
        field_ = EdgeField.from_dofs(domain, flavor, x)
        _, remainder = project_gradient(field_, flavor, config.solver)
        return remainder.dof_values()

    def residual(x: np.ndarray) -> float:
        field_ = EdgeField.from_dofs(domain, flavor, x)
        size = norm_l2(field_)
        return norm_l2(div_dual(field_)) * domain.h / size if size > 0 else 0.0

    return project, residual


def estimate_maxwell(
    domain: VoxelDomain,
    flavor: Union[str, Flavor] = "tangential",
    config: Optional[EigenConfig] = None,
) -> ConstantEstimate:
    r"""
    Estimate $c_{m,1}$ (`tangential`) or $c_{m,2}$ (`normal`).

    The smallest eigenvalue of $\mathrm{rot}^* \mathrm{rot}$ on divergence-free edge
    fields is found by shifted inverse iteration, re-projecting each iterate onto the
    complement of the gradients.

    Args:
        domain: Convex voxel domain.
        flavor: Boundary condition on the tangential trace (`tangential`, the space
            $\mathring{R} \cap D_0$) or on the normal trace (`normal`, the space
            $R \cap \mathring{D}_0$).
        config: Iteration settings.
    """
    flavor = maxwell_flavor(flavor)
    name = _MAXWELL_NAMES[flavor]
    _require_convex(domain, name)
    config = EigenConfig() if config is None else config
    A, M = curl_curl(domain, flavor)
    shift = config.shift_fraction * (np.pi / diameter(domain)) ** 2
    project, residual = _gradient_free(domain, flavor, config)
    result = inverse_iteration(
        A,
        M,
        config,
        projection=project,
        constraint_residual=residual,
        shift=shift,
        name=name,
    )
    return _estimate(name, domain, result, metadata=dict(shift=shift))


def estimate_mixed_maxwell(
    domain: VoxelDomain,
    flavor: Union[str, Flavor] = "tangential",
    config: Optional[EigenConfig] = None,
) -> ConstantEstimate:
    r"""
    Estimate $c_{m,t}$ (`tangential`) or $c_{m,n}$ (`normal`) from the form
    $\|\mathrm{div}\,\varphi\|^2 + \|\mathrm{rot}\,\varphi\|^2$ on all edge fields of
    the flavor.

    The divergence is the weighted adjoint `div_dual` into the node unknowns of the
    same flavor, so the stiffness $C^\top W_F C + W_E G W_N^{-1} G^\top W_E$ is
    definite and no constraint is needed.
    """
    flavor = maxwell_flavor(flavor)
    name = _MIXED_NAMES[flavor]
    _require_convex(domain, name)
    grid = staggered_grid(domain)
    A, M = curl_curl(domain, flavor)
    G = grid.operator(Kind.NODE, flavor)
    WE = sp.diags(M)
    grad_div = WE @ G @ sp.diags(1.0 / grid.dof_weights(Kind.NODE, flavor)) @ G.T @ WE
    result = inverse_iteration((A + grad_div).tocsr(), M, config, name=name)
    return _estimate(name, domain, result)


def estimate_specialized_poincare(
    domain: VoxelDomain,
    axis: Axis,
    N: int,
    config: Optional[EigenConfig] = None,
) -> ConstantEstimate:
    r"""
    Estimate $c_{pw,i}(N)$: the Poincaré constant for functions with zero mean on
    each of the `N` slabs of width $l_i / N$ along `axis`.

    The estimate is non-increasing in `N` for nested decompositions and comes with
    the bound $\sqrt{d_{jk}^2 + l_i^2 / N^2} / \pi$ and its limit $d_{jk} / \pi$.
    `N = 1` reproduces `estimate_poincare`.
    """
    name = f"c_pw{axis}"
    _require_convex(domain, name)
    plane = tuple(a for a in (1, 2, 3) if a != axis)
    decomposition = uniform_decomposition(
        domain, axis, N, projected=projected_diameter(domain, plane)
    )
    grid = staggered_grid(domain)
    A, M = node_laplacian(domain, Flavor.NATURAL)
    nodes = grid.dofs(Kind.NODE, Flavor.NATURAL)
    constraints = np.stack(
        [grid.weights(Kind.NODE, s.cell_mask)[nodes] for s in decomposition.slabs],
        axis=1,
    )
    if not np.allclose(constraints.sum(axis=1), M):
        raise RuntimeError("Slab weights must add up to W_N.")
    result = inverse_iteration(A, M, config, constraints=constraints, name=name)
    return _estimate(
        name,
        domain,
        result,
        bound=decomposition.diameter_bound / np.pi,
        limit_bound=decomposition.limit_bound / np.pi,
        axis=axis,
        N=N,
    )


def richardson_extrapolate(
    coarse: ConstantEstimate, fine: ConstantEstimate, order: float = 2.0
) -> ConstantEstimate:
    r"""
    Two-grid extrapolation of the eigenvalue,
    $\lambda^* = \lambda_f + (\lambda_f - \lambda_c) / (r^p - 1)$ with
    $r = h_c / h_f$ and $p$ = `order`.
    """
    if coarse.name != fine.name:
        raise ValueError(f"Cannot extrapolate {coarse.name} with {fine.name}.")
    if not coarse.h > fine.h:
        raise ValueError(
            f"The coarse grid must be coarser: got h={coarse.h} and h={fine.h}."
        )
    ratio = coarse.h / fine.h
    eigenvalue = fine.eigenvalue + (fine.eigenvalue - coarse.eigenvalue) / (
        ratio ** order - 1.0
    )
    if eigenvalue <= 0:
        warnings.warn(
            f"Extrapolated eigenvalue of {fine.name} is not positive; keeping the fine "
            f"grid value.",
            UserWarning,
        )
        eigenvalue = fine.eigenvalue
    return ConstantEstimate(
        name=f"{fine.name}_extrapolated",
        value=float(1.0 / np.sqrt(eigenvalue)),
        eigenvalue=float(eigenvalue),
        h=0.0,
        iterations=fine.iterations,
        eigen_residual=max(coarse.eigen_residual, fine.eigen_residual),
        constraint_residual=max(coarse.constraint_residual, fine.constraint_residual),
        bound=fine.bound,
        limit_bound=fine.limit_bound,
        axis=fine.axis,
        N=fine.N,
        metadata=dict(h_coarse=coarse.h, h_fine=fine.h, order=order),
    )
