# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

r"""
Discrete $\nabla$, $\mathrm{rot}$, $\mathrm{div}$ and their weighted adjoints.

The primal operators are the incidence matrices of the staggered complex divided by
$h$; `rot(grad(u))` and `div(rot(e))` vanish exactly. The dual operators are adjoints
with respect to the control-volume inner products:

- $\langle \nabla u, e \rangle = -\langle u, \mathrm{div}^\dagger e \rangle$
- $\langle \mathrm{rot}\, e, f \rangle = \langle e, \mathrm{rot}^\dagger f \rangle$
- $\langle \nabla^\dagger u, f \rangle = -\langle u, \mathrm{div}\, f \rangle$
"""

from typing import Optional, Union

import numpy as np

from hhx.grid_calculus.fields import CellField, EdgeField, FaceField, Field, NodeField
from hhx.grid_calculus.grid import Flavor, Kind
from hhx.utils.hhxutils import weighted_sum

Region = Optional[object]


def _opposite(flavor: Flavor) -> Flavor:
    return Flavor.NATURAL if flavor == Flavor.ESSENTIAL else Flavor.ESSENTIAL


def _apply(field: Field, output_type, flavor: Flavor) -> Field:
    matrix = field.grid.incidence(field.kind)
    return output_type(field.domain, matrix @ field.values, flavor)


def grad(u: NodeField) -> EdgeField:
    """Forward differences along edges; keeps the flavor of `u`."""
    _check_kind(u, Kind.NODE)
    return _apply(u, EdgeField, u.flavor)


def rot(e: EdgeField) -> FaceField:
    """Circulation around each face divided by its area; keeps the flavor of `e`."""
    _check_kind(e, Kind.EDGE)
    return _apply(e, FaceField, e.flavor)


def div(f: FaceField) -> CellField:
    """Net outflux of each occupied cell divided by its volume."""
    _check_kind(f, Kind.FACE)
    return _apply(f, CellField, Flavor.NATURAL)


def div_dual(e: EdgeField, flavor: Optional[Flavor] = None) -> NodeField:
    r"""
    Return $\mathrm{div}^\dagger e = -W_N^{-1} G^\top W_E e$ on the nodes of `flavor`.

    Args:
        e: Edge field.
        flavor: Flavor of the node side; defaults to the flavor of `e`. Only the edge
            values of that flavor enter.
    """
    _check_kind(e, Kind.EDGE)
    flavor = e.flavor if flavor is None else Flavor(flavor)
    grid = e.grid
    G = grid.operator(Kind.NODE, flavor)
    edges = grid.dofs(Kind.EDGE, flavor)
    x = -(G.T @ (grid.weights(Kind.EDGE)[edges] * e.values[edges]))
    return NodeField.from_dofs(
        e.domain, flavor, x / grid.dof_weights(Kind.NODE, flavor)
    )


def rot_dual(f: FaceField, flavor: Optional[Flavor] = None) -> EdgeField:
    r"""
    Return $\mathrm{rot}^\dagger f = W_E^{-1} C^\top W_F f$ on the edges of `flavor`.

    With `flavor=Flavor.ESSENTIAL` this is the adjoint of `rot` on essential edge
    fields paired with arbitrary face fields.
    """
    _check_kind(f, Kind.FACE)
    flavor = f.flavor if flavor is None else Flavor(flavor)
    grid = f.grid
    C = grid.operator(Kind.EDGE, flavor)
    faces = grid.dofs(Kind.FACE, flavor)
    x = C.T @ (grid.weights(Kind.FACE)[faces] * f.values[faces])
    weights = grid.dof_weights(Kind.EDGE, flavor)
    return EdgeField.from_dofs(f.domain, flavor, x / weights)


def grad_dual(u: CellField, flavor: Optional[Flavor] = None) -> FaceField:
    r"""
    Return $\nabla^\dagger u = -W_F^{-1} D^\top W_C u$.

    `flavor` is the boundary flavor of the scalar $u$. An essential scalar carries an
    implicit zero outside the domain, so its gradient lives on all active faces
    (natural flavor); a natural scalar has no boundary values and its gradient only
    on interior faces (essential flavor).
    """
    _check_kind(u, Kind.CELL)
    flavor = u.flavor if flavor is None else Flavor(flavor)
    out = _opposite(flavor)
    grid = u.grid
    D = grid.operator(Kind.FACE, out)
    cells = grid.dofs(Kind.CELL, out)
    x = -(D.T @ (grid.weights(Kind.CELL)[cells] * u.values[cells]))
    return FaceField.from_dofs(u.domain, out, x / grid.dof_weights(Kind.FACE, out))


def _check_kind(field: Field, kind: Kind):
    if not isinstance(field, Field) or field.kind != kind:
        raise TypeError(
            f"Expected a {kind.name.lower()} field, got {type(field).__name__}."
        )


def region_mask(field: Field, region: Region) -> Optional[np.ndarray]:
    """Cell mask of a slab or beam, checked against the grid of `field`."""
    if region is None:
        return None
    mask = np.asarray(region.cell_mask)
    if mask.shape != field.domain.dims:
        raise ValueError(
            f"Region on a {mask.shape} grid does not fit {field.domain.dims}."
        )
    if not mask.any():
        raise ValueError("Region contains no occupied cell.")
    return mask


def _weights(a: Field, region: Region, component: Optional[int]):
    weights = a.grid.weights(a.kind, region_mask(a, region))
    if component is None:
        return weights, a.values
    sl = a.grid.component_slices(a.kind)[component - 1]
    return weights[sl], a.values[sl]


def inner(a: Field, b: Field, deterministic: bool = False) -> float:
    r"""Weighted inner product $\sum_e w_e a_e b_e$ of two fields of the same kind."""
    a.check_compatible(b)
    return weighted_sum(a.grid.weights(a.kind), a.values * b.values, deterministic)


def norm_l2(a: Field, deterministic: bool = False) -> float:
    return float(np.sqrt(max(inner(a, a, deterministic), 0.0)))


def norm_l1(
    a: Field,
    component: Optional[int] = None,
    region: Region = None,
    deterministic: bool = False,
) -> float:
    r"""
    Weighted $L^1$ norm $\sum_e w_e |a_e|$.

    Args:
        a: Field.
        component: Restrict to one component (1-based) of a vector field.
        region: Slab or beam; weights count only the region's cells, so entities on
            the bounding planes of a slab carry half weight.
    """
    weights, values = _weights(a, region, component)
    return weighted_sum(weights, np.abs(values), deterministic)


def component_mean(
    f: Union[EdgeField, FaceField],
    component: int,
    region: Region = None,
    deterministic: bool = False,
) -> float:
    r"""
    Return $\int_{\omega} f_i\,dx$, the control-volume weighted sum of component `i`
    over `region` (the whole domain if None).
    """
    if f.kind not in (Kind.EDGE, Kind.FACE):
        raise TypeError("component_mean needs an edge or face field.")
    if component not in (1, 2, 3):
        raise ValueError(f"component must be 1, 2 or 3, got {component}.")
    weights, values = _weights(f, region, component)
    return weighted_sum(weights, values, deterministic)
