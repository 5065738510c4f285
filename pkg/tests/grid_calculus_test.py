# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from __future__ import annotations

import numpy as np
import pytest

from hhx.domain import VoxelDomain, slab
from hhx.grid_calculus import (
    CellField,
    EdgeField,
    FaceField,
    Flavor,
    Kind,
    NodeField,
    component_mean,
    div,
    div_dual,
    grad,
    grad_dual,
    inner,
    norm_l1,
    norm_l2,
    rot,
    rot_dual,
    staggered_grid,
)
from tests.test_utils import cube, dense_div, dense_grad, dense_rot, l_shape

FLAVORS = (Flavor.ESSENTIAL, Flavor.NATURAL)


def full_box() -> VoxelDomain:
    return VoxelDomain.from_mask(np.ones((2, 3, 4), dtype=bool), 0.5)


def test_entity_shapes():
    grid = staggered_grid(full_box())
    assert grid.shapes(Kind.NODE) == [(3, 4, 5)]
    assert grid.shapes(Kind.EDGE) == [(2, 4, 5), (3, 3, 5), (3, 4, 4)]
    assert grid.shapes(Kind.FACE) == [(3, 3, 4), (2, 4, 4), (2, 3, 5)]
    assert grid.shapes(Kind.CELL) == [(2, 3, 4)]
    assert grid.size(Kind.EDGE) == 40 + 45 + 48


def test_grid_is_cached_per_domain():
    domain = full_box()
    assert staggered_grid(domain) is staggered_grid(domain)


def test_operators_match_dense_differences(rng):
    domain = full_box()
    h = domain.h
    u = NodeField.random(domain, Flavor.NATURAL, rng)
    e = EdgeField.random(domain, Flavor.NATURAL, rng)
    f = FaceField.random(domain, Flavor.NATURAL, rng)
    for actual, expected in zip(grad(u).components, dense_grad(u.component(1), h)):
        assert np.allclose(actual, expected)
    for actual, expected in zip(rot(e).components, dense_rot(e.components, h)):
        assert np.allclose(actual, expected)
    assert np.allclose(div(f).component(1), dense_div(f.components, h))


@pytest.mark.parametrize("flavor", FLAVORS)
def test_complex_property(flavor, rng):
    domain = l_shape(6)
    u = NodeField.random(domain, flavor, rng)
    e = EdgeField.random(domain, flavor, rng)
    h = domain.h
    assert np.abs(rot(grad(u)).values).max() <= 1e-12 * np.abs(u.values).max() / h ** 2
    assert np.abs(div(rot(e)).values).max() <= 1e-12 * np.abs(e.values).max() / h ** 2


@pytest.mark.parametrize("kind", (Kind.NODE, Kind.EDGE, Kind.FACE, Kind.CELL))
def test_weights_add_up_to_volume(kind):
    domain = l_shape(6)
    grid = staggered_grid(domain)
    weights = grid.split(kind, grid.weights(kind))
    for component in weights:
        assert component.sum() == pytest.approx(domain.volume)


def test_boundary_weights():
    grid = staggered_grid(cube(4))
    h3 = 0.25 ** 3
    nodes = grid.split(Kind.NODE, grid.weights(Kind.NODE))[0]
    assert nodes[0, 0, 0] == pytest.approx(h3 / 8)
    assert nodes[0, 1, 1] == pytest.approx(h3 / 2)
    assert nodes[2, 2, 2] == pytest.approx(h3)


def test_essential_unknowns_are_interior():
    grid = staggered_grid(cube(4))
    assert len(grid.dofs(Kind.NODE, Flavor.ESSENTIAL)) == 3 ** 3
    assert len(grid.dofs(Kind.NODE, Flavor.NATURAL)) == 5 ** 3
    assert len(grid.dofs(Kind.CELL, Flavor.ESSENTIAL)) == 4 ** 3
    for kind in (Kind.NODE, Kind.EDGE, Kind.FACE):
        essential = set(grid.dofs(kind, Flavor.ESSENTIAL))
        assert essential < set(grid.dofs(kind, Flavor.NATURAL))


def test_restricted_operator_shape():
    grid = staggered_grid(l_shape(4))
    G = grid.operator(Kind.NODE, Flavor.ESSENTIAL)
    assert G.shape == (
        len(grid.dofs(Kind.EDGE, Flavor.ESSENTIAL)),
        len(grid.dofs(Kind.NODE, Flavor.ESSENTIAL)),
    )


@pytest.mark.parametrize("flavor", FLAVORS)
def test_div_dual_is_adjoint_of_grad(flavor, rng):
    domain = l_shape(6)
    u = NodeField.random(domain, flavor, rng)
    e = EdgeField.random(domain, flavor, rng)
    scale = norm_l2(grad(u)) * norm_l2(e)
    assert inner(grad(u), e) == pytest.approx(-inner(u, div_dual(e)), abs=1e-10 * scale)


@pytest.mark.parametrize("flavor", FLAVORS)
def test_rot_dual_is_adjoint_of_rot(flavor, rng):
    # The face side pairs with the opposite flavor.
    domain = l_shape(6)
    other = Flavor.NATURAL if flavor == Flavor.ESSENTIAL else Flavor.ESSENTIAL
    e = EdgeField.random(domain, flavor, rng)
    f = FaceField.random(domain, other, rng)
    scale = norm_l2(rot(e)) * norm_l2(f)
    expected = inner(e, rot_dual(f, flavor))
    assert inner(rot(e), f) == pytest.approx(expected, abs=1e-10 * scale)


@pytest.mark.parametrize("flavor", FLAVORS)
def test_grad_dual_is_adjoint_of_div(flavor, rng):
    domain = l_shape(6)
    u = CellField.random(domain, flavor, rng)
    gradient = grad_dual(u, flavor)
    assert gradient.flavor != flavor
    f = FaceField.random(domain, gradient.flavor, rng)
    scale = norm_l2(gradient) * norm_l2(f)
    assert inner(gradient, f) == pytest.approx(-inner(u, div(f)), abs=1e-10 * scale)


def test_fields_are_read_only(rng):
    e = EdgeField.random(cube(4), rng=rng)
    with pytest.raises(ValueError):
        e.values[0] = 1.0


def test_field_values_are_zero_outside_unknowns(rng):
    domain = cube(4)
    grid = staggered_grid(domain)
    e = EdgeField(domain, np.ones(grid.size(Kind.EDGE)), Flavor.ESSENTIAL)
    assert e.values.sum() == len(grid.dofs(Kind.EDGE, Flavor.ESSENTIAL))


def test_invalid_field_values():
    domain = cube(4)
    with pytest.raises(ValueError, match="needs"):
        EdgeField(domain, np.ones(3))
    values = np.full(staggered_grid(domain).size(Kind.EDGE), np.nan)
    with pytest.raises(ValueError, match="finite"):
        EdgeField(domain, values)


def test_coerce_warns_when_values_are_dropped(rng):
    e = EdgeField.random(cube(4), Flavor.NATURAL, rng)
    with pytest.warns(UserWarning, match="dropped"):
        restricted = e.coerce(Flavor.ESSENTIAL)
    assert restricted.flavor == Flavor.ESSENTIAL


def test_mixing_kinds_fails(rng):
    domain = cube(4)
    with pytest.raises(TypeError):
        rot(NodeField.random(domain, rng=rng))
    with pytest.raises(ValueError):
        EdgeField.random(domain, rng=rng) + FaceField.random(domain, rng=rng)


def test_field_arithmetic_flavor(rng):
    domain = cube(4)
    a = EdgeField.random(domain, Flavor.ESSENTIAL, rng)
    b = EdgeField.random(domain, Flavor.NATURAL, rng)
    assert (a + a).flavor == Flavor.ESSENTIAL
    assert (a - b).flavor == Flavor.NATURAL
    assert np.allclose((2 * a).values, 2.0 * a.values)
    assert np.allclose((-a).values, -a.values)


def test_means_and_norms_of_constant_field():
    domain = cube(4)
    ones = EdgeField.from_function(domain, lambda *x: (1.0, 1.0, 1.0))
    assert norm_l2(ones) == pytest.approx(np.sqrt(3))
    for i in (1, 2, 3):
        assert component_mean(ones, i) == pytest.approx(1.0)
    half = slab(domain, 1, 0.0, 0.5)
    assert component_mean(ones, 2, half) == pytest.approx(0.5)
    assert norm_l1(ones, component=1, region=half) == pytest.approx(0.5)
    assert component_mean(ones, 1, half, deterministic=True) == pytest.approx(0.5)


def test_from_function_samples_entity_centres():
    domain = cube(4)
    f = FaceField.from_function(domain, lambda x1, x2, x3: (x1, x2, x3))
    # Faces normal to x1 sit on the planes x1 = i h.
    assert np.allclose(f.component(1)[:, 0, 0], np.arange(5) * 0.25)
    u = CellField.from_function(domain, lambda x1, x2, x3: x3)
    assert np.allclose(u.component(1)[0, 0, :], (np.arange(4) + 0.5) * 0.25)


def test_component_mean_needs_vector_field(rng):
    with pytest.raises(TypeError):
        component_mean(NodeField.random(cube(4), rng=rng), 1)
    with pytest.raises(ValueError):
        component_mean(EdgeField.random(cube(4), rng=rng), 4)
