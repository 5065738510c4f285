# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError

from hhx.domain import (
    Box,
    DomainError,
    GeometrySpec,
    Halfspace,
    Polytope,
    Torus,
    VoxelDomain,
    beam,
    diameter,
    nearest_divisor,
    plane_pairs,
    projected_diameters,
    slab,
    uniform_beams,
    uniform_decomposition,
    voxelize,
)
from tests.test_utils import ball, box, cube, l_shape, torus


def test_box_dimensions_round_up():
    domain = box((1.0, 0.3, 1.0), h=0.25)
    assert domain.dims == (4, 2, 4)
    assert domain.convex
    assert domain.mask.all()


def test_cube_geometry():
    domain = cube(8)
    assert domain.dims == (8, 8, 8)
    assert domain.volume == pytest.approx(1.0)
    for method in ("analytic", "mask"):
        assert diameter(domain, method) == pytest.approx(np.sqrt(3))
        assert projected_diameters(domain, method) == pytest.approx([np.sqrt(2)] * 3)


def test_ball_mask_diameter_close_to_analytic():
    domain = ball(8)
    h = domain.h
    assert diameter(domain) == pytest.approx(1.0)
    assert 1.0 <= diameter(domain, "mask") <= 1.0 + 2 * np.sqrt(3) * h
    # Cells are kept by their centres, so the mask is symmetric.
    assert np.array_equal(domain.mask, domain.mask[::-1, :, :])
    assert domain.volume < 1.0


def test_torus_is_connected_and_not_convex():
    domain = torus()
    assert not domain.convex
    assert diameter(domain) == pytest.approx(2.8)
    centre = tuple(n // 2 for n in domain.dims)
    assert not domain.mask[centre]


def test_polytope_cube():
    halfspaces = [
        Halfspace(normal=normal, offset=offset)
        for axis in range(3)
        for normal, offset in (
            (tuple(1.0 if a == axis else 0.0 for a in range(3)), 1.0),
            (tuple(-1.0 if a == axis else 0.0 for a in range(3)), 0.0),
        )
    ]
    domain = voxelize(GeometrySpec(shape=Polytope(halfspaces=halfspaces), h=0.25))
    assert domain.dims == (4, 4, 4)
    assert domain.mask.all()
    assert diameter(domain) == pytest.approx(np.sqrt(3))


@pytest.mark.parametrize(
    "shape",
    (
        dict(kind="box", lengths=(1.0, 1.0, 1.0), convex=False),
        dict(kind="box", lengths=(1.0, -1.0, 1.0)),
        dict(kind="torus", major_radius=0.5, minor_radius=0.5),
        dict(kind="torus", major_radius=1.0, minor_radius=0.5, convex=True),
        dict(kind="sphere", radius=1.0),
    ),
)
def test_invalid_shapes_are_rejected(shape):
    with pytest.raises(ValidationError):
        GeometrySpec.model_validate(dict(shape=shape, h=0.1))


def test_geometry_spec_needs_resolution():
    with pytest.raises(ValidationError):
        GeometrySpec(shape=Box(lengths=(1.0, 1.0, 1.0)))


def test_geometry_spec_from_json():
    spec = GeometrySpec.from_json(
        '{"shape": {"kind": "ball", "radius": 0.5}, "h": 0.125}'
    )
    assert spec.shape.kind == "ball"
    assert voxelize(spec).dims == (8, 8, 8)
    assert "shape" in GeometrySpec.schema_document()["properties"]


def test_from_mask_trims_empty_planes():
    mask = np.zeros((6, 5, 4), dtype=bool)
    mask[1:3, 2:5, 1:2] = True
    domain = VoxelDomain.from_mask(mask, 0.5)
    assert domain.dims == (2, 3, 1)
    assert domain.num_cells == 6


def test_untrimmed_mask_is_rejected():
    mask = np.zeros((3, 3, 3), dtype=bool)
    mask[1, 1, 1] = True
    with pytest.raises(DomainError):
        VoxelDomain(mask, 1.0)


def test_empty_and_disconnected_masks():
    with pytest.raises(DomainError, match="Empty mask"):
        VoxelDomain.from_mask(np.zeros((2, 2, 2), dtype=bool), 1.0)
    mask = np.zeros((3, 1, 1), dtype=bool)
    mask[0], mask[2] = True, True
    with pytest.raises(DomainError, match="not face-connected"):
        VoxelDomain.from_mask(mask, 1.0)
    # Edge contact does not connect cells.
    mask = np.zeros((2, 2, 1), dtype=bool)
    mask[0, 0, 0], mask[1, 1, 0] = True, True
    with pytest.raises(DomainError):
        VoxelDomain.from_mask(mask, 1.0)


def test_plane_pairs_order():
    assert plane_pairs() == [(2, 3), (1, 3), (1, 2)]


def test_projected_diameters_follow_plane_pairs():
    domain = box((3.0, 2.0, 1.0), h=0.5)
    lengths = domain.extents
    expected = [np.hypot(lengths[j - 1], lengths[k - 1]) for j, k in plane_pairs()]
    assert expected == pytest.approx([np.sqrt(5), np.sqrt(10), np.sqrt(13)])
    for method in ("analytic", "mask"):
        assert projected_diameters(domain, method) == pytest.approx(expected)


def test_slab_on_grid_planes():
    domain = cube(8)
    s = slab(domain, 1, 0.25, 0.5)
    assert (s.start, s.stop) == (2, 4)
    assert s.volume == pytest.approx(0.25)
    assert s.width == pytest.approx(0.25)
    assert s.cell_mask[2:4].all() and not s.cell_mask[4:].any()


def test_off_grid_slab_fails_or_snaps():
    domain = cube(8)
    with pytest.raises(ValueError, match="not on grid planes"):
        slab(domain, 1, 0.3, 0.45)
    with pytest.warns(UserWarning, match="Snapped"):
        s = slab(domain, 1, 0.3, 0.45, snap=True)
    assert s.interval == pytest.approx((0.25, 0.5))


@pytest.mark.parametrize("interval", ((0.5, 0.25), (-0.125, 0.5), (0.0, 1.5)))
def test_invalid_intervals(interval):
    with pytest.raises(ValueError):
        slab(cube(8), 2, *interval)


def test_beam_is_intersection_of_slabs():
    domain = l_shape(8)
    b = beam(domain, (3, 1), ((0.0, 0.5), (0.25, 0.75)))
    first, second = b.slabs
    assert np.array_equal(b.cell_mask, first.cell_mask & second.cell_mask)
    assert b.axes == (3, 1)


def test_empty_beam_raises():
    with pytest.raises(DomainError, match="empty slab"):
        beam(l_shape(8), (1, 2), ((0.5, 1.0), (0.5, 1.0)))


def test_uniform_decomposition():
    domain = cube(8)
    decomposition = uniform_decomposition(domain, 1, 4)
    assert len(decomposition.slabs) == 4
    assert decomposition.diameter_bound == pytest.approx(np.hypot(np.sqrt(2), 0.25))
    assert decomposition.limit_bound == pytest.approx(np.sqrt(2))
    total = sum(s.cell_mask.astype(int) for s in decomposition.slabs)
    assert np.array_equal(total, domain.mask.astype(int))


def test_uniform_decomposition_names_nearest_divisor():
    with pytest.raises(ValueError, match="Nearest valid N: 2"):
        uniform_decomposition(cube(8), 2, 3)


@pytest.mark.parametrize(
    "n, N, expected", ((8, 3, 2), (12, 5, 4), (7, 3, 1), (9, 9, 9))
)
def test_nearest_divisor(n, N, expected):
    assert nearest_divisor(n, N) == expected


def test_uniform_beams_skip_empty_ones():
    beams = uniform_beams(l_shape(8), (1, 2), 2)
    assert len(beams) == 3
    assert all(b.cell_mask.any() for b in beams)


def test_torus_shape_validation_message():
    with pytest.raises(ValidationError, match="minor_radius"):
        Torus(major_radius=1.0, minor_radius=2.0)
