# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from hhx.domain import Ball, Box, GeometrySpec, Torus, VoxelDomain, voxelize
from hhx.grid_calculus import (
    EdgeField,
    Flavor,
    Kind,
    NodeField,
    grad,
    staggered_grid,
)


def cube(n: int = 8) -> VoxelDomain:
    """Unit cube with `n` cells per axis."""
    return voxelize(GeometrySpec(shape=Box(lengths=(1.0, 1.0, 1.0)), h=1.0 / n))


def box(lengths: Tuple[float, float, float], h: float) -> VoxelDomain:
    return voxelize(GeometrySpec(shape=Box(lengths=lengths), h=h))


def ball(n: int = 8) -> VoxelDomain:
    """Ball of radius 1/2, `n` cells across."""
    return voxelize(GeometrySpec(shape=Ball(radius=0.5), h=1.0 / n))


def l_shape(n: int = 8) -> VoxelDomain:
    """Unit cube without the quarter `x1, x2 > 1/2`; not convex."""
    mask = np.ones((n, n, n), dtype=bool)
    mask[n // 2 :, n // 2 :, :] = False
    return VoxelDomain.from_mask(mask, 1.0 / n)


def torus(h: float = 1.0 / 8) -> VoxelDomain:
    """Solid torus around the x3 axis; its hole makes it not simply connected."""
    shape = Torus(major_radius=1.0, minor_radius=0.4, axis=3)
    return voxelize(GeometrySpec(shape=shape, h=h))


def dense_grad(u: np.ndarray, h: float) -> List[np.ndarray]:
    """Forward differences of a node array, one array per edge direction."""
    return [np.diff(u, axis=a) / h for a in range(3)]


def dense_rot(e: List[np.ndarray], h: float) -> List[np.ndarray]:
    e1, e2, e3 = e
    return [
        (np.diff(e3, axis=1) - np.diff(e2, axis=2)) / h,
        (np.diff(e1, axis=2) - np.diff(e3, axis=0)) / h,
        (np.diff(e2, axis=0) - np.diff(e1, axis=1)) / h,
    ]


def dense_div(f: List[np.ndarray], h: float) -> np.ndarray:
    return sum(np.diff(component, axis=a) for a, component in enumerate(f)) / h


def lower_half_curl_free_edge_field(
    domain: VoxelDomain, rng: np.random.Generator
) -> EdgeField:
    """Essential edge field whose third rotation component vanishes on the lower half
    of the box (middle plane included) and whose upper half is random."""
    grid = staggered_grid(domain)
    upper = EdgeField.random(domain, Flavor.ESSENTIAL, rng)
    parts = [part.copy() for part in grid.split(Kind.EDGE, upper.values)]
    half = domain.dims[2] // 2
    # Edges along x1 and x2 sit on node planes in x3.
    for part in parts[:2]:
        part[:, :, : half + 1] = 0.0
    upper = EdgeField(domain, grid.join(Kind.EDGE, parts), Flavor.ESSENTIAL)
    potential = NodeField.from_function(
        domain, lambda x1, x2, x3: np.sin(np.pi * x1) * np.sin(np.pi * x2) * x3
    )
    return grad(potential.restrict(Flavor.ESSENTIAL)) + upper
