# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

"""Continuous primitives and the JSON document describing what to voxelize.

Every primitive rasterizes itself in coordinates relative to its own centre, so the
resulting masks do not depend on where the shape sits in space.

Example document::

    {"shape": {"kind": "ball", "center": [0.5, 0.5, 0.5], "radius": 0.5}, "h": 0.03125}
"""

from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat
from pydantic import field_validator, model_validator
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection
from scipy.spatial.distance import pdist

from hhx.types import AxisPair
from hhx.utils.io import read_mask

Triple = Tuple[float, float, float]

# Keeps rounding of n*h from adding a spurious layer of cells.
_ROUND_SLACK = 1e-9


def _cell_count(length: float, h: float) -> int:
    return max(int(np.ceil(length / h - _ROUND_SLACK)), 1)


def _centred_coordinates(n: int, h: float) -> np.ndarray:
    """Cell-centre coordinates of `n` cells centred on zero."""
    return (np.arange(n) + 0.5) * h - 0.5 * n * h


def _max_distance(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    return float(pdist(points).max())


class _Primitive(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    convex: bool = True

    def rasterize(self, h: float) -> np.ndarray:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def projected_diameter(self, plane: AxisPair) -> float:
        raise NotImplementedError


class Box(_Primitive):
    """Axis-aligned cuboid with edge lengths `(l_1, l_2, l_3)`."""

    kind: Literal["box"] = "box"
    lengths: Tuple[PositiveFloat, PositiveFloat, PositiveFloat]

    @field_validator("convex")
    @classmethod
    def _always_convex(cls, value):
        if not value:
            raise ValueError("A box is convex.")
        return value

    def rasterize(self, h: float) -> np.ndarray:
        # Dimensions are rounded up; every cell of the rounded box is occupied.
        return np.ones([_cell_count(length, h) for length in self.lengths], dtype=bool)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.lengths))

    def projected_diameter(self, plane: AxisPair) -> float:
        j, k = plane
        return float(np.hypot(self.lengths[j - 1], self.lengths[k - 1]))


class Ball(_Primitive):
    kind: Literal["ball"] = "ball"
    center: Triple = (0.0, 0.0, 0.0)
    radius: PositiveFloat

    @field_validator("convex")
    @classmethod
    def _always_convex(cls, value):
        if not value:
            raise ValueError("A ball is convex.")
        return value

    def rasterize(self, h: float) -> np.ndarray:
        n = _cell_count(2 * self.radius, h)
        p = _centred_coordinates(n, h)
        x, y, z = np.meshgrid(p, p, p, indexing="ij")
        return x ** 2 + y ** 2 + z ** 2 <= self.radius ** 2

    def diameter(self) -> float:
        return 2.0 * self.radius

    def projected_diameter(self, plane: AxisPair) -> float:
        return 2.0 * self.radius


class Torus(_Primitive):
    """Solid torus around the coordinate axis `axis`; not simply connected."""

    kind: Literal["torus"] = "torus"
    center: Triple = (0.0, 0.0, 0.0)
    major_radius: PositiveFloat
    minor_radius: PositiveFloat
    axis: Literal[1, 2, 3] = 3
    convex: bool = False

    @model_validator(mode="after")
    def _check_radii(self):
        if self.minor_radius >= self.major_radius:
            raise ValueError("Torus needs minor_radius < major_radius.")
        if self.convex:
            raise ValueError("A torus is not convex.")
        return self

    def rasterize(self, h: float) -> np.ndarray:
        outer = self.major_radius + self.minor_radius
        dims = [_cell_count(2 * outer, h)] * 3
        dims[self.axis - 1] = _cell_count(2 * self.minor_radius, h)
        coords = np.meshgrid(*[_centred_coordinates(n, h) for n in dims], indexing="ij")
        axial = coords[self.axis - 1]
        u, v = [c for a, c in enumerate(coords) if a != self.axis - 1]
        ring = np.sqrt(u ** 2 + v ** 2) - self.major_radius
        return ring ** 2 + axial ** 2 <= self.minor_radius ** 2

    def diameter(self) -> float:
        return 2.0 * (self.major_radius + self.minor_radius)

    def projected_diameter(self, plane: AxisPair) -> float:
        # The shadow is a disc or a stadium; both have the outer diameter.
        return 2.0 * (self.major_radius + self.minor_radius)


class Halfspace(BaseModel):
    """The set `{x : normal . x <= offset}`."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    normal: Triple
    offset: float

    @field_validator("normal")
    @classmethod
    def _unit_normal(cls, value):
        if abs(float(np.linalg.norm(value)) - 1.0) > 1e-12:
            raise ValueError(f"Halfspace normal {value} is not unit length.")
        return value


class Polytope(_Primitive):
    """Bounded intersection of halfspaces."""

    kind: Literal["polytope"] = "polytope"
    halfspaces: List[Halfspace] = Field(min_length=4)

    @field_validator("convex")
    @classmethod
    def _always_convex(cls, value):
        if not value:
            raise ValueError("A polytope is convex.")
        return value

    @model_validator(mode="after")
    def _check_bounded(self):
        normals, offsets = self._arrays()
        for axis in range(3):
            for sign in (-1.0, 1.0):
                c = np.zeros(3)
                c[axis] = sign
                extent = linprog(
                    c, A_ub=normals, b_ub=offsets, bounds=[(None, None)] * 3
                )
                if extent.status == 3:
                    raise ValueError("Polytope is unbounded.")
        self.vertices()
        return self

    def _arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        normals = np.array([hs.normal for hs in self.halfspaces])
        offsets = np.array([hs.offset for hs in self.halfspaces])
        return normals, offsets

    def vertices(self) -> np.ndarray:
        normals, offsets = self._arrays()
        # Chebyshev centre: maximise t subject to n.x + t <= b.
        result = linprog(
            c=[0.0, 0.0, 0.0, -1.0],
            A_ub=np.hstack([normals, np.ones((len(offsets), 1))]),
            b_ub=offsets,
            bounds=[(None, None)] * 3 + [(0, None)],
        )
        if not result.success or result.x[3] <= 0:
            raise ValueError("Polytope has an empty interior.")
        intersection = HalfspaceIntersection(
            np.hstack([normals, -offsets[:, None]]), result.x[:3]
        )
        return intersection.intersections

    def rasterize(self, h: float) -> np.ndarray:
        vertices = self.vertices()
        lower, upper = vertices.min(axis=0), vertices.max(axis=0)
        centre, extent = 0.5 * (lower + upper), upper - lower
        dims = [_cell_count(length, h) for length in extent]
        coords = np.meshgrid(*[_centred_coordinates(n, h) for n in dims], indexing="ij")
        points = np.stack([c.ravel() for c in coords], axis=1)
        inside = np.ones(len(points), dtype=bool)
        for hs in self.halfspaces:
            normal = np.asarray(hs.normal)
            inside &= points @ normal <= hs.offset - normal @ centre
        return inside.reshape(dims)

    def diameter(self) -> float:
        return _max_distance(self.vertices())

    def projected_diameter(self, plane: AxisPair) -> float:
        j, k = plane
        return _max_distance(self.vertices()[:, [j - 1, k - 1]])


class MaskFile(_Primitive):
    """Mask stored in an `HHXM` file; convexity must be declared by the user."""

    kind: Literal["mask_file"] = "mask_file"
    path: str
    convex: bool = False

    def load(self) -> Tuple[np.ndarray, float]:
        return read_mask(self.path)


Shape = Annotated[
    Union[Box, Ball, Torus, Polytope, MaskFile], Field(discriminator="kind")
]


class GeometrySpec(BaseModel):
    """What to voxelize (`shape`) and at which resolution (`h`)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    shape: Shape
    h: Optional[PositiveFloat] = None

    @model_validator(mode="after")
    def _resolution_given(self):
        if self.h is None and not isinstance(self.shape, MaskFile):
            raise ValueError("Resolution `h` is required for analytic shapes.")
        return self

    @classmethod
    def from_json(cls, text: str) -> "GeometrySpec":
        return cls.model_validate_json(text)

    @classmethod
    def schema_document(cls) -> dict:
        return cls.model_json_schema()