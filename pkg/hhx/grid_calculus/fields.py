# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import logging
import warnings
from typing import Callable, Optional, Type

import numpy as np

from hhx.domain.voxel import VoxelDomain
from hhx.grid_calculus.grid import Flavor, Kind, StaggeredGrid, staggered_grid
from hhx.utils.io import PathLike, read_field_arrays, write_field_arrays

logger = logging.getLogger(__name__)


class Field:
    """Discrete field on the staggered grid of a voxel domain.

    Values are stored on every entity of the bounding cuboid and are zero outside the
    unknowns of the field's flavor. Fields are immutable; operators return new fields.
    """

    kind: Kind = None

    def __init__(
        self, domain: VoxelDomain, values: np.ndarray, flavor: Flavor = Flavor.NATURAL
    ):
        self.domain = domain
        self.flavor = Flavor(flavor)
        grid = self.grid
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.size(self.kind),):
            raise ValueError(
                f"{type(self).__name__} on {domain.dims} needs "
                f"{grid.size(self.kind)} values, got shape {values.shape}."
            )
        if not np.all(np.isfinite(values)):
            raise ValueError(f"{type(self).__name__} values must be finite.")
        values = values.copy()
        values[~grid.dof_mask(self.kind, self.flavor)] = 0.0
        values.setflags(write=False)
        self.values = values

    @property
    def grid(self) -> StaggeredGrid:
        return staggered_grid(self.domain)

    @property
    def dofs(self) -> np.ndarray:
        return self.grid.dofs(self.kind, self.flavor)

    @property
    def components(self):
        return self.grid.split(self.kind, self.values)

    def component(self, i: int) -> np.ndarray:
        """Component `i` (1-based) as an array of its entity shape."""
        return self.components[i - 1]

    def dof_values(self) -> np.ndarray:
        return self.values[self.dofs]

    @classmethod
    def from_dofs(
        cls, domain: VoxelDomain, flavor: Flavor, x: np.ndarray
    ) -> "Field":
        grid = staggered_grid(domain)
        values = np.zeros(grid.size(cls.kind))
        values[grid.dofs(cls.kind, flavor)] = x
        return cls(domain, values, flavor)

    @classmethod
    def zeros(cls, domain: VoxelDomain, flavor: Flavor = Flavor.NATURAL) -> "Field":
        return cls(domain, np.zeros(staggered_grid(domain).size(cls.kind)), flavor)

    @classmethod
    def random(
        cls,
        domain: VoxelDomain,
        flavor: Flavor = Flavor.NATURAL,
        rng: Optional[np.random.Generator] = None,
    ) -> "Field":
        """Standard normal values on every unknown of `flavor`."""
        rng = np.random.default_rng() if rng is None else rng
        grid = staggered_grid(domain)
        return cls.from_dofs(
            domain, flavor, rng.standard_normal(len(grid.dofs(cls.kind, flavor)))
        )

    @classmethod
    def from_function(
        cls,
        domain: VoxelDomain,
        function: Callable,
        flavor: Flavor = Flavor.NATURAL,
    ) -> "Field":
        """Sample `function(x1, x2, x3)` at entity centres.

        Scalar kinds expect an array back, vector kinds a sequence of three arrays of
        which component `i` is sampled on the entities of component `i`.
        """
        grid = staggered_grid(domain)
        parts = []
        for c, shape in enumerate(grid.shapes(cls.kind)):
            x = grid.coordinates(cls.kind, c)
            value = function(*x)
            if len(grid.shapes(cls.kind)) > 1:
                value = value[c]
            parts.append(np.broadcast_to(np.asarray(value, dtype=np.float64), shape))
        return cls(domain, grid.join(cls.kind, parts), flavor)

    def restrict(self, flavor: Flavor) -> "Field":
        """Return the field with the unknowns of `flavor` only."""
        return type(self)(self.domain, self.values, flavor)

    def coerce(self, flavor: Flavor, what: str = "field") -> "Field":
        """Restrict to `flavor`, warning when values are dropped."""
        if self.flavor == flavor:
            return self
        result = self.restrict(flavor)
        dropped = np.abs(self.values - result.values).max(initial=0.0)
        if dropped > 0:
            warnings.warn(
                f"The {what} has {self.flavor.name.lower()} flavor; dropped its values "
                f"outside the {flavor.name.lower()} unknowns (max {dropped:.3g}).",
                UserWarning,
            )
        return result

    def check_compatible(self, other: "Field"):
        if other.domain is not self.domain:
            if other.domain.h != self.domain.h or not np.array_equal(
                other.domain.mask, self.domain.mask
            ):
                raise ValueError("Fields live on different grids.")
        if other.kind != self.kind:
            raise ValueError(
                f"Cannot combine a {self.kind.name.lower()} field with a "
                f"{other.kind.name.lower()} field."
            )

    def _combine(self, other: "Field", values: np.ndarray) -> "Field":
        self.check_compatible(other)
        flavor = (
            Flavor.ESSENTIAL
            if self.flavor == other.flavor == Flavor.ESSENTIAL
            else Flavor.NATURAL
        )
        return type(self)(self.domain, values, flavor)

    def __add__(self, other: "Field") -> "Field":
        return self._combine(other, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        return self._combine(other, self.values - other.values)

    def __mul__(self, scalar: float) -> "Field":
        return type(self)(self.domain, float(scalar) * self.values, self.flavor)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return self * -1.0

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(dims={self.domain.dims}, "
            f"flavor={self.flavor.name.lower()})"
        )

    def save(self, path: PathLike, overwrite: bool = False):
        """Write the field in the `HHXF` format."""
        return write_field_arrays(
            path,
            int(self.kind),
            int(self.flavor),
            self.domain.dims,
            self.domain.h,
            self.components,
            overwrite=overwrite,
        )


class NodeField(Field):
    kind = Kind.NODE


class EdgeField(Field):
    kind = Kind.EDGE


class FaceField(Field):
    kind = Kind.FACE


class CellField(Field):
    """Scalar per occupied cell; the flavor only matters to `grad_dual`."""

    kind = Kind.CELL


FIELD_TYPES = {
    Kind.NODE: NodeField,
    Kind.EDGE: EdgeField,
    Kind.FACE: FaceField,
    Kind.CELL: CellField,
}


def field_type(kind: Kind) -> Type[Field]:
    return FIELD_TYPES[Kind(kind)]


def azimuthal(domain: VoxelDomain) -> Callable:
    """Field circulating about the x3-parallel line through the centre of the box.

    Its rotation vanishes away from that line, where r^2 is floored at h^2.
    """
    c1, c2, _ = (length / 2 for length in domain.extents)
    floor = domain.h ** 2

    def function(x1, x2, x3):
        r2 = np.maximum((x1 - c1) ** 2 + (x2 - c2) ** 2, floor)
        return -(x2 - c2) / r2, (x1 - c1) / r2, np.zeros_like(x3)

    return function


def load_field(path: PathLike, domain: VoxelDomain) -> Field:
    """Read an `HHXF` file written for `domain`."""
    content = read_field_arrays(path)
    if tuple(content["dims"]) != domain.dims or abs(content["h"] - domain.h) > 1e-12:
        raise ValueError(
            f"{path} was written for dims {content['dims']} and h={content['h']}, the "
            f"domain has dims {domain.dims} and h={domain.h}."
        )
    try:
        kind, flavor = Kind(content["kind"]), Flavor(content["flavor"])
    except ValueError as err:
        raise ValueError(f"{path}: unknown kind or flavor byte.") from err
    return field_type(kind)(domain, content["values"], flavor)

