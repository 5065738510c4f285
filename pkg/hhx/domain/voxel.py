# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import ndimage

from hhx.domain.geometry import GeometrySpec, MaskFile, Shape
from hhx.utils.io import read_mask, write_mask

logger = logging.getLogger(__name__)


class DomainError(ValueError):
    """Raised for masks that cannot represent a bounded domain."""


def _trim(mask: np.ndarray) -> np.ndarray:
    """Drop empty boundary planes so that the mask touches all six faces."""
    slices = []
    for axis in range(3):
        other = tuple(a for a in range(3) if a != axis)
        occupied = np.flatnonzero(mask.any(axis=other))
        slices.append(slice(occupied[0], occupied[-1] + 1))
    return mask[tuple(slices)]


@dataclass(frozen=True, eq=False)
class VoxelDomain:
    r"""
    Bounded domain $\Omega$ as a cell mask inside its minimal bounding cuboid $I$.

    Cell `(i, j, k)` covers $[ih, (i+1)h] \times [jh, (j+1)h] \times [kh, (k+1)h]$, so
    $I = (0, l_1) \times (0, l_2) \times (0, l_3)$ with $l_i = n_i h$.

    Attributes:
        mask: Boolean occupancy per cell, shape `(n_1, n_2, n_3)`.
        h: Grid spacing.
        convex: Convexity of the continuous shape the mask was sampled from.
        primitive: The continuous shape, if the mask came from one.
    """

    mask: np.ndarray
    h: float
    convex: bool = False
    primitive: Optional[Shape] = field(default=None, repr=False)

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool, copy=True)
        if mask.ndim != 3:
            raise DomainError(f"Mask must be three-dimensional, got {mask.shape}.")
        if not np.isfinite(self.h) or self.h <= 0:
            raise DomainError(f"Grid spacing must be positive, got {self.h}.")
        if not mask.any():
            raise DomainError(
                "Empty mask: the shape is thinner than the resolution h. Refine h."
            )
        for axis in range(3):
            other = tuple(a for a in range(3) if a != axis)
            profile = mask.any(axis=other)
            if not (profile[0] and profile[-1]):
                raise DomainError(
                    f"Mask does not touch both faces of its bounding box along axis "
                    f"{axis + 1}. Build it with `VoxelDomain.from_mask` to trim it."
                )
        _, num_components = ndimage.label(mask, ndimage.generate_binary_structure(3, 1))
        if num_components != 1:
            raise DomainError(
                f"Mask is not face-connected: found {num_components} components."
            )
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "h", float(self.h))

    @classmethod
    def from_mask(
        cls,
        mask: np.ndarray,
        h: float,
        convex: bool = False,
        primitive: Optional[Shape] = None,
    ) -> "VoxelDomain":
        """Return the domain of `mask` translated into its minimal bounding box."""
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 3:
            raise DomainError(f"Mask must be three-dimensional, got {mask.shape}.")
        if not mask.any():
            raise DomainError(
                "Empty mask: the shape is thinner than the resolution h. Refine h."
            )
        trimmed = _trim(mask)
        if trimmed.shape != mask.shape:
            logger.info("Trimmed mask from %s to %s.", mask.shape, trimmed.shape)
        return cls(trimmed, h, convex=convex, primitive=primitive)

    @classmethod
    def load(cls, path, convex: bool = False) -> "VoxelDomain":
        mask, h = read_mask(path)
        return cls.from_mask(mask, h, convex=convex)

    def save(self, path, overwrite: bool = False):
        return write_mask(path, self.mask, self.h, overwrite=overwrite)

    @property
    def dims(self) -> Tuple[int, int, int]:
        return tuple(int(n) for n in self.mask.shape)

    @property
    def extents(self) -> Tuple[float, float, float]:
        return tuple(n * self.h for n in self.dims)

    @property
    def num_cells(self) -> int:
        return int(self.mask.sum())

    @property
    def volume(self) -> float:
        return self.num_cells * self.h ** 3

    def occupied_vertices(self) -> np.ndarray:
        """Coordinates of all corners of occupied cells, shape `(m, 3)`."""
        padded = np.pad(self.mask, 1)
        n1, n2, n3 = self.dims
        corners = np.zeros((n1 + 1, n2 + 1, n3 + 1), dtype=bool)
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    corners |= padded[a : a + n1 + 1, b : b + n2 + 1, c : c + n3 + 1]
        return np.argwhere(corners) * self.h

    def describe(self) -> Dict[str, Any]:
        return dict(
            dims=list(self.dims),
            h=self.h,
            extents=list(self.extents),
            convex=self.convex,
            volume=self.volume,
            primitive=None if self.primitive is None else self.primitive.kind,
        )


def voxelize(spec: GeometrySpec) -> VoxelDomain:
    r"""
    Return the voxel domain of the shape described by `spec`.

    A cell is occupied iff its centre lies in the closed shape. The result is translated
    so that its occupied cells touch all six faces of the bounding cuboid; it is never
    rotated.

    Args:
        spec: Shape and resolution.

    Raises:
        DomainError: If the mask is empty or not face-connected.
    """
    shape = spec.shape
    if isinstance(shape, MaskFile):
        mask, h = shape.load()
        if spec.h is not None and abs(spec.h - h) > 1e-12 * h:
            raise DomainError(
                f"Requested h={spec.h} differs from h={h} stored in {shape.path}."
            )
        return VoxelDomain.from_mask(mask, h, convex=shape.convex, primitive=None)

    mask = shape.rasterize(spec.h)
    logger.debug("Rasterized %s into %s cells.", shape.kind, mask.shape)
    return VoxelDomain.from_mask(mask, spec.h, convex=shape.convex, primitive=shape)
