# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

"""Slabs $\\Omega_i = \\{x \\in \\Omega : \\alpha_i < x_i < \\beta_i\\}$ and beams
$\\Omega_{jk} = \\Omega_j \\cap \\Omega_k$ cut out of a voxel domain.

Interval endpoints always lie on grid planes. This keeps the discrete zero-mean
identities exact.
"""

import logging
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from hhx.domain.voxel import DomainError, VoxelDomain
from hhx.types import Axis, AxisPair
from hhx.utils.typechecks import is_axis, is_axis_pair, is_positive_int

logger = logging.getLogger(__name__)

SNAP_TOL = 1e-9

Interval = Tuple[float, float]


def _snap_interval(
    domain: VoxelDomain, axis: Axis, interval: Interval, snap: bool
) -> Tuple[int, int]:
    """Return the cell index range `[start, stop)` covering `interval`."""
    if not is_axis(axis):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}.")
    alpha, beta = (float(v) for v in interval)
    length = domain.extents[axis - 1]
    h = domain.h
    if not (0.0 <= alpha < beta <= length + SNAP_TOL * h):
        raise ValueError(
            f"Need 0 <= alpha < beta <= l_{axis} = {length}, got ({alpha}, {beta})."
        )
    a, b = alpha / h, beta / h
    start, stop = int(round(a)), int(round(b))
    if abs(a - start) > SNAP_TOL or abs(b - stop) > SNAP_TOL:
        if not snap:
            raise ValueError(
                f"Interval ({alpha}, {beta}) on axis {axis} is not on grid planes "
                f"(h={h}). Pass `snap=True` to snap it outward."
            )
        start, stop = int(np.floor(a + SNAP_TOL)), int(np.ceil(b - SNAP_TOL))
        warnings.warn(
            f"Snapped interval ({alpha}, {beta}) on axis {axis} outward to "
            f"({start * h}, {stop * h}).",
            UserWarning,
        )
    stop = min(stop, domain.dims[axis - 1])
    return start, stop


def _box_mask(domain: VoxelDomain, ranges) -> np.ndarray:
    selection = np.zeros(domain.dims, dtype=bool)
    index = [slice(None)] * 3
    for axis, (start, stop) in ranges.items():
        index[axis - 1] = slice(start, stop)
    selection[tuple(index)] = True
    return selection & domain.mask


@dataclass(frozen=True, eq=False)
class SlabSubdomain:
    """Cells of `domain` whose `axis` index lies in `[start, stop)`."""

    domain: VoxelDomain
    axis: Axis
    start: int
    stop: int

    @property
    def interval(self) -> Interval:
        return (self.start * self.domain.h, self.stop * self.domain.h)

    @property
    def width(self) -> float:
        return (self.stop - self.start) * self.domain.h

    @property
    def cell_mask(self) -> np.ndarray:
        return _box_mask(self.domain, {self.axis: (self.start, self.stop)})

    @property
    def volume(self) -> float:
        return float(self.cell_mask.sum()) * self.domain.h ** 3

    def label(self) -> str:
        alpha, beta = self.interval
        return f"slab{self.axis}[{alpha:.6g},{beta:.6g}]"


@dataclass(frozen=True, eq=False)
class BeamSubdomain:
    """Intersection of the slabs on the axes `(j, k)`; the order of the pair is kept."""

    domain: VoxelDomain
    axes: AxisPair
    ranges: Tuple[Tuple[int, int], Tuple[int, int]]

    @property
    def intervals(self) -> Tuple[Interval, Interval]:
        h = self.domain.h
        return tuple((start * h, stop * h) for start, stop in self.ranges)

    @property
    def slabs(self) -> Tuple[SlabSubdomain, SlabSubdomain]:
        return tuple(
            SlabSubdomain(self.domain, axis, *r)
            for axis, r in zip(self.axes, self.ranges)
        )

    @property
    def cell_mask(self) -> np.ndarray:
        return _box_mask(self.domain, dict(zip(self.axes, self.ranges)))

    @property
    def volume(self) -> float:
        return float(self.cell_mask.sum()) * self.domain.h ** 3

    def label(self) -> str:
        (a_j, b_j), (a_k, b_k) = self.intervals
        j, k = self.axes
        return f"beam{j}{k}[{a_j:.6g},{b_j:.6g}]x[{a_k:.6g},{b_k:.6g}]"


@dataclass(frozen=True, eq=False)
class SlabDecomposition:
    r"""
    $N$ slabs of width $l_i / N$ along `axis`.

    Attributes:
        diameter_bound: $\sqrt{d_{jk}^2 + l_i^2 / N^2}$, a bound on each slab's
            diameter with $d_{jk}$ the projected diameter on the remaining plane.
        limit_bound: $d_{jk}$, the limit of `diameter_bound` as $N \to \infty$.
    """

    axis: Axis
    N: int
    slabs: Tuple[SlabSubdomain, ...]
    diameter_bound: float
    limit_bound: float


def slab(
    domain: VoxelDomain, axis: Axis, alpha: float, beta: float, snap: bool = False
) -> SlabSubdomain:
    r"""
    Return the slab $\Omega_i$ of `domain` between the planes $x_i = \alpha$ and
    $x_i = \beta$.

    Args:
        domain: Voxel domain.
        axis: The axis $i$ (1-based).
        alpha: Lower end, a multiple of `h`.
        beta: Upper end, a multiple of `h`.
        snap: Snap off-grid endpoints outward (with a warning) instead of failing.

    Raises:
        DomainError: If the slab contains no occupied cell.
    """
    start, stop = _snap_interval(domain, axis, (alpha, beta), snap)
    result = SlabSubdomain(domain, axis, start, stop)
    if not result.cell_mask.any():
        raise DomainError(f"empty slab: {result.label()} contains no occupied cell.")
    return result


def beam(
    domain: VoxelDomain,
    axes: AxisPair,
    intervals: Tuple[Interval, Interval],
    snap: bool = False,
) -> BeamSubdomain:
    r"""
    Return the beam $\Omega_{jk} = \Omega_j \cap \Omega_k$.

    Raises:
        DomainError: If the beam contains no occupied cell.
    """
    if not is_axis_pair(axes):
        raise ValueError(f"axes must be two distinct axes in 1..3, got {axes}.")
    j, k = axes
    ranges = tuple(
        _snap_interval(domain, axis, interval, snap)
        for axis, interval in zip((j, k), intervals)
    )
    result = BeamSubdomain(domain, (j, k), ranges)
    first, second = result.slabs
    if not np.array_equal(result.cell_mask, first.cell_mask & second.cell_mask):
        raise RuntimeError("Beam must equal the intersection of its slabs.")
    if not result.cell_mask.any():
        raise DomainError(f"empty slab: {result.label()} contains no occupied cell.")
    return result


def whole_slab(domain: VoxelDomain, axis: Axis) -> SlabSubdomain:
    return SlabSubdomain(domain, axis, 0, domain.dims[axis - 1])


def plane_pairs() -> List[AxisPair]:
    """Coordinate planes in the order (2, 3), (1, 3), (1, 2)."""
    return sorted(combinations((1, 2, 3), 2), reverse=True)


def nearest_divisor(n: int, N: int) -> int:
    divisors = [m for m in range(1, n + 1) if n % m == 0]
    return min(divisors, key=lambda m: (abs(m - N), m))


def uniform_decomposition(
    domain: VoxelDomain,
    axis: Axis,
    N: int,
    projected: Optional[float] = None,
) -> SlabDecomposition:
    r"""
    Split `domain` into `N` slabs of equal width $l_i / N$ along `axis`.

    Args:
        domain: Voxel domain.
        axis: The axis $i$.
        N: Number of slabs; must divide the cell count $n_i$.
        projected: Projected diameter $d_{jk}$ on the plane of the other two axes.
            Computed from the domain if not given.

    Raises:
        ValueError: If `N` does not divide $n_i$; the message names the closest `N`
            that does.
    """
    if not is_axis(axis):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}.")
    if not is_positive_int(N):
        raise ValueError(f"N must be a positive integer, got {N}.")
    n = domain.dims[axis - 1]
    if n % N:
        raise ValueError(
            f"N={N} does not divide n_{axis}={n}, so l_{axis}/N is not a multiple of "
            f"h. Nearest valid N: {nearest_divisor(n, N)}."
        )
    width = n // N
    slabs = tuple(
        SlabSubdomain(domain, axis, m * width, (m + 1) * width) for m in range(N)
    )
    if projected is None:
        from hhx.domain.diameters import projected_diameter

        plane = tuple(a for a in (1, 2, 3) if a != axis)
        projected = projected_diameter(domain, plane)
    length = domain.extents[axis - 1]
    bound = float(np.hypot(projected, length / N))
    logger.debug("Decomposed axis %d into %d slabs of %d cells.", axis, N, width)
    return SlabDecomposition(axis, N, slabs, bound, float(projected))


def uniform_beams(domain: VoxelDomain, axes: AxisPair, N: int) -> List[BeamSubdomain]:
    """Return the nonempty beams of an `N x N` grid on the axes `(j, k)`."""
    j, k = axes
    beams = []
    for first in uniform_decomposition(domain, j, N, projected=0.0).slabs:
        for second in uniform_decomposition(domain, k, N, projected=0.0).slabs:
            candidate = BeamSubdomain(
                domain, (j, k), ((first.start, first.stop), (second.start, second.stop))
            )
            if candidate.cell_mask.any():
                beams.append(candidate)
    return beams
