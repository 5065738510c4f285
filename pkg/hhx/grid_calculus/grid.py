# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

r"""
Staggered grid over the bounding cuboid of a voxel domain.

Entities and their index shapes, with $N_i = n_i + 1$:

- nodes: $(N_1, N_2, N_3)$
- edges parallel to axis 1, 2, 3: $(n_1, N_2, N_3)$, $(N_1, n_2, N_3)$,
  $(N_1, N_2, n_3)$
- faces normal to axis 1, 2, 3: $(N_1, n_2, n_3)$, $(n_1, N_2, n_3)$,
  $(n_1, n_2, N_3)$
- cells: $(n_1, n_2, n_3)$

Components are flattened with the first axis running fastest and concatenated in axis
order. An entity is *active* if it touches an occupied cell and *interior* if all cells
around it are occupied. Natural-flavor unknowns live on active entities, essential ones
on interior entities.
"""

from enum import IntEnum
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from hhx.domain.voxel import VoxelDomain


class Kind(IntEnum):
    NODE = 0
    EDGE = 1
    FACE = 2
    CELL = 3


class Flavor(IntEnum):
    """Essential unknowns vanish on the boundary, natural ones do not."""

    ESSENTIAL = 0
    NATURAL = 1


def _node_aligned(kind: Kind, component: int) -> Tuple[bool, bool, bool]:
    """Per axis, whether the entity sits on grid planes (True) or between them."""
    if kind == Kind.NODE:
        return (True, True, True)
    if kind == Kind.CELL:
        return (False, False, False)
    along = [a == component for a in range(3)]
    if kind == Kind.EDGE:
        return tuple(not a for a in along)
    return tuple(along)


def _d(n: int) -> sp.csr_matrix:
    """Forward difference from `n + 1` points to `n` intervals."""
    return sp.diags([-1.0, 1.0], [0, 1], shape=(n, n + 1), format="csr")


def _eye(n: int) -> sp.csr_matrix:
    return sp.identity(n, format="csr")


def _kron3(a3, a2, a1) -> sp.csr_matrix:
    # First axis fastest: the axis-1 factor is the innermost Kronecker factor.
    return sp.kron(a3, sp.kron(a2, a1), format="csr")


class StaggeredGrid:
    """Entity layout, control volumes and incidence matrices of a voxel domain.

    Build it with `staggered_grid(domain)`, which caches one grid per domain.
    """

    def __init__(self, domain: VoxelDomain):
        self.domain = domain
        self.h = domain.h
        self.dims = domain.dims
        self._padded = np.pad(domain.mask, 1).astype(np.int64)
        self._cache: Dict = {}

    def shapes(self, kind: Kind) -> List[Tuple[int, int, int]]:
        components = 1 if kind in (Kind.NODE, Kind.CELL) else 3
        shapes = []
        for c in range(components):
            aligned = _node_aligned(kind, c)
            shapes.append(tuple(n + a for n, a in zip(self.dims, aligned)))
        return shapes

    def size(self, kind: Kind) -> int:
        return sum(int(np.prod(s)) for s in self.shapes(kind))

    def component_slices(self, kind: Kind) -> List[slice]:
        slices, start = [], 0
        for s in self.shapes(kind):
            stop = start + int(np.prod(s))
            slices.append(slice(start, stop))
            start = stop
        return slices

    def split(self, kind: Kind, values: np.ndarray) -> List[np.ndarray]:
        """Reshape a flat vector into its component arrays."""
        return [
            values[sl].reshape(shape, order="F")
            for sl, shape in zip(self.component_slices(kind), self.shapes(kind))
        ]

    def join(self, kind: Kind, components) -> np.ndarray:
        return np.concatenate([np.asarray(c).ravel(order="F") for c in components])

    def coordinates(self, kind: Kind, component: int = 0) -> Tuple[np.ndarray, ...]:
        """Centre coordinates of the entities of one component, as meshgrid arrays."""
        aligned = _node_aligned(kind, component)
        axes = [
            (np.arange(n + a) + (0.0 if a else 0.5)) * self.h
            for n, a in zip(self.dims, aligned)
        ]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def _counts(self, kind: Kind, cells: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Number of adjacent cells in `cells` (padded) and its maximum, per entity."""
        counts, maxima = [], []
        for c, shape in enumerate(self.shapes(kind)):
            aligned = _node_aligned(kind, c)
            total = np.zeros(shape, dtype=np.int64)
            offsets = [(0, 1) if a else (1,) for a in aligned]
            for o1 in offsets[0]:
                for o2 in offsets[1]:
                    for o3 in offsets[2]:
                        total += cells[
                            o1 : o1 + shape[0], o2 : o2 + shape[1], o3 : o3 + shape[2]
                        ]
            counts.append(total.ravel(order="F"))
            maxima.append(np.full(total.size, 2 ** sum(aligned), dtype=np.int64))
        return np.concatenate(counts), np.concatenate(maxima)

    def counts(self, kind: Kind) -> Tuple[np.ndarray, np.ndarray]:
        key = ("counts", kind)
        if key not in self._cache:
            self._cache[key] = self._counts(kind, self._padded)
        return self._cache[key]

    def active(self, kind: Kind) -> np.ndarray:
        return self.counts(kind)[0] > 0

    def interior(self, kind: Kind) -> np.ndarray:
        count, maximum = self.counts(kind)
        return count == maximum

    def dof_mask(self, kind: Kind, flavor: Flavor) -> np.ndarray:
        if kind == Kind.CELL or flavor == Flavor.NATURAL:
            return self.active(kind)
        return self.interior(kind)

    def dofs(self, kind: Kind, flavor: Flavor) -> np.ndarray:
        key = ("dofs", kind, flavor)
        if key not in self._cache:
            self._cache[key] = np.flatnonzero(self.dof_mask(kind, flavor))
        return self._cache[key]

    def weights(self, kind: Kind, cell_mask: Optional[np.ndarray] = None) -> np.ndarray:
        r"""
        Control volumes $w = h^3 \cdot (\text{adjacent cells}) / (\text{maximum})$.

        Boundary entities of a flat face get half, edges of the boundary a quarter,
        corners an eighth of $h^3$. With `cell_mask`, only the cells of that region
        count, which gives the region-restricted weights used for subdomain means.
        """
        if cell_mask is None:
            key = ("weights", kind)
            if key not in self._cache:
                count, maximum = self.counts(kind)
                self._cache[key] = count * self.h ** 3 / maximum
            return self._cache[key]
        region = np.pad(np.asarray(cell_mask, dtype=bool) & self.domain.mask, 1)
        count, maximum = self._counts(kind, region.astype(np.int64))
        return count * self.h ** 3 / maximum

    def incidence(self, kind: Kind) -> sp.csr_matrix:
        """Full-grid difference matrix out of `kind`, scaled by `1/h`."""
        key = ("incidence", kind)
        if key in self._cache:
            return self._cache[key]
        n1, n2, n3 = self.dims
        N1, N2, N3 = n1 + 1, n2 + 1, n3 + 1
        I, d = _eye, _d
        if kind == Kind.NODE:
            matrix = sp.vstack(
                [
                    _kron3(I(N3), I(N2), d(n1)),
                    _kron3(I(N3), d(n2), I(N1)),
                    _kron3(d(n3), I(N2), I(N1)),
                ]
            )
        elif kind == Kind.EDGE:
            zero = None
            matrix = sp.bmat(
                [
                    [
                        zero,
                        -_kron3(d(n3), I(n2), I(N1)),
                        _kron3(I(n3), d(n2), I(N1)),
                    ],
                    [
                        _kron3(d(n3), I(N2), I(n1)),
                        zero,
                        -_kron3(I(n3), I(N2), d(n1)),
                    ],
                    [
                        -_kron3(I(N3), d(n2), I(n1)),
                        _kron3(I(N3), I(n2), d(n1)),
                        zero,
                    ],
                ]
            )
        elif kind == Kind.FACE:
            matrix = sp.hstack(
                [
                    _kron3(I(n3), I(n2), d(n1)),
                    _kron3(I(n3), d(n2), I(n1)),
                    _kron3(d(n3), I(n2), I(n1)),
                ]
            )
        else:
            raise ValueError("Cells are the end of the complex.")
        matrix = (matrix / self.h).tocsr()
        self._cache[key] = matrix
        return matrix

    def operator(self, kind: Kind, flavor: Flavor) -> sp.csr_matrix:
        """Incidence matrix restricted to the unknowns of `flavor` on both sides."""
        key = ("operator", kind, flavor)
        if key not in self._cache:
            target = Kind(kind + 1)
            rows = self.dofs(target, flavor)
            columns = self.dofs(kind, flavor)
            self._cache[key] = self.incidence(kind)[rows][:, columns].tocsr()
        return self._cache[key]

    def dof_weights(self, kind: Kind, flavor: Flavor) -> np.ndarray:
        return self.weights(kind)[self.dofs(kind, flavor)]


@lru_cache(maxsize=16)
def staggered_grid(domain: VoxelDomain) -> StaggeredGrid:
    return StaggeredGrid(domain)
