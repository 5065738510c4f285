# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from typing import Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from hhx.domain.subdomains import plane_pairs
from hhx.domain.voxel import VoxelDomain
from hhx.types import AxisPair
from hhx.utils.typechecks import is_axis_pair

_METHODS = ("auto", "mask", "analytic")


def _hull_diameter(points: np.ndarray) -> float:
    """Largest pairwise distance, evaluated on the convex hull vertices only."""
    points = np.unique(points, axis=0)
    if len(points) < 2:
        return 0.0
    try:
        points = points[ConvexHull(points).vertices]
    except QhullError:
        # Degenerate (coplanar or collinear) point sets.
        pass
    return float(pdist(points).max())


def _resolve(domain: VoxelDomain, method: str) -> str:
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}.")
    if method == "auto":
        return "mask" if domain.primitive is None else "analytic"
    if method == "analytic" and domain.primitive is None:
        raise ValueError("The domain has no analytic primitive; use method='mask'.")
    return method


def diameter(domain: VoxelDomain, method: str = "auto") -> float:
    r"""
    Return the diameter $d$ of the domain.

    Args:
        domain: Voxel domain.
        method: `analytic` uses the continuous primitive, `mask` the maximal distance
            between corners of occupied cells (an upper bound for any set inscribed in
            the mask), `auto` the former when available.
    """
    if _resolve(domain, method) == "analytic":
        return domain.primitive.diameter()
    return _hull_diameter(domain.occupied_vertices())


def projected_diameter(
    domain: VoxelDomain, plane: AxisPair, method: str = "auto"
) -> float:
    r"""
    Return $d_{jk}$, the diameter of the shadow of the domain on the
    $(e_j, e_k)$-plane.
    """
    if not is_axis_pair(plane):
        raise ValueError(f"plane must be a pair of distinct axes in 1..3, got {plane}.")
    j, k = sorted(plane)
    if _resolve(domain, method) == "analytic":
        return domain.primitive.projected_diameter((j, k))
    vertices = domain.occupied_vertices()[:, [j - 1, k - 1]]
    return _hull_diameter(vertices)


def projected_diameters(
    domain: VoxelDomain, method: str = "auto"
) -> Tuple[float, float, float]:
    """Return `(d_23, d_13, d_12)`."""
    return tuple(projected_diameter(domain, plane, method) for plane in plane_pairs())
