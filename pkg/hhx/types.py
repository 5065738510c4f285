# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.


from typing import Sequence, Tuple, TypeVar, Union

import numpy as np

Array = np.ndarray
Shape = Tuple[int, ...]
Point = Tuple[float, float, float]

# Axis pairs and triples use the 1-based numbering of the coordinate axes.
Axis = int
AxisPair = Tuple[int, int]

T = TypeVar("T")
OneOrMore = Union[T, Sequence[T]]

ScalarFloat = Union[np.floating, float]

__all__ = [
    "Array",
    "Axis",
    "AxisPair",
    "OneOrMore",
    "Point",
    "ScalarFloat",
    "Shape",
]
