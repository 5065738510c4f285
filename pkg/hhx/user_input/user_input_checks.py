# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import warnings
from typing import List, Sequence, Tuple, Union

from hhx.grid_calculus.grid import Flavor
from hhx.types import AxisPair
from hhx.utils.typechecks import is_axis, is_axis_pair, is_positive_float

_CONSTANT_NAMES = ("cp", "cf", "cm1", "cm2", "cmt", "cmn", "cpw")


def process_flavor(flavor: Union[str, int, Flavor]) -> Flavor:
    """Return a `Flavor` from a name (`essential`, `natural`) or its integer value.

    Raises:
        ValueError: If the flavor is unknown.
    """
    if isinstance(flavor, Flavor):
        return flavor
    if isinstance(flavor, str):
        try:
            return Flavor[flavor.upper()]
        except KeyError:
            raise ValueError(
                f"Unknown flavor {flavor!r}; use 'essential' or 'natural'."
            ) from None
    try:
        return Flavor(flavor)
    except ValueError:
        raise ValueError(f"Unknown flavor {flavor!r}.") from None


def process_axis(axis: Union[str, int]) -> int:
    """Return a 1-based axis from `1`, `"2"` or `"x3"`."""
    if isinstance(axis, str):
        axis = axis.strip().lower().lstrip("x")
        try:
            axis = int(axis)
        except ValueError:
            raise ValueError(f"Cannot read an axis from {axis!r}.") from None
    if not is_axis(axis):
        raise ValueError(f"Axes are numbered 1, 2, 3; got {axis}.")
    return axis


def process_axes(axes: Union[str, Sequence[int]]) -> AxisPair:
    """Return an ordered axis pair from `"2,3"`, `"23"` or `(2, 3)`."""
    if isinstance(axes, str):
        text = axes.replace(" ", "")
        parts = text.split(",") if "," in text else list(text)
        axes = [process_axis(p) for p in parts]
    axes = tuple(axes)
    if not is_axis_pair(axes):
        raise ValueError(f"Need two distinct axes in 1..3, got {axes}.")
    return axes


def process_constants(which: Union[str, Sequence[str]]) -> List[str]:
    """Return the list of constants to estimate from `"cp,cf"` or a sequence.

    `all` selects every constant. Duplicates are dropped, the order is kept.
    """
    if isinstance(which, str):
        which = [w for w in which.replace(" ", "").split(",") if w]
    names = []
    for name in which:
        name = name.lower().replace("_", "")
        if name == "all":
            return list(_CONSTANT_NAMES)
        if name not in _CONSTANT_NAMES:
            raise ValueError(
                f"Unknown constant {name!r}; choose from {_CONSTANT_NAMES}."
            )
        if name not in names:
            names.append(name)
    return names


def check_tolerance(tol: float, name: str = "tol") -> float:
    if not is_positive_float(tol) or tol > 1e-2:
        raise ValueError(f"{name} must lie in (0, 1e-2], got {tol}.")
    if tol < 1e-14:
        warnings.warn(
            f"{name}={tol} is below what 64-bit arithmetic can resolve; solves are "
            f"likely to stagnate.",
            UserWarning,
        )
    return float(tol)


def check_resolution(dims: Sequence[int], minimum: int = 4) -> Tuple[int, ...]:
    """Warn when a voxelized domain is too coarse to resolve anything."""
    dims = tuple(int(n) for n in dims)
    if min(dims) < minimum:
        warnings.warn(
            f"The mask has only {min(dims)} cell(s) along an axis (dims {dims}); "
            f"estimates at this resolution are not meaningful.",
            UserWarning,
        )
    return dims
