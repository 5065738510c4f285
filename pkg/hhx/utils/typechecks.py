# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

"""Functions that check types."""

import numbers


def is_bool(x):
    return isinstance(x, bool)


def is_int(x):
    return isinstance(x, numbers.Integral) and not is_bool(x)


def is_positive_int(x):
    return is_int(x) and x > 0


def is_nonnegative_int(x):
    return is_int(x) and x >= 0


def is_positive_float(x):
    return isinstance(x, numbers.Real) and not is_bool(x) and x > 0


def is_axis(x):
    """Axes are numbered 1, 2, 3."""
    return is_int(x) and 1 <= x <= 3


def is_axis_pair(x):
    try:
        j, k = x
    except (TypeError, ValueError):
        return False
    return is_axis(j) and is_axis(k) and j != k
