# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from __future__ import annotations

import pytest

from hhx.grid_calculus.grid import Flavor
from hhx.user_input.user_input_checks import (
    check_resolution,
    check_tolerance,
    process_axes,
    process_axis,
    process_constants,
    process_flavor,
)


@pytest.mark.parametrize(
    "flavor, expected",
    (
        ("essential", Flavor.ESSENTIAL),
        ("NATURAL", Flavor.NATURAL),
        (1, Flavor.NATURAL),
        (Flavor.ESSENTIAL, Flavor.ESSENTIAL),
    ),
)
def test_process_flavor(flavor, expected):
    assert process_flavor(flavor) == expected


@pytest.mark.parametrize("flavor", ("dirichlet", 2))
def test_unknown_flavor(flavor):
    with pytest.raises(ValueError):
        process_flavor(flavor)


@pytest.mark.parametrize("axis, expected", (("x3", 3), ("2", 2), (1, 1), (" X1 ", 1)))
def test_process_axis(axis, expected):
    assert process_axis(axis) == expected


@pytest.mark.parametrize("axis", ("x", "4", 0, "y"))
def test_invalid_axis(axis):
    with pytest.raises(ValueError):
        process_axis(axis)


@pytest.mark.parametrize(
    "axes, expected", (("2,3", (2, 3)), ("31", (3, 1)), ((1, 2), (1, 2)))
)
def test_process_axes(axes, expected):
    assert process_axes(axes) == expected


@pytest.mark.parametrize("axes", ("2,2", "1", "1,2,3", (1, 4)))
def test_invalid_axes(axes):
    with pytest.raises(ValueError):
        process_axes(axes)


def test_process_constants():
    assert process_constants("cp, cf,cp") == ["cp", "cf"]
    assert process_constants(["c_m1", "CPW"]) == ["cm1", "cpw"]
    assert len(process_constants("all")) == 7
    with pytest.raises(ValueError, match="Unknown constant"):
        process_constants("cp,cx")


def test_check_tolerance():
    assert check_tolerance(1e-8) == 1e-8
    for tol in (0.0, -1e-8, 0.1):
        with pytest.raises(ValueError, match="must lie in"):
            check_tolerance(tol, "--tol")
    with pytest.warns(UserWarning, match="64-bit"):
        check_tolerance(1e-16)


def test_check_resolution():
    assert check_resolution([4, 5, 6]) == (4, 5, 6)
    with pytest.warns(UserWarning, match="cell"):
        check_resolution((8, 3, 8))
