# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from __future__ import annotations

import json

import numpy as np
import pytest

from hhx.domain import slab, uniform_decomposition, whole_slab
from hhx.grid_calculus import (
    EdgeField,
    FaceField,
    Flavor,
    NodeField,
    grad,
    norm_l2,
    rot,
)
from hhx.zeromean import (
    check_global,
    check_remark_partial,
    check_thm_D,
    sweep,
)
from hhx.zeromean.checks import REMARK_SLACK
from hhx.zeromean.report import COLUMNS, SLACK_FACTOR, make_row
from tests.test_utils import ball, cube, l_shape, lower_half_curl_free_edge_field


@pytest.mark.parametrize("axis", (1, 2, 3))
def test_slab_means_are_bounded_by_divergence(axis, rng):
    phi = FaceField.random(l_shape(8), Flavor.ESSENTIAL, rng)
    report = sweep(phi, axis, 4)
    assert report.theorem == "D"
    assert len(report) == 4
    assert report.all_passed
    assert not report.negative_control
    assert report.metadata["N"] == 4
    assert all(row.component == axis for row in report.rows)


def test_divergence_free_fields_have_zero_slab_means(rng):
    phi = rot(EdgeField.random(cube(8), Flavor.ESSENTIAL, rng))
    report = sweep(phi, 1, 8)
    assert report.worst_relative_mean <= 1e-12
    assert report.all_passed


def test_natural_face_field_needs_opt_in(rng):
    phi = FaceField.random(cube(4), Flavor.NATURAL, rng)
    slabs = uniform_decomposition(phi.domain, 1, 2).slabs
    with pytest.raises(ValueError, match="vanishing normal trace"):
        check_thm_D(phi, slabs)
    report = check_thm_D(phi, slabs, allow_natural=True)
    assert report.negative_control
    assert all(row.note.startswith("negative control") for row in report.rows)


def test_check_thm_D_needs_face_field(rng):
    with pytest.raises(TypeError):
        check_thm_D(EdgeField.random(cube(4), rng=rng), [whole_slab(cube(4), 1)])


@pytest.mark.parametrize("axes", ((2, 3), (3, 2), (1, 3), (1, 2)))
def test_beam_means_are_bounded_by_rotation(axes, rng):
    phi = EdgeField.random(l_shape(8), Flavor.ESSENTIAL, rng)
    report = sweep(phi, axes, 2)
    assert report.theorem == "R"
    assert report.all_passed
    i = 6 - sum(axes)
    assert all(row.component == i for row in report.rows)
    assert all(row.axes == f"{axes[0]},{axes[1]}" for row in report.rows)


def test_gradients_have_zero_beam_means(rng):
    phi = grad(NodeField.random(cube(8), Flavor.ESSENTIAL, rng))
    report = sweep(phi, (2, 3), 4)
    assert len(report) == 16
    assert report.worst_relative_mean <= 1e-12


def test_remark_on_curl_free_lower_half(rng):
    domain = cube(8)
    phi = lower_half_curl_free_edge_field(domain, rng)
    lower = check_remark_partial(phi, 3, slab(domain, 3, 0.0, 0.5))
    assert len(lower) == 2
    assert [row.component for row in lower.rows] == [1, 2]
    assert all(row.hypothesis_met for row in lower.rows)
    assert lower.worst_relative_mean <= 1e-12
    assert lower.all_passed
    scale = norm_l2(phi) * np.sqrt(slab(domain, 3, 0.0, 0.5).volume)
    assert all(row.slack == pytest.approx(REMARK_SLACK * scale) for row in lower.rows)
    assert lower.tolerances["slack"] == REMARK_SLACK
    assert REMARK_SLACK > SLACK_FACTOR

    whole = check_remark_partial(phi, 3, whole_slab(domain, 3))
    assert not any(row.hypothesis_met for row in whole.rows)
    assert whole.metadata["hypothesis_residual"] > 1e-10
    assert all(row.note == "hypothesis not met" for row in whole.rows)


def test_remark_region_must_match_axis(rng):
    domain = cube(4)
    phi = EdgeField.random(domain, Flavor.ESSENTIAL, rng)
    with pytest.raises(ValueError, match="slab on axis 3"):
        check_remark_partial(phi, 3, whole_slab(domain, 1))
    with pytest.raises(ValueError):
        check_remark_partial(phi, 4, whole_slab(domain, 1))


@pytest.mark.parametrize("cls", (EdgeField, FaceField))
def test_global_rows(cls, rng):
    domain = l_shape(8)
    report = check_global(cls.random(domain, Flavor.ESSENTIAL, rng))
    assert len(report) == 3
    assert sorted(row.component for row in report.rows) == [1, 2, 3]
    assert report.all_passed
    assert check_global(cls.random(domain, Flavor.NATURAL, rng)).negative_control


def test_make_row_ratio_and_pass():
    row = make_row("D", "slab", 1, (1,), ((0.0, 0.5),), -2.0, 4.0, 1.0)
    assert row.ratio == pytest.approx(0.5)
    assert row.relative_mean == pytest.approx(2.0)
    assert row.slack == pytest.approx(1e-12)
    assert row.passed
    assert row.intervals == "0:0.5"
    failed = make_row("D", "slab", 1, (1,), ((0.0, 0.5),), 5.0, 4.0, 1.0)
    assert not failed.passed
    zero = make_row("D", "slab", 1, (1,), ((0.0, 0.5),), 0.0, 0.0, 0.0)
    assert zero.ratio == 0.0 and zero.passed
    assert make_row("D", "s", 1, (1,), ((0, 1),), 1.0, 0.0, 0.0).ratio == np.inf


def test_deterministic_sums_agree(rng):
    phi = EdgeField.random(cube(8), Flavor.ESSENTIAL, rng)
    fast = sweep(phi, (1, 2), 4)
    exact = sweep(phi, (1, 2), 4, deterministic=True)
    again = sweep(phi, (1, 2), 4, deterministic=True)
    assert exact.to_rows() == again.to_rows()
    for a, b in zip(fast.rows, exact.rows):
        assert a.mean == pytest.approx(b.mean, abs=1e-12)


def test_report_files(tmp_path, rng):
    report = sweep(FaceField.random(cube(4), Flavor.ESSENTIAL, rng), 2, 2)
    csv_path = report.write_csv(tmp_path / "rows.csv")
    json_path = report.write_json(tmp_path / "rows.json", extra=dict(seed=1))
    assert csv_path.read_text().splitlines()[0] == ",".join(COLUMNS)
    payload = json.loads(json_path.read_text())
    assert payload["seed"] == 1
    assert payload["theorem"] == "D"
    assert len(payload["rows"]) == 2
    assert payload["tolerances"] == dict(slack=1e-12, inequality=1e-10)


@pytest.mark.slow
def test_parallel_sweep_matches_serial(monkeypatch, rng):
    phi = EdgeField.random(cube(8), Flavor.ESSENTIAL, rng)
    serial = sweep(phi, (3, 1), 4, deterministic=True)
    monkeypatch.setenv("HHX_THREADS", "2")
    parallel = sweep(phi, (3, 1), 4, deterministic=True, num_workers=2)
    assert parallel.to_rows() == serial.to_rows()


SEEDED_DOMAINS = (cube, ball, l_shape)


@pytest.mark.slow
@pytest.mark.parametrize("make_domain", SEEDED_DOMAINS)
def test_seeded_divergence_free_slab_means(make_domain):
    domain = make_domain(16)
    for seed in range(50):
        rng = np.random.default_rng(seed)
        phi = rot(EdgeField.random(domain, Flavor.ESSENTIAL, rng))
        for axis in (1, 2, 3):
            report = sweep(phi, axis, 8)
            assert report.worst_relative_mean <= 1e-12
            assert report.all_passed


@pytest.mark.slow
@pytest.mark.parametrize("make_domain", SEEDED_DOMAINS)
def test_seeded_rotation_free_beam_means(make_domain):
    domain = make_domain(16)
    for seed in range(50):
        rng = np.random.default_rng(seed)
        phi = grad(NodeField.random(domain, Flavor.ESSENTIAL, rng))
        for axes in ((2, 3), (1, 3), (1, 2)):
            report = sweep(phi, axes, 4)
            assert report.worst_relative_mean <= 1e-12
            assert report.all_passed


@pytest.mark.slow
@pytest.mark.parametrize("make_domain", SEEDED_DOMAINS)
def test_seeded_random_fields_respect_bounds(make_domain):
    domain = make_domain(16)
    for seed in range(50):
        rng = np.random.default_rng(seed)
        faces = FaceField.random(domain, Flavor.ESSENTIAL, rng)
        edges = EdgeField.random(domain, Flavor.ESSENTIAL, rng)
        assert sweep(faces, 1, 8).worst_ratio <= 1 + 1e-10
        assert sweep(edges, (2, 3), 4).worst_ratio <= 1 + 1e-10
