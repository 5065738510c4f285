# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from __future__ import annotations

import json

import numpy as np
import pytest

from hhx.cli.config import (
    EXIT_FAILURE,
    EXIT_INPUT,
    EXIT_MISSING,
    EXIT_OK,
    EXIT_SOLVER,
    exit_code,
)
from hhx.cli.main import main
from hhx.constants import ConstantEstimate
from hhx.helmholtz import SolverConvergenceError
from hhx.utils.io import FormatError


def voxelize_box(tmp_path, name="cube", lengths=(1.0, 1.0, 1.0), h=0.25):
    spec = tmp_path / f"{name}.json"
    spec.write_text(
        json.dumps(dict(shape=dict(kind="box", lengths=list(lengths)), h=h))
    )
    assert main(["voxelize", str(spec)]) == EXIT_OK
    return tmp_path / f"{name}.hhxm"


def test_voxelize_writes_mask_and_sidecar(tmp_path, capsys):
    mask = voxelize_box(tmp_path)
    assert mask.exists()
    sidecar = json.loads((tmp_path / "cube.hhxm.json").read_text())
    assert sidecar["d"] == pytest.approx(np.sqrt(3))
    assert sidecar["dims"] == [4, 4, 4]
    assert sidecar["convex"]
    assert sidecar["command"] == "voxelize"
    assert "wrote" in capsys.readouterr().out


def test_voxelize_refuses_to_overwrite(tmp_path):
    voxelize_box(tmp_path)
    spec = tmp_path / "cube.json"
    assert main(["voxelize", str(spec)]) == EXIT_INPUT
    assert main(["voxelize", str(spec), "--overwrite"]) == EXIT_OK


def test_voxelize_prints_schema(capsys):
    assert main(["voxelize", "--print-schema"]) == EXIT_OK
    assert "box" in capsys.readouterr().out


def test_invalid_geometry(tmp_path):
    spec = tmp_path / "bad.json"
    spec.write_text(json.dumps(dict(shape=dict(kind="box", lengths=[1, -1, 1]), h=1)))
    assert main(["voxelize", str(spec)]) == EXIT_INPUT


@pytest.mark.parametrize("flavor", ("hd1", "hd2"))
@pytest.mark.parametrize("kind", ("edge", "face"))
def test_decompose(tmp_path, flavor, kind):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    argv = ["decompose", str(mask), "--flavor", flavor, "--kind", kind]
    assert main(argv + ["--generate", "random", "--out", str(out)]) == EXIT_OK
    directory = out / f"decompose_{flavor}_4x4x4"
    report = json.loads((directory / "decomposition.json").read_text())
    assert report["command"] == "decompose"
    assert report["reconstruction"] <= 1e-8
    assert report["relative_norms"]["harmonic"] <= 1e-6
    assert sorted(report["files"]) == ["gradient", "harmonic", "rotational"]
    for part in ("gradient", "harmonic", "rotational"):
        assert (directory / f"{part}.hhxf").exists()


def test_decompose_with_vector_potential(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    argv = ["decompose", str(mask), "--kind", "face", "--flavor", "hd2"]
    argv += ["--generate", "divfree", "--vector-potential", "--out", str(out)]
    assert main(argv) == EXIT_OK
    directory = out / "decompose_hd2_4x4x4"
    report = json.loads((directory / "decomposition.json").read_text())
    assert not report["vector_potential"]["obstructed"]
    assert (directory / "potential.hhxf").exists()


def test_decompose_needs_an_input_field(tmp_path):
    mask = voxelize_box(tmp_path)
    assert main(["decompose", str(mask), "--out", str(tmp_path)]) == EXIT_INPUT


def test_zeromean_sweep(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    argv = ["zeromean", str(mask), "--theorem", "D", "--axis", "2", "--N", "4"]
    assert main(argv + ["--generate", "divfree", "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "zeromean_D_2_N4_4x4x4.json").read_text())
    assert payload["command"] == "zeromean"
    assert payload["N"] == 4
    assert payload["all_passed"]
    assert len(payload["rows"]) == 4
    rows = (out / "zeromean_D_2_N4_4x4x4.csv").read_text().splitlines()
    assert len(rows) == 5


def test_zeromean_beams_and_global(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    common = [str(mask), "--generate", "gradient", "--out", str(out)]
    argv = ["zeromean", "--theorem", "R", "--axes", "3,1", "--N", "2"] + common
    assert main(argv) == EXIT_OK
    assert (out / "zeromean_R_31_N2_4x4x4.json").exists()
    argv = ["zeromean", "--theorem", "global", "--kind", "edge"] + common
    assert main(argv) == EXIT_OK
    payload = json.loads((out / "zeromean_global_edge_4x4x4.json").read_text())
    assert payload["all_passed"]


def test_zeromean_remark(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    argv = ["zeromean", str(mask), "--theorem", "remark", "--axis", "3"]
    argv += ["--interval", "0,0.5", "--generate", "gradient", "--out", str(out)]
    assert main(argv) == EXIT_OK
    assert (out / "zeromean_remark_3_4x4x4.csv").exists()


def test_zeromean_errors(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    argv = ["zeromean", str(mask), "--generate", "divfree", "--out", str(out)]
    # Three slabs do not divide four cells.
    assert main(argv + ["--N", "3"]) == EXIT_INPUT
    assert main(argv + ["--N", "2"]) == EXIT_OK
    assert main(argv + ["--N", "2"]) == EXIT_INPUT
    assert main(argv + ["--N", "2", "--overwrite"]) == EXIT_OK
    assert main(argv + ["--N", "2", "--axis", "4"]) == EXIT_INPUT
    assert main(argv + ["--N", "2", "--tol", "1.0"]) == EXIT_INPUT


def test_missing_domain(tmp_path):
    argv = ["zeromean", str(tmp_path / "missing.hhxm"), "--generate", "random"]
    assert main(argv) == EXIT_MISSING


def test_constants(tmp_path):
    mask = voxelize_box(tmp_path, h=0.125)
    out = tmp_path / "runs"
    argv = ["constants", str(mask), "--which", "cp,cf", "--out", str(out)]
    assert main(argv) == EXIT_OK
    payload = json.loads((out / "constants_8x8x8.json").read_text())
    assert payload["command"] == "constants"
    assert sorted(payload["estimates"]) == ["c_f", "c_p"]
    assert payload["estimates"]["c_p"]["value"] == pytest.approx(1 / np.pi, rel=0.01)
    assert payload["all_passed"]
    assert (out / "constants_8x8x8.csv").exists()



def test_constants_default_estimates_all(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    assert main(["constants", str(mask), "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "constants_4x4x4.json").read_text())
    expected = ["c_f", "c_m1", "c_m2", "c_mn", "c_mt", "c_p", "c_pw1", "c_pw2", "c_pw3"]
    assert sorted(payload["estimates"]) == expected
    assert payload["estimates"]["c_pw1"]["N"] == 4
    assert all(e["value"] > 0 for e in payload["estimates"].values())

def test_constants_single_axis(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    argv = ["constants", str(mask), "--which", "cpw", "--axis", "1", "--N", "2"]
    assert main(argv + ["--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "constants_4x4x4.json").read_text())
    assert sorted(payload["estimates"]) == ["c_pw1"]
    assert payload["estimates"]["c_pw1"]["N"] == 2


def test_constants_on_non_convex_domain(tmp_path):
    mask = voxelize_box(tmp_path)
    out = tmp_path / "runs"
    argv = ["constants", str(mask), "--non-convex", "--which", "cp", "--out", str(out)]
    with pytest.warns(UserWarning, match="not flagged convex"):
        assert main(argv) == EXIT_OK
    payload = json.loads((out / "constants_4x4x4.json").read_text())
    assert payload["refused"]
    assert payload["estimates"] == {}


def test_constants_errors(tmp_path):
    mask = voxelize_box(tmp_path)
    argv = ["constants", str(mask), "--out", str(tmp_path / "runs")]
    assert main(argv + ["--which", "cq"]) == EXIT_INPUT
    assert main(argv + ["--which", "cp", "--eig-tol", "0"]) == EXIT_INPUT


def test_report(tmp_path):
    out = tmp_path / "runs"
    for name, h in (("coarse", 0.25), ("fine", 0.125)):
        mask = voxelize_box(tmp_path, name=name, h=h)
        argv = ["constants", str(mask), "--which", "cp", "--out", str(out)]
        assert main(argv) == EXIT_OK
    argv = ["zeromean", str(mask), "--N", "4", "--generate", "divfree"]
    assert main(argv + ["--out", str(out)]) == EXIT_OK

    assert main(["report", str(out), "--plot"]) == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["command"] == "report"
    assert len(report["runs"]) == 3
    assert [row["h"] for row in report["convergence"]] == [0.25, 0.125]
    extrapolated = report["extrapolated"]["c_p"]
    assert extrapolated["eigenvalue"] == pytest.approx(np.pi ** 2, rel=1e-3)
    assert len(report["sweeps"]) == 1
    assert report["bounds"]["d/pi"] == pytest.approx(np.sqrt(3) / np.pi)
    for name in ("convergence.csv", "ratio_vs_N.csv"):
        assert (out / name).exists()
    for name in ("convergence.png", "ratio_vs_N.png"):
        assert (out / name).stat().st_size > 0
    # Consolidated files are not reports themselves.
    assert main(["report", str(out), "--overwrite"]) == EXIT_OK


def test_report_without_runs(tmp_path):
    assert main(["report", str(tmp_path)]) == EXIT_MISSING
    assert main(["report", str(tmp_path / "missing")]) == EXIT_MISSING


@pytest.mark.parametrize(
    "error, code",
    (
        (FormatError("bad magic"), EXIT_INPUT),
        (FileExistsError("out"), EXIT_INPUT),
        (FileNotFoundError("mask"), EXIT_MISSING),
        (SolverConvergenceError("pcg did not converge", [1.0, 0.5], 1), EXIT_SOLVER),
        (RuntimeError("internal"), EXIT_FAILURE),
    ),
)
def test_exit_codes(error, code):
    assert exit_code(error) == code


def test_non_positive_estimate_is_an_input_error():
    with pytest.raises(ValueError, match="must be positive") as excinfo:
        ConstantEstimate(
            name="c_p",
            value=0.0,
            eigenvalue=1.0,
            h=0.25,
            iterations=1,
            eigen_residual=0.0,
            constraint_residual=0.0,
        )
    assert exit_code(excinfo.value) == EXIT_INPUT
