# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from __future__ import annotations

from hhx.utils.plot import convergence_plot, save_figure, sweep_plot


def test_convergence_plot(tmp_path):
    rows = [
        dict(constant="c_p", h=0.25, value=0.3266),
        dict(constant="c_p", h=0.125, value=0.3204),
        dict(constant="c_f", h=0.25, value=0.1886),
    ]
    fig, ax = convergence_plot(rows, {"d/pi": 0.5513})
    assert len(ax.get_lines()) >= 3
    save_figure(fig, tmp_path / "convergence.png")
    assert (tmp_path / "convergence.png").stat().st_size > 0


def test_sweep_plot(tmp_path):
    rows = [
        dict(theorem="D", N=N, worst_ratio=1e-14 / N, axes="1") for N in (1, 2, 4)
    ]
    fig, ax = sweep_plot(rows)
    assert len(ax.get_lines()) == 1
    save_figure(fig, tmp_path / "sweep.png")
    assert (tmp_path / "sweep.png").exists()
