# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from collections import defaultdict
from collections.abc import Mapping
from typing import Dict, List, Optional, Sequence

import matplotlib as mpl

mpl.use("Agg")

from matplotlib import pyplot as plt  # noqa: E402


def _update(d: Dict, u: Mapping) -> Dict:
    # Nested dict update, so that users can override single options.
    for k, v in u.items():
        dv = d.get(k, {})
        if isinstance(dv, Mapping) and isinstance(v, Mapping):
            d[k] = _update(dict(dv), v)
        else:
            d[k] = v
    return d


def _get_default_opts() -> Dict:
    return dict(
        figsize=(6, 4),
        marker="o",
        logx=True,
        title="",
        bound_style=dict(linestyle="--", linewidth=1.0, color="gray"),
    )


def _format_axis(ax, xlabel: str = "", ylabel: str = "", logx: bool = False):
    for loc in ["right", "top"]:
        ax.spines[loc].set_visible(False)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logx:
        ax.set_xscale("log")
    return ax


def convergence_plot(
    rows: List[Dict],
    bounds: Optional[Dict[str, float]] = None,
    opts: Optional[Dict] = None,
):
    """Plot estimated constants against the grid spacing.

    Args:
        rows: Dicts with keys `constant`, `h` and `value`.
        bounds: Horizontal reference lines, e.g. `{"d/pi": 0.55}`.
        opts: Overrides of the default options.

    Returns:
        Figure and axis.
    """
    opts = _update(_get_default_opts(), opts or {})
    series = defaultdict(list)
    for row in rows:
        series[row["constant"]].append((row["h"], row["value"]))

    fig, ax = plt.subplots(figsize=opts["figsize"])
    for name, points in sorted(series.items()):
        points.sort()
        ax.plot(*zip(*points), marker=opts["marker"], label=name)
    for label, value in sorted((bounds or {}).items()):
        ax.axhline(value, **opts["bound_style"])
        ax.annotate(label, (1.0, value), xycoords=("axes fraction", "data"))
    _format_axis(ax, xlabel="h", ylabel="estimate", logx=opts["logx"])
    if opts["title"]:
        ax.set_title(opts["title"])
    ax.legend(frameon=False)
    return fig, ax


def sweep_plot(rows: Sequence[Dict], opts: Optional[Dict] = None):
    """Plot the worst zero-mean ratio of sweeps against the number of slabs `N`."""
    opts = _update(_get_default_opts(), opts or {})
    series = defaultdict(list)
    for row in rows:
        series[row["theorem"]].append((row["N"], row["worst_ratio"]))
    fig, ax = plt.subplots(figsize=opts["figsize"])
    for name, points in sorted(series.items()):
        points.sort()
        ax.plot(*zip(*points), marker=opts["marker"], label=f"theorem {name}")
    _format_axis(ax, xlabel="N", ylabel="worst |mean| / bound", logx=False)
    ax.legend(frameon=False)
    return fig, ax


def save_figure(fig, path) -> None:
    # Fixed metadata keeps reruns byte-identical.
    fig.savefig(path, metadata={"Software": None}, dpi=100)
    plt.close(fig)
