# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from hhx.utils.io import PathLike, write_csv, write_json

# Rounding slack relative to ||phi|| * sqrt(volume of the region).
SLACK_FACTOR = 1e-12
# Relative tolerance on the inequality itself.
INEQUALITY_TOL = 1e-10

COLUMNS = (
    "theorem",
    "subdomain",
    "component",
    "axes",
    "intervals",
    "mean",
    "bound",
    "slack",
    "relative_mean",
    "ratio",
    "passed",
    "hypothesis_met",
    "negative_control",
    "note",
)


@dataclass
class ZeroMeanRow:
    """One component over one subdomain.

    `ratio` is `|mean| / (bound + slack)`; `relative_mean` is `|mean|` divided by
    `||phi|| * sqrt(volume)` of the subdomain.
    """

    theorem: str
    subdomain: str
    component: int
    axes: str
    intervals: str
    mean: float
    bound: float
    slack: float
    relative_mean: float
    ratio: float
    passed: bool
    hypothesis_met: bool = True
    negative_control: bool = False
    note: str = ""


def make_row(
    theorem: str,
    subdomain: str,
    component: int,
    axes,
    intervals,
    mean: float,
    bound: float,
    scale: float,
    slack_factor: float = SLACK_FACTOR,
    hypothesis_met: bool = True,
    negative_control: bool = False,
    note: str = "",
) -> ZeroMeanRow:
    slack = slack_factor * scale
    denominator = bound + slack
    magnitude = abs(mean)
    if denominator > 0:
        ratio = magnitude / denominator
    else:
        ratio = 0.0 if mean == 0 else float("inf")
    relative = magnitude / scale if scale > 0 else magnitude
    passed = magnitude <= bound * (1.0 + INEQUALITY_TOL) + slack
    if negative_control and not note:
        note = "negative control: natural flavor"
    if not hypothesis_met and not note:
        note = "hypothesis not met"
    return ZeroMeanRow(
        theorem=theorem,
        subdomain=subdomain,
        component=component,
        axes=",".join(str(a) for a in axes),
        intervals=";".join(f"{a:.12g}:{b:.12g}" for a, b in intervals),
        mean=float(mean),
        bound=float(bound),
        slack=float(slack),
        relative_mean=float(relative),
        ratio=float(ratio),
        passed=bool(passed),
        hypothesis_met=bool(hypothesis_met),
        negative_control=bool(negative_control),
        note=note,
    )


@dataclass
class ZeroMeanReport:
    rows: List[ZeroMeanRow]
    theorem: str
    tolerances: Dict[str, float] = field(
        default_factory=lambda: dict(slack=SLACK_FACTOR, inequality=INEQUALITY_TOL)
    )
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def worst_ratio(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    @property
    def worst_relative_mean(self) -> float:
        return max((r.relative_mean for r in self.rows), default=0.0)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def negative_control(self) -> bool:
        return any(r.negative_control for r in self.rows)

    def extend(self, other: "ZeroMeanReport") -> "ZeroMeanReport":
        return ZeroMeanReport(
            self.rows + other.rows,
            self.theorem,
            dict(self.tolerances),
            dict(self.metadata),
        )

    def to_rows(self) -> List[Dict[str, Any]]:
        return [asdict(r) for r in self.rows]

    def to_json(self, extra: Optional[dict] = None) -> Dict[str, Any]:
        payload = dict(
            theorem=self.theorem,
            tolerances=self.tolerances,
            worst_ratio=self.worst_ratio,
            worst_relative_mean=self.worst_relative_mean,
            all_passed=self.all_passed,
            negative_control=self.negative_control,
            rows=self.to_rows(),
        )
        payload.update(self.metadata)
        payload.update(extra or {})
        return payload

    def write_csv(self, path: PathLike, overwrite: bool = False):
        return write_csv(path, self.to_rows(), COLUMNS, overwrite=overwrite)

    def write_json(self, path: PathLike, overwrite: bool = False, extra=None):
        return write_json(path, self.to_json(extra), overwrite=overwrite)
