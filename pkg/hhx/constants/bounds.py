# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

r"""
Geometric bounds on convex domains and how the estimated constants compare to them:

$$c_{m,1} = c_{m,2} \le \max_i c_{pw,i} \le \max\{d_{23}, d_{13}, d_{12}\} / \pi,
\qquad c_{m,1} \le c_p \le d / \pi,$$

together with $c_f < c_p$, $c_{m,t} \le c_{m,n} = c_p$.
"""

import logging
import warnings
from dataclasses import dataclass, field
from functools import partial
from typing import Dict, List, Optional, Sequence

import numpy as np

from hhx.constants.eigen import EigenConfig
from hhx.constants.estimates import (
    ConstantEstimate,
    estimate_friedrichs,
    estimate_maxwell,
    estimate_mixed_maxwell,
    estimate_poincare,
    estimate_specialized_poincare,
)
from hhx.domain.diameters import diameter, projected_diameters
from hhx.domain.subdomains import nearest_divisor, plane_pairs
from hhx.domain.voxel import VoxelDomain
from hhx.utils.hhxutils import map_in_parallel
from hhx.utils.io import PathLike, write_csv, write_json

logger = logging.getLogger(__name__)

ALL_CONSTANTS = ("cp", "cf", "cm1", "cm2", "cmt", "cmn", "cpw")

# Discretization slack allowed when a grid estimate is compared to a continuum bound.
POINCARE_SLACK = 0.02
MAXWELL_SLACK = 0.03
# Relative difference tolerated between quantities that coincide in the continuum.
MAXWELL_EQUALITY_TOL = 0.01
MIXED_EQUALITY_TOL = 0.02

CSV_COLUMNS = ("row", "lhs", "rhs", "margin", "passed", "note")


@dataclass
class BoundsReport:
    r"""
    Geometry, estimates and the inequalities among them.

    Attributes:
        geometry: $d$, $d_{23}$, $d_{13}$, $d_{12}$, $d/\pi$, $\max d_{jk}/\pi$.
        estimates: Estimated constants by name.
        checks: One entry per inequality with both sides, the margin
            `rhs - lhs` and a pass flag.
        flags: `improvement` ($\max d_{jk} < d$), `conjecture_evidence`
            ($\max_i c_{pw,i} < c_p$), `convex`.
        refused: Constants were not estimated because the domain is not convex.
    """

    geometry: Dict[str, float]
    estimates: Dict[str, ConstantEstimate] = field(default_factory=dict)
    checks: List[Dict] = field(default_factory=list)
    flags: Dict[str, Optional[bool]] = field(default_factory=dict)
    refused: bool = False
    metadata: Dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self, extra: Optional[dict] = None) -> dict:
        payload = dict(
            geometry=self.geometry,
            estimates={k: v.to_dict() for k, v in sorted(self.estimates.items())},
            checks=self.checks,
            flags=self.flags,
            refused=self.refused,
            all_passed=self.all_passed,
        )
        payload.update(self.metadata)
        payload.update(extra or {})
        return payload

    def rows(self) -> List[Dict]:
        """Flat rows: one per geometric bound, constant and inequality."""
        rows = [
            dict(row=name, lhs=value, rhs="", margin="", passed="", note="geometry")
            for name, value in self.geometry.items()
        ]
        for name, estimate in sorted(self.estimates.items()):
            bound = estimate.bound
            rows.append(
                dict(
                    row=name,
                    lhs=estimate.value,
                    rhs="" if bound is None else bound,
                    margin="" if bound is None else bound - estimate.value,
                    passed="" if bound is None else estimate.value <= bound,
                    note=f"h={estimate.h:.6g}",
                )
            )
        rows.extend(
            dict(
                row=c["name"],
                lhs=c["lhs"],
                rhs=c["rhs"],
                margin=c["margin"],
                passed=c["passed"],
                note=c["note"],
            )
            for c in self.checks
        )
        return rows

    def write_json(self, path: PathLike, overwrite: bool = False, extra=None):
        return write_json(path, self.to_json(extra), overwrite=overwrite)

    def write_csv(self, path: PathLike, overwrite: bool = False):
        return write_csv(path, self.rows(), CSV_COLUMNS, overwrite=overwrite)


def geometry_bounds(domain: VoxelDomain, method: str = "auto") -> Dict[str, float]:
    d = diameter(domain, method)
    projected = projected_diameters(domain, method)
    bounds = dict(d=d)
    bounds.update(
        (f"d{j}{k}", d_jk) for (j, k), d_jk in zip(plane_pairs(), projected)
    )
    bounds.update(d_over_pi=d / np.pi, max_djk_over_pi=max(projected) / np.pi)
    return bounds


def _check(name: str, lhs: float, rhs: float, passed: bool, note: str = "") -> Dict:
    return dict(
        name=name,
        lhs=float(lhs),
        rhs=float(rhs),
        margin=float(rhs - lhs),
        passed=bool(passed),
        note=note,
    )


def _le(name: str, lhs: float, rhs: float, slack: float = 0.0) -> Dict:
    note = f"slack {slack:g}" if slack else ""
    return _check(name, lhs, rhs, lhs <= rhs * (1.0 + slack) + 1e-12 * abs(rhs), note)


def _close(name: str, a: float, b: float, tol: float) -> Dict:
    relative = abs(a - b) / abs(a)
    return _check(name, relative, tol, relative <= tol, "relative difference")


def chain_checks(
    estimates: Dict[str, ConstantEstimate], geometry: Dict[str, float]
) -> List[Dict]:
    """Evaluate every inequality whose ingredients are available."""
    value = {name: e.value for name, e in estimates.items()}
    checks = []
    pw = [value[n] for n in ("c_pw1", "c_pw2", "c_pw3") if n in value]
    maxwell = [n for n in ("c_m1", "c_m2") if n in value]

    d_pi, djk_pi = geometry["d_over_pi"], geometry["max_djk_over_pi"]

    if "c_p" in value:
        checks.append(_le("c_p <= d/pi", value["c_p"], d_pi, POINCARE_SLACK))
    if "c_f" in value and "c_p" in value:
        c_f, c_p = value["c_f"], value["c_p"]
        checks.append(_check("c_f < c_p", c_f, c_p, c_f < c_p))
    if "c_m1" in value and "c_m2" in value:
        checks.append(
            _close("c_m1 = c_m2", value["c_m1"], value["c_m2"], MAXWELL_EQUALITY_TOL)
        )
    for name in maxwell:
        c_m = value[name]
        checks.append(_le(f"{name} <= max d_jk/pi", c_m, djk_pi, MAXWELL_SLACK))
        if "c_p" in value:
            checks.append(_le(f"{name} <= c_p", c_m, value["c_p"], MAXWELL_SLACK))
        if pw:
            checks.append(_le(f"{name} <= max c_pw", c_m, max(pw), MAXWELL_SLACK))
    if pw:
        checks.append(_le("max c_pw <= max d_jk/pi", max(pw), djk_pi, MAXWELL_SLACK))
    if "c_mt" in value and "c_mn" in value:
        checks.append(_le("c_mt <= c_mn", value["c_mt"], value["c_mn"], 1e-8))
    if "c_mn" in value and "c_p" in value:
        checks.append(
            _close("c_mn = c_p", value["c_mn"], value["c_p"], MIXED_EQUALITY_TOL)
        )
    return checks


def _run(
    name: str, domain: VoxelDomain, config: EigenConfig, N: int
) -> List[ConstantEstimate]:
    if name == "cp":
        return [estimate_poincare(domain, config)]
    if name == "cf":
        return [estimate_friedrichs(domain, config)]
    if name == "cm1":
        return [estimate_maxwell(domain, "tangential", config)]
    if name == "cm2":
        return [estimate_maxwell(domain, "normal", config)]
    if name == "cmt":
        return [estimate_mixed_maxwell(domain, "tangential", config)]
    if name == "cmn":
        return [estimate_mixed_maxwell(domain, "normal", config)]
    if name == "cpw":
        estimates = []
        for axis in (1, 2, 3):
            n = domain.dims[axis - 1]
            N_axis = N if n % N == 0 else nearest_divisor(n, N)
            if N_axis != N:
                logger.info("Using N=%d on axis %d with %d cells.", N_axis, axis, n)
            estimates.append(
                estimate_specialized_poincare(domain, axis, N_axis, config)
            )
        return estimates
    raise ValueError(f"Unknown constant {name!r}; choose from {ALL_CONSTANTS}.")


def bounds_report(
    domain: VoxelDomain,
    config: Optional[EigenConfig] = None,
    which: Optional[Sequence[str]] = None,
    N: int = 8,
    estimates: Optional[Sequence[ConstantEstimate]] = None,
    num_workers: Optional[int] = None,
    show_progress_bars: bool = False,
) -> BoundsReport:
    r"""
    Assemble geometry bounds, estimated constants and the inequalities among them.

    Args:
        domain: Voxel domain.
        config: Eigen iteration settings.
        which: Constants to estimate, from `cp, cf, cm1, cm2, cmt, cmn, cpw`. `None`
            estimates all, an empty sequence none.
        N: Number of slabs for the specialized constants; replaced by the nearest
            divisor of the cell count where needed.
        estimates: Precomputed estimates, added to the report as they are.
        num_workers: Workers for independent estimates, capped by `HHX_THREADS`.
        show_progress_bars: Whether to show a progress bar over the estimates.

    Returns:
        Report; on non-convex domains constants are refused and only the geometry is
        reported.
    """
    config = EigenConfig() if config is None else config
    geometry = geometry_bounds(domain)
    flags = dict(
        improvement=bool(
            geometry["max_djk_over_pi"] < geometry["d_over_pi"] * (1.0 - 1e-12)
        ),
        convex=domain.convex,
        conjecture_evidence=None,
    )
    report = BoundsReport(geometry=geometry, flags=flags)
    report.metadata.update(eigen=config.to_dict(), h=domain.h, dims=list(domain.dims))

    which = list(ALL_CONSTANTS) if which is None else list(which)
    if not domain.convex:
        if which or estimates:
            warnings.warn(
                "The domain is not flagged convex; constants are refused and only "
                "geometric bounds are reported.",
                UserWarning,
            )
        report.refused = True
        return report

    computed = map_in_parallel(
        partial(_run, domain=domain, config=config, N=N),
        which,
        num_workers=num_workers,
        show_progress_bars=show_progress_bars,
        desc="Constants",
    )
    for estimate in [e for group in computed for e in group] + list(estimates or []):
        report.estimates[estimate.name] = estimate

    value = {name: e.value for name, e in report.estimates.items()}
    pw = [value[n] for n in ("c_pw1", "c_pw2", "c_pw3") if n in value]
    if pw and "c_p" in value:
        report.flags["conjecture_evidence"] = bool(max(pw) < value["c_p"])
    report.checks = chain_checks(report.estimates, geometry)
    if not flags["improvement"]:
        logger.info("max d_jk = d: the projected bound offers no improvement here.")
    return report
