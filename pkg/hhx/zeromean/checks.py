# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

r"""
Local zero-mean properties of fields with vanishing boundary traces.

For an essential face field, every slab $\Omega_i$ satisfies

$$\Big|\int_{\Omega_i} \varphi_i\Big|
\le (\beta_i - \alpha_i)\,\|\mathrm{div}\,\varphi\|_{L^1(\Omega)},$$

and for an essential edge field, every beam $\Omega_{jk}$ and $(i, j, k)$ a permutation

$$\Big|\int_{\Omega_{jk}} \varphi_i\Big| \le (\beta_j - \alpha_j)\,
\|(\mathrm{rot}\,\varphi)_k\|_{L^1(\Omega_k)},$$

with $\Omega_k$ the slab on the beam's $k$-interval. On grid-aligned subdomains both
hold exactly in the discrete setting: the plane sums of the normal component telescope.
"""

import logging
from functools import partial
from typing import List, Optional, Sequence, Union

import numpy as np

from hhx.domain.subdomains import (
    BeamSubdomain,
    SlabSubdomain,
    uniform_beams,
    uniform_decomposition,
    whole_slab,
)
from hhx.grid_calculus.fields import EdgeField, FaceField
from hhx.grid_calculus.grid import Flavor
from hhx.grid_calculus.operators import component_mean, div, norm_l1, norm_l2, rot
from hhx.types import Axis, AxisPair
from hhx.utils.hhxutils import map_in_parallel
from hhx.utils.typechecks import is_axis, is_axis_pair
from hhx.zeromean.report import ZeroMeanReport, ZeroMeanRow, make_row

logger = logging.getLogger(__name__)

# Relative size of (rot phi)_k below which it counts as zero for the partial remark.
HYPOTHESIS_TOL = 1e-10
# Slack factor of the partial remark bound, relative to the row scale.
REMARK_SLACK = 1e-10


def _third_axis(j: int, k: int) -> int:
    return 6 - j - k


def _require(phi, field_type, allow_natural: bool, trace: str):
    if not isinstance(phi, field_type):
        raise TypeError(f"Expected a {field_type.__name__}, got {type(phi).__name__}.")
    if phi.flavor == Flavor.NATURAL and not allow_natural:
        raise ValueError(f"hypothesis requires vanishing {trace} trace")
    return phi.flavor == Flavor.NATURAL


def _scale(phi_norm: float, volume: float) -> float:
    return phi_norm * float(np.sqrt(volume))


def _slab_row(
    slab: SlabSubdomain,
    phi: FaceField,
    div_l1: float,
    phi_norm: float,
    negative: bool,
    deterministic: bool,
) -> ZeroMeanRow:
    i = slab.axis
    mean = component_mean(phi, i, slab, deterministic)
    return make_row(
        theorem="D",
        subdomain=slab.label(),
        component=i,
        axes=(i,),
        intervals=(slab.interval,),
        mean=mean,
        bound=slab.width * div_l1,
        scale=_scale(phi_norm, slab.volume),
        negative_control=negative,
    )


def _beam_row(
    beam: BeamSubdomain,
    phi: EdgeField,
    rot_phi: FaceField,
    phi_norm: float,
    negative: bool,
    deterministic: bool,
) -> ZeroMeanRow:
    j, k = beam.axes
    i = _third_axis(j, k)
    slab_j, slab_k = beam.slabs
    mean = component_mean(phi, i, beam, deterministic)
    rot_l1 = norm_l1(rot_phi, component=k, region=slab_k, deterministic=deterministic)
    return make_row(
        theorem="R",
        subdomain=beam.label(),
        component=i,
        axes=(j, k),
        intervals=beam.intervals,
        mean=mean,
        bound=slab_j.width * rot_l1,
        scale=_scale(phi_norm, beam.volume),
        negative_control=negative,
    )


def _metadata(phi, num_subdomains: int) -> dict:
    return dict(
        h=phi.domain.h,
        dims=list(phi.domain.dims),
        flavor=phi.flavor.name.lower(),
        num_subdomains=num_subdomains,
    )


def check_thm_D(
    phi: FaceField,
    slabs: Sequence[SlabSubdomain],
    allow_natural: bool = False,
    deterministic: bool = False,
    num_workers: Optional[int] = None,
    show_progress_bars: bool = False,
) -> ZeroMeanReport:
    r"""
    Compare $|\int_{\Omega_i}\varphi_i|$ with $(\beta_i-\alpha_i)\|\mathrm{div}\,
    \varphi\|_{L^1(\Omega)}$ on each slab.

    Args:
        phi: Essential face field.
        slabs: Slabs, on any axes.
        allow_natural: Evaluate natural fields as negative controls instead of
            failing.
        deterministic: Exactly rounded sums.
        num_workers: Workers for long slab lists, capped by `HHX_THREADS`.
        show_progress_bars: Whether to show a progress bar.

    Raises:
        ValueError: If `phi` is natural and `allow_natural` is False.
    """
    negative = _require(phi, FaceField, allow_natural, "normal")
    div_l1 = norm_l1(div(phi), deterministic=deterministic)
    phi_norm = norm_l2(phi, deterministic)
    rows = map_in_parallel(
        partial(
            _slab_row,
            phi=phi,
            div_l1=div_l1,
            phi_norm=phi_norm,
            negative=negative,
            deterministic=deterministic,
        ),
        list(slabs),
        num_workers=num_workers,
        show_progress_bars=show_progress_bars,
        desc="Slabs",
    )
    report = ZeroMeanReport(rows, "D", metadata=_metadata(phi, len(rows)))
    report.metadata["div_l1"] = div_l1
    return report


def check_thm_R(
    phi: EdgeField,
    beams: Sequence[BeamSubdomain],
    allow_natural: bool = False,
    deterministic: bool = False,
    num_workers: Optional[int] = None,
    show_progress_bars: bool = False,
) -> ZeroMeanReport:
    r"""
    Compare $|\int_{\Omega_{jk}}\varphi_i|$ with $(\beta_j-\alpha_j)
    \|(\mathrm{rot}\,\varphi)_k\|_{L^1(\Omega_k)}$ on each beam.

    The order of the beam's axis pair selects $j$ and $k$; $i$ is the remaining axis.

    Raises:
        ValueError: If `phi` is natural and `allow_natural` is False.
    """
    negative = _require(phi, EdgeField, allow_natural, "tangential")
    rot_phi = rot(phi)
    phi_norm = norm_l2(phi, deterministic)
    rows = map_in_parallel(
        partial(
            _beam_row,
            phi=phi,
            rot_phi=rot_phi,
            phi_norm=phi_norm,
            negative=negative,
            deterministic=deterministic,
        ),
        list(beams),
        num_workers=num_workers,
        show_progress_bars=show_progress_bars,
        desc="Beams",
    )
    return ZeroMeanReport(rows, "R", metadata=_metadata(phi, len(rows)))


def check_remark_partial(
    phi: EdgeField,
    axis: Axis,
    region: SlabSubdomain,
    hypothesis_tol: float = HYPOTHESIS_TOL,
    allow_natural: bool = False,
    deterministic: bool = False,
) -> ZeroMeanReport:
    r"""
    Zero means from a single vanishing rotation component.

    If $(\mathrm{rot}\,\varphi)_k = 0$ in a slab $\omega$ on axis $k$ (bounding
    planes included), the components $\varphi_i$, $i \neq k$, have zero mean on
    $\omega$. Rows of fields that violate the hypothesis are marked, not rejected.

    Args:
        phi: Essential edge field.
        axis: The axis $k$.
        region: Slab on axis $k$.
        hypothesis_tol: Threshold on $h\|(\mathrm{rot}\,\varphi)_k\|_{L^1(\omega)}$
            relative to $\|\varphi\|\sqrt{|\omega|}$.
    """
    if not is_axis(axis):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}.")
    if region.axis != axis:
        raise ValueError(f"Region must be a slab on axis {axis}, not {region.axis}.")
    negative = _require(phi, EdgeField, allow_natural, "tangential")
    h = phi.domain.h
    rot_k = norm_l1(
        rot(phi), component=axis, region=region, deterministic=deterministic
    )
    scale = _scale(norm_l2(phi, deterministic), region.volume)
    residual = rot_k * h / scale if scale > 0 else rot_k * h
    hypothesis_met = residual <= hypothesis_tol
    if not hypothesis_met:
        logger.info(
            "Partial rotation hypothesis not met on %s: residual %.3e.",
            region.label(),
            residual,
        )

    rows = []
    for i in (a for a in (1, 2, 3) if a != axis):
        j = _third_axis(i, axis)
        mean = component_mean(phi, i, region, deterministic)
        rows.append(
            make_row(
                theorem="remark",
                subdomain=region.label(),
                component=i,
                axes=(j, axis),
                intervals=(region.interval,),
                mean=mean,
                bound=phi.domain.extents[j - 1] * rot_k,
                scale=scale,
                slack_factor=REMARK_SLACK,
                hypothesis_met=hypothesis_met,
                negative_control=negative,
            )
        )
    report = ZeroMeanReport(rows, "remark", metadata=_metadata(phi, 1))
    report.metadata["hypothesis_residual"] = residual
    report.tolerances.update(slack=REMARK_SLACK, hypothesis=hypothesis_tol)
    return report


def sweep(
    phi: Union[EdgeField, FaceField],
    axes: Union[Axis, AxisPair],
    N: int,
    deterministic: bool = False,
    num_workers: Optional[int] = None,
    show_progress_bars: bool = False,
) -> ZeroMeanReport:
    r"""
    Run the zero-mean check over all `N` uniform slabs along `axes` (face fields) or
    all nonempty beams of an `N x N` grid on the pair `axes` (edge fields).

    Natural fields are accepted and their rows flagged as negative controls.
    """
    if is_axis(axes):
        slabs = uniform_decomposition(phi.domain, axes, N, projected=0.0).slabs
        report = check_thm_D(
            phi,
            slabs,
            allow_natural=True,
            deterministic=deterministic,
            num_workers=num_workers,
            show_progress_bars=show_progress_bars,
        )
    elif is_axis_pair(axes):
        beams = uniform_beams(phi.domain, tuple(axes), N)
        report = check_thm_R(
            phi,
            beams,
            allow_natural=True,
            deterministic=deterministic,
            num_workers=num_workers,
            show_progress_bars=show_progress_bars,
        )
    else:
        raise ValueError(f"axes must be an axis or an axis pair, got {axes}.")
    report.metadata["N"] = N
    logger.info(
        "Sweep %s with N=%d: worst ratio %.3e, worst relative mean %.3e.",
        report.theorem,
        N,
        report.worst_ratio,
        report.worst_relative_mean,
    )
    return report


def check_global(
    phi: Union[EdgeField, FaceField], deterministic: bool = False
) -> ZeroMeanReport:
    """Zero-mean check over the whole domain, one row per component."""
    domain = phi.domain
    if isinstance(phi, FaceField):
        slabs: List[SlabSubdomain] = [whole_slab(domain, i) for i in (1, 2, 3)]
        return check_thm_D(phi, slabs, allow_natural=True, deterministic=deterministic)
    beams = [
        BeamSubdomain(
            domain, (j, k), ((0, domain.dims[j - 1]), (0, domain.dims[k - 1]))
        )
        for j, k in ((2, 3), (3, 1), (1, 2))
    ]
    return check_thm_R(phi, beams, allow_natural=True, deterministic=deterministic)
