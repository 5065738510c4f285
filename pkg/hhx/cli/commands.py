# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

"""The subcommands of `hhx`. Each takes the parsed arguments and a `RunConfig` and
returns an exit code; errors propagate to `hhx.cli.main`."""

import argparse
import json
import logging
import warnings
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from hhx.__version__ import __version__
from hhx.cli.config import EXIT_OK, RunConfig
from hhx.constants.bounds import bounds_report, geometry_bounds
from hhx.constants.estimates import (
    ConstantEstimate,
    estimate_specialized_poincare,
    richardson_extrapolate,
)
from hhx.domain.geometry import GeometrySpec
from hhx.domain.subdomains import slab, whole_slab
from hhx.domain.voxel import VoxelDomain, voxelize
from hhx.grid_calculus.fields import (
    CellField,
    EdgeField,
    FaceField,
    Field,
    NodeField,
    azimuthal,
    field_type,
    load_field,
)
from hhx.grid_calculus.grid import Flavor, Kind
from hhx.grid_calculus.operators import grad, grad_dual, rot, rot_dual
from hhx.helmholtz.krylov import SolverConfig
from hhx.helmholtz.projections import (
    decompose3,
    project_gradient,
    rotational_projection,
    vector_potential,
)
from hhx.user_input.user_input_checks import (
    check_resolution,
    process_axes,
    process_axis,
    process_constants,
    process_flavor,
)
from hhx.utils.io import ensure_writable, get_output_root, write_csv, write_json
from hhx.utils.plot import convergence_plot, save_figure, sweep_plot
from hhx.zeromean.checks import check_global, check_remark_partial, sweep

logger = logging.getLogger(__name__)

GENERATORS = (
    "random",
    "gradient",
    "rotational",
    "circulation",
    "divfree",
    "rotfree",
    "constant",
)

REPORT_NAME = "report.json"
CONVERGENCE_COLUMNS = ("constant", "h", "value", "eigenvalue", "bound", "source")
SWEEP_COLUMNS = (
    "theorem",
    "axes",
    "N",
    "h",
    "worst_ratio",
    "worst_relative_mean",
    "all_passed",
    "negative_control",
    "source",
)
_SUMMARY_KEYS = {
    "voxelize": ("d", "d23", "d13", "d12", "extents", "convex", "volume"),
    "decompose": ("decomposition", "relative_norms", "orthogonality", "reconstruction"),
    "zeromean": ("theorem", "N", "worst_ratio", "worst_relative_mean", "all_passed"),
    "constants": ("flags", "refused", "all_passed"),
}


def sidecar_path(mask_path: Union[str, Path]) -> Path:
    """`cube.hhxm` -> `cube.hhxm.json`."""
    mask_path = Path(mask_path)
    return mask_path.with_name(mask_path.name + ".json")


def load_domain(path: Union[str, Path], convex: Optional[bool] = None) -> VoxelDomain:
    """Read a mask file; convexity comes from `convex`, else from its sidecar."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No domain file {path}.")
    declared = False
    sidecar = sidecar_path(path)
    if sidecar.exists():
        declared = bool(json.loads(sidecar.read_text()).get("convex", False))
    else:
        logger.info("No sidecar next to %s; treating the domain as non-convex.", path)
    if convex is not None:
        declared = convex
    return VoxelDomain.load(path, convex=declared)


def _dims_label(domain: VoxelDomain) -> str:
    return "x".join(str(n) for n in domain.dims)


def _opposite(flavor: Flavor) -> Flavor:
    return Flavor.NATURAL if flavor == Flavor.ESSENTIAL else Flavor.ESSENTIAL


def potential_flavor(kind: Kind, flavor: Flavor) -> Flavor:
    """Flavor of the scalar potential whose gradients live in the space of `flavor`."""
    return flavor if kind == Kind.EDGE else _opposite(flavor)


def generate_field(
    domain: VoxelDomain,
    name: str,
    kind: Kind,
    flavor: Flavor,
    rng: np.random.Generator,
    config: Optional[SolverConfig] = None,
) -> Field:
    """A synthetic edge or face field of `flavor`.

    Args:
        name: `random`, `gradient` (exact discrete gradient), `rotational` (exact
            discrete rotation), `circulation` (azimuthal field about the x3 axis),
            `divfree` (face: exact rotation; edge: random minus its gradient part),
            `rotfree` (random minus its rotational part) or `constant` (all ones).
        kind: `Kind.EDGE` or `Kind.FACE`.
    """
    if kind not in (Kind.EDGE, Kind.FACE):
        raise ValueError(f"Only edge and face fields are generated, not {kind.name}.")
    cls = field_type(kind)
    scalar = potential_flavor(kind, flavor)
    if name == "random":
        return cls.random(domain, flavor, rng)
    if name == "gradient":
        if kind == Kind.EDGE:
            return grad(NodeField.random(domain, flavor, rng))
        return grad_dual(CellField.random(domain, scalar, rng), scalar)
    if name == "rotational" or (name == "divfree" and kind == Kind.FACE):
        if kind == Kind.EDGE:
            return rot_dual(FaceField.random(domain, flavor, rng), flavor)
        return rot(EdgeField.random(domain, flavor, rng))
    if name == "divfree":
        return project_gradient(cls.random(domain, flavor, rng), scalar, config)[1]
    if name == "rotfree":
        phi = cls.random(domain, flavor, rng)
        return phi - rotational_projection(phi, scalar, config)[0]
    if name == "circulation":
        return cls.from_function(domain, azimuthal(domain), flavor)
    if name == "constant":
        return cls.from_function(domain, lambda *x: (1.0, 1.0, 1.0), flavor)
    raise ValueError(f"Unknown generator {name!r}; choose from {GENERATORS}.")


def _input_field(
    args: argparse.Namespace,
    config: RunConfig,
    domain: VoxelDomain,
    kind: Kind,
    flavor: Flavor,
) -> Tuple[Field, dict]:
    if args.field is not None:
        phi = load_field(args.field, domain)
        if phi.kind != kind:
            raise ValueError(
                f"{args.field} holds a {phi.kind.name.lower()} field, this command "
                f"needs a {kind.name.lower()} field."
            )
        return phi, dict(field=Path(args.field).name)
    if args.generate is None:
        raise ValueError("Give an input field with --field or --generate.")
    rng = np.random.default_rng(config.seed)
    phi = generate_field(domain, args.generate, kind, flavor, rng, config.solver)
    logger.info("Generated a %s %r field.", kind.name.lower(), args.generate)
    return phi, dict(generated=args.generate, kind=kind.name.lower())


def _output_dir(config: RunConfig) -> Path:
    out = Path(get_output_root()) if config.out is None else config.out
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_voxelize(args: argparse.Namespace, config: RunConfig) -> int:
    if args.print_schema:
        print(json.dumps(GeometrySpec.schema_document(), indent=2, sort_keys=True))
        return EXIT_OK
    if args.spec is None:
        raise ValueError("voxelize needs a geometry file or --print-schema.")
    spec = GeometrySpec.from_json(Path(args.spec).read_text())
    if args.h is not None:
        spec = GeometrySpec.model_validate(dict(spec.model_dump(), h=args.h))
    domain = voxelize(spec)
    check_resolution(domain.dims)

    out = config.out or Path(args.spec).with_suffix(".hhxm")
    sidecar = ensure_writable(sidecar_path(out), config.overwrite)
    domain.save(out, overwrite=config.overwrite)
    payload = domain.describe()
    payload.update(geometry_bounds(domain))
    payload.update(config.provenance(domain))
    write_json(sidecar, payload, overwrite=True)
    print(
        f"wrote {out}: dims {domain.dims}, {domain.num_cells} cells, "
        f"d={payload['d']:.6f}"
    )
    return EXIT_OK


def cmd_decompose(args: argparse.Namespace, config: RunConfig) -> int:
    domain = load_domain(args.domain, args.convex)
    kind = Kind[args.kind.upper()]
    scalar = Flavor.ESSENTIAL if args.flavor == "hd1" else Flavor.NATURAL
    # The space flavor of the fields that the setting decomposes.
    space = scalar if kind == Kind.EDGE else _opposite(scalar)
    phi, origin = _input_field(args, config, domain, kind, space)

    result = decompose3(phi, args.flavor, config.solver)
    extra = config.provenance(domain)
    extra.update(origin)
    if args.vector_potential:
        if kind != Kind.FACE:
            raise ValueError("--vector-potential needs a face field.")
        potential = vector_potential(result.rotational + result.harmonic, config.solver)
        extra["vector_potential"] = dict(
            rot_residual=potential.rot_residual,
            divergence_residual=potential.divergence_residual,
            obstructed=potential.obstructed,
            iterations=potential.iterations,
        )
    directory = _output_dir(config) / f"decompose_{args.flavor}_{_dims_label(domain)}"
    path = result.save(directory, overwrite=config.overwrite, extra=extra)
    if args.vector_potential:
        potential.potential.save(directory / "potential.hhxf", config.overwrite)

    norms = result.relative_norms()
    print(
        f"wrote {path}: gradient {norms['gradient']:.3e}, harmonic "
        f"{norms['harmonic']:.3e}, rotational {norms['rotational']:.3e}"
    )
    return EXIT_OK


def cmd_zeromean(args: argparse.Namespace, config: RunConfig) -> int:
    domain = load_domain(args.domain, args.convex)
    theorem = args.theorem
    kind = Kind.FACE if theorem == "D" else Kind.EDGE
    if theorem == "global" and args.kind is not None:
        kind = Kind[args.kind.upper()]
    phi, origin = _input_field(args, config, domain, kind, process_flavor(args.flavor))
    det = config.deterministic

    axes = []
    if theorem == "D":
        axis = process_axis(args.axis)
        axes = [axis]
        report = sweep(phi, axis, args.N, det, None, config.show_progress_bars)
        name = f"zeromean_D_{axis}_N{args.N}"
    elif theorem == "R":
        axes = list(process_axes(args.axes))
        report = sweep(phi, axes, args.N, det, None, config.show_progress_bars)
        name = f"zeromean_R_{axes[0]}{axes[1]}_N{args.N}"
    elif theorem == "remark":
        axis = process_axis(args.axis)
        axes = [axis]
        if args.interval is None:
            region = whole_slab(domain, axis)
        else:
            alpha, beta = (float(v) for v in args.interval.split(","))
            region = slab(domain, axis, alpha, beta, snap=args.snap)
        report = check_remark_partial(phi, axis, region, deterministic=det)
        name = f"zeromean_remark_{axis}"
    else:
        report = check_global(phi, deterministic=det)
        name = f"zeromean_global_{kind.name.lower()}"

    extra = config.provenance(domain)
    extra.update(origin, axes=axes)
    stem = _output_dir(config) / f"{name}_{_dims_label(domain)}"
    csv_path = ensure_writable(stem.with_suffix(".csv"), config.overwrite)
    json_path = ensure_writable(stem.with_suffix(".json"), config.overwrite)
    report.write_csv(csv_path, overwrite=True)
    report.write_json(json_path, overwrite=True, extra=extra)

    if report.negative_control:
        logger.warning("Natural-flavor input: rows are negative controls.")
    print(
        f"wrote {csv_path}: {len(report)} rows, worst ratio {report.worst_ratio:.3e}, "
        f"worst relative mean {report.worst_relative_mean:.3e}"
    )
    return EXIT_OK


def cmd_constants(args: argparse.Namespace, config: RunConfig) -> int:
    domain = load_domain(args.domain, args.convex)
    which = process_constants(args.which)
    estimates = []
    if args.axis is not None and "cpw" in which:
        which.remove("cpw")
        if domain.convex:
            axis = process_axis(args.axis)
            estimates.append(
                estimate_specialized_poincare(domain, axis, args.N, config.eigen)
            )
    report = bounds_report(
        domain,
        config.eigen,
        which=which,
        N=args.N,
        estimates=estimates,
        show_progress_bars=config.show_progress_bars,
    )

    stem = _output_dir(config) / f"constants_{_dims_label(domain)}"
    json_path = ensure_writable(stem.with_suffix(".json"), config.overwrite)
    csv_path = ensure_writable(stem.with_suffix(".csv"), config.overwrite)
    report.write_json(json_path, overwrite=True, extra=config.provenance(domain))
    report.write_csv(csv_path, overwrite=True)

    if report.refused:
        print(f"wrote {json_path}: non-convex domain, geometric bounds only")
    else:
        failed = [c["name"] for c in report.checks if not c["passed"]]
        status = "all checks passed" if not failed else f"failed: {', '.join(failed)}"
        print(f"wrote {json_path}: {len(report.estimates)} estimates, {status}")
    return EXIT_OK


def collect_reports(run_dir: Union[str, Path]) -> List[Tuple[str, dict]]:
    """Return `(relative path, payload)` of every hhx report below `run_dir`.

    Raises:
        FileNotFoundError: If the directory is missing or holds no report.
    """
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"No run directory {run_dir}.")
    found = []
    for path in sorted(run_dir.rglob("*.json")):
        if path.name == REPORT_NAME:
            continue
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError:
            logger.warning("Skipping unreadable %s.", path)
            continue
        if isinstance(payload, dict) and payload.get("command") in _SUMMARY_KEYS:
            found.append((path.relative_to(run_dir).as_posix(), payload))
    if not found:
        raise FileNotFoundError(f"No hhx reports under {run_dir}.")
    return found


def convergence_rows(reports: List[Tuple[str, dict]]) -> List[Dict]:
    rows = []
    for source, payload in reports:
        if payload["command"] != "constants":
            continue
        for estimate in payload.get("estimates", {}).values():
            bound = estimate.get("bound")
            rows.append(
                dict(
                    constant=estimate["name"],
                    h=estimate["h"],
                    value=estimate["value"],
                    eigenvalue=estimate["eigenvalue"],
                    bound="" if bound is None else bound,
                    source=source,
                )
            )
    return sorted(rows, key=lambda r: (r["constant"], -r["h"], r["source"]))


def extrapolate(rows: List[Dict], reports: List[Tuple[str, dict]]) -> Dict[str, Dict]:
    """Two-grid extrapolation per constant, from its two finest grids.

    Warns when three or more grids of a constant do not move in one direction.
    """
    estimates = {
        (source, e["name"]): e
        for source, payload in reports
        if payload["command"] == "constants"
        for e in payload.get("estimates", {}).values()
    }
    by_constant = defaultdict(list)
    for row in rows:
        by_constant[row["constant"]].append(estimates[(row["source"], row["constant"])])

    extrapolated = {}
    for name, series in sorted(by_constant.items()):
        series = sorted(series, key=lambda e: -e["h"])
        values = [e["value"] for e in series]
        steps = np.sign(np.diff(values))
        if len(steps) > 1 and len(set(steps[steps != 0])) > 1:
            warnings.warn(
                f"Estimates of {name} are not monotone under refinement: {values}.",
                UserWarning,
            )
        if len({e["h"] for e in series}) < 2:
            continue
        coarse, fine = (ConstantEstimate(**e) for e in series[-2:])
        if coarse.h == fine.h:
            continue
        result = richardson_extrapolate(coarse, fine)
        extrapolated[name] = dict(
            value=result.value, eigenvalue=result.eigenvalue, h=[coarse.h, fine.h]
        )
    return extrapolated


def sweep_rows(reports: List[Tuple[str, dict]]) -> List[Dict]:
    rows = [
        dict(
            theorem=payload["theorem"],
            axes=",".join(str(a) for a in payload.get("axes", [])),
            N=payload["N"],
            h=payload["h"],
            worst_ratio=payload["worst_ratio"],
            worst_relative_mean=payload["worst_relative_mean"],
            all_passed=payload["all_passed"],
            negative_control=payload["negative_control"],
            source=source,
        )
        for source, payload in reports
        if payload["command"] == "zeromean" and "N" in payload
    ]
    return sorted(rows, key=lambda r: (r["theorem"], r["axes"], r["h"], r["N"]))


def _summary(source: str, payload: dict) -> dict:
    keys = _SUMMARY_KEYS[payload["command"]]
    entry = {k: payload[k] for k in keys if k in payload}
    entry.update(source=source, command=payload["command"], h=payload.get("h"))
    return entry


def cmd_report(args: argparse.Namespace, config: RunConfig) -> int:
    reports = collect_reports(args.run_dir)
    out = Path(args.run_dir) if config.out is None else config.out
    out.mkdir(parents=True, exist_ok=True)
    paths = [
        ensure_writable(out / name, config.overwrite)
        for name in (REPORT_NAME, "convergence.csv", "ratio_vs_N.csv")
    ]

    convergence = convergence_rows(reports)
    sweeps = sweep_rows(reports)
    bounds = {}
    for _, payload in reports:
        if payload["command"] == "constants":
            geometry = payload["geometry"]
            bounds = {
                "d/pi": geometry["d_over_pi"],
                "max d_jk/pi": geometry["max_djk_over_pi"],
            }
            break
    consolidated = dict(
        command="report",
        version=__version__,
        runs=[_summary(source, payload) for source, payload in reports],
        convergence=convergence,
        extrapolated=extrapolate(convergence, reports),
        sweeps=sweeps,
        bounds=bounds,
    )
    write_json(paths[0], consolidated, overwrite=True)
    write_csv(paths[1], convergence, CONVERGENCE_COLUMNS, overwrite=True)
    write_csv(paths[2], sweeps, SWEEP_COLUMNS, overwrite=True)

    if args.plot:
        if convergence:
            fig, _ = convergence_plot(convergence, bounds)
            save_figure(fig, ensure_writable(out / "convergence.png", config.overwrite))
        if sweeps:
            fig, _ = sweep_plot(sweeps)
            save_figure(fig, ensure_writable(out / "ratio_vs_N.png", config.overwrite))
    print(
        f"wrote {paths[0]}: {len(reports)} runs, {len(convergence)} estimates, "
        f"{len(sweeps)} sweeps"
    )
    return EXIT_OK
