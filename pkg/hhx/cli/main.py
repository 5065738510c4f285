# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import argparse
import logging
import sys
from typing import Optional, Sequence

from hhx.__version__ import __version__
from hhx.cli.commands import (
    GENERATORS,
    cmd_constants,
    cmd_decompose,
    cmd_report,
    cmd_voxelize,
    cmd_zeromean,
)
from hhx.cli.config import EXIT_FAILURE, RunConfig, configure_logging, exit_code

logger = logging.getLogger(__name__)

COMMANDS = dict(
    voxelize=cmd_voxelize,
    decompose=cmd_decompose,
    zeromean=cmd_zeromean,
    constants=cmd_constants,
    report=cmd_report,
)

EPILOG = """exit codes:
  0  success, possibly with warnings
  2  invalid input (arguments, geometry, file format, existing output)
  3  missing data (input file or reports not found)
  4  a solver did not converge
"""


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=0, help="Seed of generated data.")
    parser.add_argument(
        "--deterministic",
        action="store_true",
        help="Exactly rounded reductions; reruns are byte-identical.",
    )
    parser.add_argument(
        "--overwrite", action="store_true", help="Replace existing output files."
    )
    parser.add_argument("--progress", action="store_true", help="Show progress bars.")
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
    )
    parser.add_argument("--out", default=None, help="Output file or directory.")


def _domain_input(parser: argparse.ArgumentParser):
    parser.add_argument("domain", help="Mask file written by `hhx voxelize`.")
    convex = parser.add_mutually_exclusive_group()
    convex.add_argument(
        "--convex",
        dest="convex",
        action="store_true",
        default=None,
        help="Declare the domain convex, overriding its sidecar.",
    )
    convex.add_argument("--non-convex", dest="convex", action="store_false")
    parser.set_defaults(convex=None)


def _field_input(parser: argparse.ArgumentParser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--field", default=None, help="Field file (HHXF).")
    source.add_argument(
        "--generate", choices=GENERATORS, default=None, help="Synthetic input field."
    )


def _tolerance(parser: argparse.ArgumentParser, default: float = 1e-10):
    parser.add_argument(
        "--tol", type=float, default=default, help="Relative residual of linear solves."
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hhx",
        description="Helmholtz decompositions, zero-mean checks and Maxwell constants "
        "on voxel domains.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"hhx {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    voxelize = subparsers.add_parser("voxelize", help="Rasterize a geometry file.")
    voxelize.add_argument("spec", nargs="?", default=None, help="GeometrySpec JSON.")
    voxelize.add_argument("--h", type=float, default=None, help="Grid spacing.")
    voxelize.add_argument(
        "--print-schema", action="store_true", help="Print the JSON schema and exit."
    )
    _common(voxelize)

    decompose = subparsers.add_parser("decompose", help="Three-part decomposition.")
    _domain_input(decompose)
    _field_input(decompose)
    decompose.add_argument("--flavor", choices=("hd1", "hd2"), default="hd1")
    decompose.add_argument("--kind", choices=("edge", "face"), default="edge")
    decompose.add_argument(
        "--vector-potential",
        action="store_true",
        help="Also compute a vector potential of the divergence-free part.",
    )
    _tolerance(decompose)
    _common(decompose)

    zeromean = subparsers.add_parser("zeromean", help="Local zero-mean checks.")
    _domain_input(zeromean)
    _field_input(zeromean)
    zeromean.add_argument(
        "--theorem", choices=("D", "R", "remark", "global"), default="D"
    )
    zeromean.add_argument("--axis", default="1", help="Slab axis (D, remark).")
    zeromean.add_argument("--axes", default="2,3", help="Beam axes j,k (R).")
    zeromean.add_argument("--N", type=int, default=8, help="Subdomains per axis.")
    zeromean.add_argument(
        "--interval", default=None, help="alpha,beta of the remark slab."
    )
    zeromean.add_argument(
        "--snap", action="store_true", help="Snap off-grid interval ends outward."
    )
    zeromean.add_argument(
        "--flavor", default="essential", help="Flavor of generated fields."
    )
    zeromean.add_argument(
        "--kind", choices=("edge", "face"), default=None, help="Field kind (global)."
    )
    _tolerance(zeromean)
    _common(zeromean)

    constants = subparsers.add_parser("constants", help="Estimate Maxwell constants.")
    _domain_input(constants)
    constants.add_argument("--which", default="all", help="e.g. cp,cf,cm1")
    constants.add_argument("--axis", default=None, help="Single axis for cpw.")
    constants.add_argument("--N", type=int, default=8, help="Slabs for cpw.")
    _tolerance(constants)
    constants.add_argument("--eig-tol", type=float, default=1e-6)
    _common(constants)

    report = subparsers.add_parser("report", help="Consolidate a run directory.")
    report.add_argument("run_dir")
    report.add_argument("--plot", action="store_true", help="Also write PNG plots.")
    _common(report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = RunConfig.from_args(args)
        return COMMANDS[args.command](args, config)
    except Exception as err:
        code = exit_code(err)
        if code == EXIT_FAILURE:
            logger.exception("Unexpected failure.")
        print(f"hhx {args.command}: error: {err}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
