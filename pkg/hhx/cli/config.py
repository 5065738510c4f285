# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import argparse
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from hhx.__version__ import __version__
from hhx.constants.bounds import geometry_bounds
from hhx.constants.eigen import EigenConfig
from hhx.domain.voxel import VoxelDomain
from hhx.helmholtz.krylov import SolverConfig, SolverConvergenceError
from hhx.user_input.user_input_checks import check_tolerance
from hhx.utils.io import FormatError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2
EXIT_MISSING = 3
EXIT_SOLVER = 4


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs besides its own positional inputs.

    Attributes:
        command: Name of the subcommand.
        out: Output file or directory of the command.
        solver: Settings of the linear solves.
        eigen: Settings of the eigenvalue iterations.
        seed: Seed of generated fields and random start vectors.
        deterministic: Exactly rounded reductions.
        overwrite: Replace existing output files.
        show_progress_bars: Whether to show progress bars.
    """

    command: str
    out: Optional[Path] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    eigen: EigenConfig = field(default_factory=EigenConfig)
    seed: int = 0
    deterministic: bool = False
    overwrite: bool = False
    show_progress_bars: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        tol = check_tolerance(getattr(args, "tol", 1e-10), "--tol")
        solver = SolverConfig(rtol=tol, deterministic=args.deterministic)
        eigen = EigenConfig(
            solver=solver,
            eig_tol=getattr(args, "eig_tol", 1e-6),
            seed=args.seed,
            show_progress_bars=args.progress,
        )
        out = getattr(args, "out", None)
        return cls(
            command=args.command,
            out=None if out is None else Path(out),
            solver=solver,
            eigen=eigen,
            seed=args.seed,
            deterministic=args.deterministic,
            overwrite=args.overwrite,
            show_progress_bars=args.progress,
        )

    def provenance(self, domain: Optional[VoxelDomain] = None) -> dict:
        """Entries embedded in every report so that each row can be audited."""
        entry = dict(
            command=self.command,
            version=__version__,
            seed=self.seed,
            deterministic=self.deterministic,
            tolerances=dict(solver=self.solver.to_dict(), eigen=self.eigen.to_dict()),
        )
        if domain is not None:
            entry.update(h=domain.h, dims=list(domain.dims), convex=domain.convex)
            entry["bounds"] = geometry_bounds(domain)
        return entry


def exit_code(error: BaseException) -> int:
    """Map an exception to the documented exit codes."""
    if isinstance(error, SolverConvergenceError):
        return EXIT_SOLVER
    if isinstance(error, FileNotFoundError):
        return EXIT_MISSING
    if isinstance(
        error, (ValidationError, FormatError, FileExistsError, ValueError, TypeError)
    ):
        return EXIT_INPUT
    return EXIT_FAILURE


def configure_logging(level: str = "WARNING"):
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(levelname)s %(name)s: %(message)s",
    )
