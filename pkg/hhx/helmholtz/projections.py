# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

r"""
$L^2$-orthogonal Helmholtz decompositions of edge and face fields.

Two settings exist for each field kind. With an essential scalar side (`hd1`)

$$L^2 = \nabla \mathring{H}^1 \oplus \mathcal{H}_D \oplus \mathrm{rot}\, R,$$

with a natural scalar side (`hd2`)

$$L^2 = \nabla H^1 \oplus \mathcal{H}_N \oplus \mathrm{rot}\, \mathring{R}.$$

On edge fields the gradient is the primal `grad` of node potentials and the rotational
part the weighted adjoint `rot_dual` of face potentials. On face fields the gradient is
`grad_dual` of cell potentials and the rotational part the primal `rot` of edge
potentials. The harmonic part is what remains.
"""

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Type, Union

import numpy as np
import scipy.sparse as sp

from hhx.grid_calculus.fields import (
    CellField,
    EdgeField,
    FaceField,
    Field,
    NodeField,
)
from hhx.grid_calculus.grid import Flavor, Kind, staggered_grid
from hhx.grid_calculus.operators import (
    component_mean,
    div,
    div_dual,
    inner,
    norm_l1,
    norm_l2,
    rot,
)
from hhx.helmholtz.krylov import SolveInfo, SolverConfig, diagonal_preconditioner, pcg
from hhx.utils.io import PathLike, ensure_writable, write_json

logger = logging.getLogger(__name__)

Decomposition = Union[str, Flavor]

_LABELS = {Flavor.ESSENTIAL: "hd1", Flavor.NATURAL: "hd2"}

# Vector potentials are only attempted for fields this close to divergence free.
DIVERGENCE_PRECONDITION = 1e-6
# Relative size, against the data, of a constant component in Neumann data that is
# treated as round-off.
KERNEL_TOL = 1e-8


def scalar_flavor(decomposition: Decomposition) -> Flavor:
    """Map `hd1`/`hd2` (or a flavor) to the flavor of the scalar potential."""
    if isinstance(decomposition, str):
        for flavor, label in _LABELS.items():
            if decomposition.lower() == label:
                return flavor
        raise ValueError(f"Unknown decomposition {decomposition!r}, use hd1 or hd2.")
    return Flavor(decomposition)


@dataclass(frozen=True)
class _Setting:
    kind: Kind
    space_flavor: Flavor
    weights: np.ndarray
    gradient: sp.csr_matrix
    gradient_potential: Tuple[Type[Field], Flavor]
    gradient_normal: sp.csr_matrix
    gradient_kernel: Optional[np.ndarray]
    gradient_bound: float
    rotation: sp.csr_matrix
    rotation_potential: Tuple[Type[Field], Flavor]
    rotation_normal: sp.csr_matrix
    rotation_bound: float


def _normal(matrix: sp.csr_matrix, weights: np.ndarray) -> sp.csr_matrix:
    return (matrix.T @ sp.diags(weights) @ matrix).tocsr()


def _norm_bound(matrix: sp.csr_matrix) -> float:
    """Upper bound sqrt(|M|_1 |M|_inf) on the spectral norm."""
    magnitude = abs(matrix)
    return float(np.sqrt(magnitude.sum(axis=0).max() * magnitude.sum(axis=1).max()))


def _setting(domain, kind: Kind, scalar: Flavor) -> _Setting:
    grid = staggered_grid(domain)
    key = ("helmholtz", kind, scalar)
    if key in grid._cache:
        return grid._cache[key]

    if kind == Kind.EDGE:
        space = scalar
        W = grid.dof_weights(Kind.EDGE, space)
        gradient = grid.operator(Kind.NODE, space)
        C = grid.operator(Kind.EDGE, space)
        rotation = (
            sp.diags(1.0 / W) @ C.T @ sp.diags(grid.dof_weights(Kind.FACE, space))
        ).tocsr()
        kernel = np.ones(gradient.shape[1]) if space == Flavor.NATURAL else None
        potentials = ((NodeField, space), (FaceField, space))
    elif kind == Kind.FACE:
        space = Flavor.NATURAL if scalar == Flavor.ESSENTIAL else Flavor.ESSENTIAL
        W = grid.dof_weights(Kind.FACE, space)
        D = grid.operator(Kind.FACE, space)
        gradient = (
            -(sp.diags(1.0 / W) @ D.T @ sp.diags(grid.dof_weights(Kind.CELL, space)))
        ).tocsr()
        rotation = grid.operator(Kind.EDGE, space)
        kernel = np.ones(gradient.shape[1]) if space == Flavor.ESSENTIAL else None
        potentials = ((CellField, scalar), (EdgeField, space))
    else:
        raise TypeError("Helmholtz decompositions act on edge or face fields.")

    setting = _Setting(
        kind=kind,
        space_flavor=space,
        weights=W,
        gradient=gradient,
        gradient_potential=potentials[0],
        gradient_normal=_normal(gradient, W),
        gradient_kernel=kernel,
        gradient_bound=_norm_bound(gradient),
        rotation=rotation,
        rotation_potential=potentials[1],
        rotation_normal=_normal(rotation, W),
        rotation_bound=_norm_bound(rotation),
    )
    grid._cache[key] = setting
    return setting


def _space_field(phi: Field, setting: _Setting) -> Field:
    return phi.coerce(
        setting.space_flavor, what=f"{setting.kind.name.lower()} field to decompose"
    )


def _kernel_projector(kernel: Optional[np.ndarray]):
    if kernel is None:
        return None
    kk = float(kernel @ kernel)

    def project(v: np.ndarray) -> np.ndarray:
        return v - (kernel @ v / kk) * kernel

    return project


def _solve_gradient(
    phi: Field, setting: _Setting, config: SolverConfig
) -> Tuple[np.ndarray, SolveInfo]:
    weighted = setting.weights * phi.values[phi.dofs]
    b = setting.gradient.T @ weighted
    # Round-off in `b` is measured against the size of the data it comes from.
    scale = setting.gradient_bound * float(np.linalg.norm(weighted))
    if setting.gradient_kernel is not None:
        # Neumann data: the constant component is round-off and is removed.
        k = setting.gradient_kernel
        constant = (k @ b / (k @ k)) * k
        if np.linalg.norm(constant) > KERNEL_TOL * scale:
            raise ValueError(
                f"Neumann data has a constant component of relative size "
                f"{np.linalg.norm(constant) / scale:.3e}; the system is inconsistent."
            )
        b = b - constant
    A = setting.gradient_normal
    return pcg(
        A,
        b,
        config,
        preconditioner=diagonal_preconditioner(A),
        projector=_kernel_projector(setting.gradient_kernel),
        scale=scale,
        name="scalar potential",
    )


def _solve_rotation(
    phi: Field, setting: _Setting, config: SolverConfig
) -> Tuple[np.ndarray, SolveInfo]:
    weighted = setting.weights * phi.values[phi.dofs]
    b = setting.rotation.T @ weighted
    A = setting.rotation_normal
    return pcg(
        A,
        b,
        config,
        preconditioner=diagonal_preconditioner(A),
        scale=setting.rotation_bound * float(np.linalg.norm(weighted)),
        name="vector potential",
    )


def _as_field(phi: Field, setting: _Setting, x: np.ndarray) -> Field:
    return type(phi).from_dofs(phi.domain, setting.space_flavor, x)


def project_gradient(
    phi: Union[EdgeField, FaceField],
    flavor: Decomposition = Flavor.ESSENTIAL,
    config: Optional[SolverConfig] = None,
) -> Tuple[Field, Field]:
    r"""
    Split `phi` into its gradient part and the divergence-free remainder.

    Args:
        phi: Edge or face field. A field of the wrong flavor for the chosen setting is
            restricted with a warning.
        flavor: Flavor of the scalar potential, or `"hd1"` / `"hd2"`.
        config: Solver settings.

    Returns:
        `(gradient part, remainder)`.

    Raises:
        SolverConvergenceError: If the Poisson solve fails.
    """
    config = SolverConfig() if config is None else config
    setting = _setting(phi.domain, phi.kind, scalar_flavor(flavor))
    phi = _space_field(phi, setting)
    u, _ = _solve_gradient(phi, setting, config)
    gradient = _as_field(phi, setting, setting.gradient @ u)
    return gradient, phi - gradient


def rotational_projection(
    phi: Union[EdgeField, FaceField],
    flavor: Decomposition = Flavor.ESSENTIAL,
    config: Optional[SolverConfig] = None,
) -> Tuple[Field, Field, SolveInfo]:
    """Return the rotational part of `phi`, its potential and the solve statistics."""
    config = SolverConfig() if config is None else config
    setting = _setting(phi.domain, phi.kind, scalar_flavor(flavor))
    phi = _space_field(phi, setting)
    psi, info = _solve_rotation(phi, setting, config)
    potential_type, potential_flavor = setting.rotation_potential
    potential = potential_type.from_dofs(phi.domain, potential_flavor, psi)
    return _as_field(phi, setting, setting.rotation @ psi), potential, info


@dataclass
class DecompositionResult:
    """The three orthogonal parts of a field and the quality of the splitting.

    Attributes:
        orthogonality: Pairwise inner products of the parts divided by the squared
            norm of the input.
        reconstruction: Relative norm of input minus the sum of the parts.
    """

    decomposition: str
    input: Field
    gradient: Field
    harmonic: Field
    rotational: Field
    scalar_potential: Field
    vector_potential: Field
    orthogonality: Dict[str, float]
    reconstruction: float
    iterations: Dict[str, int]
    config: SolverConfig = field(default_factory=SolverConfig)

    def norms(self) -> Dict[str, float]:
        det = self.config.deterministic
        return {
            name: norm_l2(getattr(self, name), det)
            for name in ("input", "gradient", "harmonic", "rotational")
        }

    def relative_norms(self) -> Dict[str, float]:
        norms = self.norms()
        scale = norms["input"] if norms["input"] > 0 else 1.0
        return {name: value / scale for name, value in norms.items()}

    def max_orthogonality(self) -> float:
        return max(self.orthogonality.values())

    def to_json(self) -> dict:
        return dict(
            decomposition=self.decomposition,
            kind=self.input.kind.name.lower(),
            flavor=self.input.flavor.name.lower(),
            h=self.input.domain.h,
            dims=list(self.input.domain.dims),
            norms=self.norms(),
            relative_norms=self.relative_norms(),
            orthogonality=self.orthogonality,
            reconstruction=self.reconstruction,
            iterations=self.iterations,
            solver=self.config.to_dict(),
        )

    def save(
        self, directory: PathLike, overwrite: bool = False, extra: Optional[dict] = None
    ) -> Path:
        """Write `decomposition.json` and one field file per part into `directory`."""
        directory = Path(directory)
        paths = {}
        for name in ("gradient", "harmonic", "rotational"):
            target = ensure_writable(directory / f"{name}.hhxf", overwrite)
            getattr(self, name).save(target, overwrite=True)
            paths[name] = target.name
        report = self.to_json()
        report["files"] = paths
        report.update(extra or {})
        return write_json(directory / "decomposition.json", report, overwrite)


def _normalized(a: Field, b: Field, scale: float, deterministic: bool) -> float:
    if scale == 0.0:
        return 0.0
    return abs(inner(a, b, deterministic)) / scale


def decompose3(
    phi: Union[EdgeField, FaceField],
    flavor: Decomposition = Flavor.ESSENTIAL,
    config: Optional[SolverConfig] = None,
) -> DecompositionResult:
    r"""
    Return the gradient, harmonic and rotational parts of `phi`.

    Args:
        phi: Edge or face field.
        flavor: Flavor of the scalar potential (`"hd1"` for essential, `"hd2"` for
            natural).
        config: Solver settings.

    Raises:
        SolverConvergenceError: If one of the two solves fails.
    """
    config = SolverConfig() if config is None else config
    scalar = scalar_flavor(flavor)
    setting = _setting(phi.domain, phi.kind, scalar)
    phi = _space_field(phi, setting)
    det = config.deterministic

    u, gradient_info = _solve_gradient(phi, setting, config)
    psi, rotation_info = _solve_rotation(phi, setting, config)
    gradient = _as_field(phi, setting, setting.gradient @ u)
    rotational = _as_field(phi, setting, setting.rotation @ psi)
    harmonic = phi - gradient - rotational

    potential_type, potential_flavor = setting.gradient_potential
    scalar_potential = potential_type.from_dofs(phi.domain, potential_flavor, u)
    potential_type, potential_flavor = setting.rotation_potential
    vector_potential = potential_type.from_dofs(phi.domain, potential_flavor, psi)

    scale = inner(phi, phi, det)
    orthogonality = {
        "gradient_harmonic": _normalized(gradient, harmonic, scale, det),
        "gradient_rotational": _normalized(gradient, rotational, scale, det),
        "harmonic_rotational": _normalized(harmonic, rotational, scale, det),
    }
    phi_norm = norm_l2(phi, det)
    remainder = norm_l2(phi - (gradient + harmonic + rotational), det)
    reconstruction = remainder / phi_norm if phi_norm > 0 else remainder

    result = DecompositionResult(
        decomposition=_LABELS[scalar],
        input=phi,
        gradient=gradient,
        harmonic=harmonic,
        rotational=rotational,
        scalar_potential=scalar_potential,
        vector_potential=vector_potential,
        orthogonality=orthogonality,
        reconstruction=reconstruction,
        iterations=dict(
            gradient=gradient_info.iterations, rotational=rotation_info.iterations
        ),
        config=config,
    )
    relative = result.relative_norms()
    logger.info(
        "%s of %s field: |grad| %.3e, |harm| %.3e, |rot| %.3e (relative).",
        result.decomposition,
        phi.kind.name.lower(),
        relative["gradient"],
        relative["harmonic"],
        relative["rotational"],
    )
    if phi.domain.convex and relative["harmonic"] > 1e-6:
        logger.warning(
            "Harmonic part %.3e on a convex domain; check the solver tolerance.",
            relative["harmonic"],
        )
    return result


@dataclass
class VectorPotentialResult:
    r"""
    Edge field $\Phi$ with $\mathrm{rot}\,\Phi \approx \varphi$.

    Attributes:
        rot_residual: $\|\mathrm{rot}\,\Phi - \varphi\| / \|\varphi\|$.
        divergence_residual: $h \|\mathrm{div}^\dagger \Phi\| / \|\Phi\|$ of the gauge.
        obstructed: Whether $\varphi$ has a harmonic part that no potential reaches.
    """

    potential: EdgeField
    rot_residual: float
    divergence_residual: float
    obstructed: bool
    iterations: Dict[str, int]


def vector_potential(
    phi: FaceField, config: Optional[SolverConfig] = None
) -> VectorPotentialResult:
    r"""
    Return an essential edge field $\Phi$ with $\mathrm{rot}\,\Phi = \varphi$ and
    $\mathrm{div}^\dagger \Phi = 0$.

    Args:
        phi: Essential, divergence-free face field. Natural fields are restricted.
        config: Solver settings.

    Raises:
        ValueError: If `phi` is not divergence free.
    """
    config = SolverConfig() if config is None else config
    if not isinstance(phi, FaceField):
        raise TypeError("vector_potential needs a face field.")
    det = config.deterministic
    phi = phi.coerce(Flavor.ESSENTIAL, what="input of vector_potential")
    phi_norm = norm_l2(phi, det)
    empty = dict(rotational=0, gauge=0)
    if phi_norm == 0.0:
        return VectorPotentialResult(
            EdgeField.zeros(phi.domain, Flavor.ESSENTIAL), 0.0, 0.0, False, empty
        )
    relative_div = norm_l2(div(phi), det) * phi.domain.h / phi_norm
    if relative_div > DIVERGENCE_PRECONDITION:
        raise ValueError(
            f"vector_potential needs a divergence-free field, relative divergence is "
            f"{relative_div:.3e} > {DIVERGENCE_PRECONDITION:.0e}."
        )
    if not phi.domain.convex:
        logger.info("Domain is not flagged convex; a harmonic obstruction may remain.")

    setting = _setting(phi.domain, Kind.FACE, Flavor.NATURAL)
    psi, rotation_info = _solve_rotation(phi, setting, config)
    raw = EdgeField.from_dofs(phi.domain, Flavor.ESSENTIAL, psi)

    # Divergence-free gauge: remove the gradient part of the raw potential.
    gauge = _setting(phi.domain, Kind.EDGE, Flavor.ESSENTIAL)
    u, gauge_info = _solve_gradient(raw, gauge, config)
    potential = raw - _as_field(raw, gauge, gauge.gradient @ u)

    rot_residual = norm_l2(rot(potential) - phi, det) / phi_norm
    potential_norm = norm_l2(potential, det)
    divergence_residual = (
        norm_l2(div_dual(potential), det) * phi.domain.h / potential_norm
        if potential_norm > 0
        else 0.0
    )
    obstructed = rot_residual > 10 * config.rtol
    if obstructed:
        warnings.warn(
            f"No vector potential reaches the field: relative residual "
            f"{rot_residual:.3e}. The field has a harmonic (Neumann) part.",
            UserWarning,
        )
    return VectorPotentialResult(
        potential=potential,
        rot_residual=rot_residual,
        divergence_residual=divergence_residual,
        obstructed=obstructed,
        iterations=dict(
            rotational=rotation_info.iterations, gauge=gauge_info.iterations
        ),
    )


@dataclass
class GlobalZeroMean:
    r"""
    Component means $\int_\Omega \varphi_i$ and the pairing bounds.

    For face fields the bound of component $i$ is $l_i \|\mathrm{div}\,\varphi\|_{L^1}$,
    for edge fields $\min_j l_j \|(\mathrm{rot}\,\varphi)_k\|_{L^1}$ over the two
    orderings $(j, k)$ of the remaining axes.
    """

    means: Tuple[float, float, float]
    bounds: Tuple[float, float, float]
    scale: float
    membership_residual: float
    negative_control: bool

    @property
    def relative_means(self) -> Tuple[float, ...]:
        if self.scale == 0.0:
            return tuple(abs(m) for m in self.means)
        return tuple(abs(m) / self.scale for m in self.means)


def global_zero_mean_check(
    phi: Union[EdgeField, FaceField], deterministic: bool = False
) -> GlobalZeroMean:
    r"""
    Return the whole-domain means of the three components of `phi`.

    Essential fields obey $|\int_\Omega \varphi_i| \le$ bound; natural fields are
    evaluated too and flagged as negative controls.
    """
    if phi.kind not in (Kind.EDGE, Kind.FACE):
        raise TypeError("global_zero_mean_check needs an edge or face field.")
    domain = phi.domain
    lengths = domain.extents
    phi_norm = norm_l2(phi, deterministic)
    means = tuple(component_mean(phi, i, None, deterministic) for i in (1, 2, 3))
    if phi.kind == Kind.FACE:
        derivative = div(phi)
        l1 = norm_l1(derivative, deterministic=deterministic)
        bounds = tuple(length * l1 for length in lengths)
    else:
        derivative = rot(phi)
        l1 = [
            norm_l1(derivative, component=k, deterministic=deterministic)
            for k in (1, 2, 3)
        ]
        bounds = []
        for i in (1, 2, 3):
            j, k = (a for a in (1, 2, 3) if a != i)
            bounds.append(min(lengths[j - 1] * l1[k - 1], lengths[k - 1] * l1[j - 1]))
        bounds = tuple(bounds)
    membership = 0.0
    if phi_norm > 0:
        membership = norm_l2(derivative, deterministic) * domain.h / phi_norm
    return GlobalZeroMean(
        means=means,
        bounds=bounds,
        scale=phi_norm * np.sqrt(domain.volume),
        membership_residual=membership,
        negative_control=phi.flavor == Flavor.NATURAL,
    )
