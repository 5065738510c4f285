from hhx.domain.diameters import diameter, projected_diameter, projected_diameters
from hhx.domain.geometry import (
    Ball,
    Box,
    GeometrySpec,
    Halfspace,
    MaskFile,
    Polytope,
    Torus,
)
from hhx.domain.subdomains import (
    BeamSubdomain,
    SlabDecomposition,
    SlabSubdomain,
    beam,
    nearest_divisor,
    plane_pairs,
    slab,
    uniform_beams,
    uniform_decomposition,
    whole_slab,
)
from hhx.domain.voxel import DomainError, VoxelDomain, voxelize
