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
from hhx.grid_calculus.grid import Flavor, Kind, StaggeredGrid, staggered_grid
from hhx.grid_calculus.operators import (
    component_mean,
    div,
    div_dual,
    grad,
    grad_dual,
    inner,
    norm_l1,
    norm_l2,
    rot,
    rot_dual,
)
