from hhx.constants.bounds import (
    ALL_CONSTANTS,
    BoundsReport,
    bounds_report,
    chain_checks,
    geometry_bounds,
)
from hhx.constants.eigen import EigenConfig, EigenResult, inverse_iteration
from hhx.constants.estimates import (
    ConstantEstimate,
    estimate_friedrichs,
    estimate_maxwell,
    estimate_mixed_maxwell,
    estimate_poincare,
    estimate_specialized_poincare,
    richardson_extrapolate,
)
from hhx.constants.regularity import (
    AnalyticField,
    RegularityCheck,
    SplitBoundCheck,
    check_regularity,
    check_split_bound,
    check_trace,
)
