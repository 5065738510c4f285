from hhx.zeromean.checks import (
    check_global,
    check_remark_partial,
    check_thm_D,
    check_thm_R,
    sweep,
)
from hhx.zeromean.report import ZeroMeanReport, ZeroMeanRow
