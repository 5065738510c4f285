from hhx.utils.hhxutils import dot, get_num_workers, map_in_parallel, weighted_sum
from hhx.utils.io import FormatError, read_mask, write_json, write_mask
