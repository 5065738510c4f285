# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

import logging
import math
import os
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from joblib import Parallel, delayed
from tqdm.auto import tqdm

T = TypeVar("T")

THREADS_ENV = "HHX_THREADS"

logger = logging.getLogger(__name__)


def get_num_workers(num_workers: Optional[int] = None) -> int:
    """Return the worker count, capped by the `HHX_THREADS` environment variable.

    Without the variable everything runs in a single process, which keeps every
    reduction in a fixed order.
    """
    raw = os.environ.get(THREADS_ENV)
    cap = 1
    if raw:
        try:
            cap = max(int(raw), 1)
        except ValueError:
            logger.warning("Ignoring non-integer %s=%r.", THREADS_ENV, raw)
    if num_workers is None:
        return cap
    return max(1, min(int(num_workers), cap))


def map_in_parallel(
    function: Callable[..., T],
    items: Sequence,
    num_workers: Optional[int] = None,
    show_progress_bars: bool = False,
    desc: str = "",
) -> List[T]:
    r"""
    Return `[function(item) for item in items]`, evaluated by up to `num_workers`.

    Results always come back in the order of `items`, so aggregations over them do not
    depend on the worker count.

    Args:
        function: Pure callable applied to each item.
        items: Inputs, e.g. subdomains of a sweep.
        num_workers: Requested workers; capped by `HHX_THREADS`.
        show_progress_bars: Whether to show a progress bar.
        desc: Progress bar description.

    Returns:
        List of outputs, one per item.
    """
    num_workers = get_num_workers(num_workers)
    if num_workers > 1 and len(items) > 1:
        outputs = Parallel(n_jobs=num_workers, return_as="generator")(
            delayed(function)(item) for item in items
        )
        progress = tqdm(
            outputs, total=len(items), disable=not show_progress_bars, desc=desc
        )
        return list(progress)
    progress = tqdm(items, disable=not show_progress_bars, desc=desc)
    return [function(item) for item in progress]


def weighted_sum(
    weights: np.ndarray, values: np.ndarray, deterministic: bool = False
) -> float:
    """Return `sum(weights * values)`.

    In deterministic mode the sum is exactly rounded (`math.fsum`), which makes the
    result independent of summation order and BLAS threading.
    """
    products = np.asarray(weights * values, dtype=np.float64)
    if deterministic:
        return math.fsum(products.tolist())
    return float(np.sum(products))


def dot(a: np.ndarray, b: np.ndarray, deterministic: bool = False) -> float:
    if deterministic:
        return math.fsum((a * b).tolist())
    return float(np.dot(a, b))
