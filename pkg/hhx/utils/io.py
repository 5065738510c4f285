# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

"""Utility functions for input/output.

Binary layouts (all little-endian):

- mask file: magic ``HHXM``, version byte, three uint32 dims, float64 ``h``, then the
  bit-packed mask with the first axis running fastest.
- field file: magic ``HHXF``, version byte, kind byte, flavor byte, three uint32 dims,
  float64 ``h``, then every component in axis order as float64, first axis fastest.
"""

import csv
import json
import os
import struct
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

MASK_MAGIC = b"HHXM"
FIELD_MAGIC = b"HHXF"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sB3Id")
_FIELD_HEADER = struct.Struct("<4sBBB3Id")

PathLike = Union[str, os.PathLike]


class FormatError(ValueError):
    """Raised when a binary mask or field file is malformed."""


def get_output_root():
    return os.path.join(os.getcwd(), "hhx-runs")


def ensure_writable(path: PathLike, overwrite: bool = False) -> Path:
    """Return `path` as a `Path`, refusing to clobber an existing file.

    Raises:
        FileExistsError: If the file exists and `overwrite` is False.
    """
    path = Path(path)
    if path.exists() and not overwrite:
        raise FileExistsError(
            f"{path} exists. Pass `overwrite=True` (`--overwrite`) to replace it."
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_mask(path: PathLike, mask: np.ndarray, h: float, overwrite=False) -> Path:
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 3:
        raise ValueError(f"Mask must be three-dimensional, got shape {mask.shape}.")
    path = ensure_writable(path, overwrite)
    bits = np.packbits(mask.ravel(order="F"), bitorder="little")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MASK_MAGIC, FORMAT_VERSION, *mask.shape, float(h)))
        f.write(bits.tobytes())
    return path


def read_mask(path: PathLike) -> Tuple[np.ndarray, float]:
    """Return `(mask, h)` stored in a mask file."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header.")
    magic, version, n1, n2, n3, h = _HEADER.unpack_from(data)
    if magic != MASK_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MASK_MAGIC!r}.")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}.")
    count = n1 * n2 * n3
    payload = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    if payload.size != (count + 7) // 8:
        raise FormatError(
            f"{path}: expected {(count + 7) // 8} mask bytes, found {payload.size}."
        )
    bits = np.unpackbits(payload, bitorder="little", count=count)
    return bits.astype(bool).reshape((n1, n2, n3), order="F"), float(h)


def write_field_arrays(
    path: PathLike,
    kind: int,
    flavor: int,
    dims: Sequence[int],
    h: float,
    components: Sequence[np.ndarray],
    overwrite: bool = False,
) -> Path:
    path = ensure_writable(path, overwrite)
    with open(path, "wb") as f:
        f.write(_FIELD_HEADER.pack(FIELD_MAGIC, FORMAT_VERSION, kind, flavor, *dims, h))
        for component in components:
            f.write(np.asarray(component, dtype="<f8").ravel(order="F").tobytes())
    return path


def read_field_arrays(path: PathLike) -> Dict[str, Any]:
    """Return the header entries and the flat float64 payload of a field file."""
    data = Path(path).read_bytes()
    if len(data) < _FIELD_HEADER.size:
        raise FormatError(f"{path}: truncated header.")
    magic, version, kind, flavor, n1, n2, n3, h = _FIELD_HEADER.unpack_from(data)
    if magic != FIELD_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {FIELD_MAGIC!r}.")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}.")
    payload = data[_FIELD_HEADER.size :]
    if len(payload) % 8:
        raise FormatError(f"{path}: payload is not a whole number of float64 values.")
    return dict(
        kind=kind,
        flavor=flavor,
        dims=(n1, n2, n3),
        h=float(h),
        values=np.frombuffer(payload, dtype="<f8").astype(np.float64),
    )


def write_json(path: PathLike, payload: Dict[str, Any], overwrite=False) -> Path:
    """Write `payload` with sorted keys so that reruns are byte-identical."""
    path = ensure_writable(path, overwrite)
    with open(path, "w") as f:
        json.dump(_jsonable(payload), f, indent=2, sort_keys=True, allow_nan=True)
        f.write("\n")
    return path


def write_csv(
    path: PathLike, rows: List[Dict[str, Any]], columns: Sequence[str], overwrite=False
) -> Path:
    path = ensure_writable(path, overwrite)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _csv_cell(row.get(c, "")) for c in columns})
    return path


def _csv_cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    return value


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value
