"""Binary container for named float64 tensors.

Layout (all integers little-endian):

    magic   4 bytes  b"NDGC"
    version u32      currently 1
    count   u32      number of tensors
    then per tensor:
        name_len u16, name utf-8 bytes
        ndim     u8,  dims u32 * ndim
        data     float64 little-endian, C order

Round-trips are bit-exact; loading never reinterprets or rescales values.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from .tensor import Tensor

MAGIC = b"NDGC"
VERSION = 1


class CheckpointError(ValueError):
    """Raised for unreadable, truncated or wrong-format checkpoint files."""


def save_tensors(path, tensors: Mapping[str, "Tensor | np.ndarray"]) -> None:
    """Write named tensors in the given order."""
    path = Path(path)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(tensors)))
        for name, value in tensors.items():
            arr = np.asarray(value.data if isinstance(value, Tensor) else value, dtype="<f8")
            if arr.ndim:
                # ascontiguousarray would promote 0-d values to shape (1,)
                arr = np.ascontiguousarray(arr)
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<B", arr.ndim))
            if arr.ndim:
                f.write(struct.pack("<%dI" % arr.ndim, *arr.shape))
            f.write(arr.tobytes())


def _read(f, n: int, what: str) -> bytes:
    buf = f.read(n)
    if len(buf) != n:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return buf


def load_tensors(path) -> dict[str, np.ndarray]:
    """Read a file written by save_tensors, preserving tensor order."""
    path = Path(path)
    out: dict[str, np.ndarray] = {}
    with open(path, "rb") as f:
        if _read(f, 4, "magic") != MAGIC:
            raise CheckpointError(f"{path}: not a tensor checkpoint (bad magic)")
        version, count = struct.unpack("<II", _read(f, 8, "header"))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        for i in range(count):
            (name_len,) = struct.unpack("<H", _read(f, 2, "name length"))
            name = _read(f, name_len, "name").decode("utf-8")
            (ndim,) = struct.unpack("<B", _read(f, 1, "rank"))
            shape = struct.unpack("<%dI" % ndim, _read(f, 4 * ndim, "shape")) if ndim else ()
            n_bytes = 8 * int(np.prod(shape, dtype=np.int64)) if ndim else 8
            data = np.frombuffer(_read(f, n_bytes, f"tensor {name!r}"), dtype="<f8")
            out[name] = data.reshape(shape).astype(np.float64)
        if f.read(1):
            raise CheckpointError(f"{path}: trailing bytes after {count} tensors")
    return out
