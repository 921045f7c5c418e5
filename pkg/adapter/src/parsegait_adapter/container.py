"""Reader for the toolkit's `PSTN1` tensor container.

Byte layout, little-endian throughout:

    bytes 0..4    magic b"PSTN1"
    bytes 5..8    u32 rank, 1..8
    next 4*rank   u32 dimension sizes, each >= 1
    next 1        u8 dtype tag (1=uint8, 2=float32, 3=float64, 4=int64)
    rest          row-major payload, exactly prod(dims) * itemsize bytes

This is an independent implementation of the documented byte layout, so
the adapter needs nothing from the producing package at runtime.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import AdapterError

MAGIC = b"PSTN1"
MAX_RANK = 8
DTYPES = {
    1: np.dtype(np.uint8),
    2: np.dtype("<f4"),
    3: np.dtype("<f8"),
    4: np.dtype("<i8"),
}


def read_container(path) -> np.ndarray:
    """Decode one container file into an ndarray of the stored dtype and shape."""
    path = Path(path)
    data = path.read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise AdapterError(f"{path}: not a {MAGIC.decode('ascii')} container")
    offset = len(MAGIC)
    if len(data) < offset + 4:
        raise AdapterError(f"{path}: truncated header at byte {len(data)}")
    (rank,) = struct.unpack_from("<I", data, offset)
    offset += 4
    if rank < 1 or rank > MAX_RANK:
        raise AdapterError(f"{path}: rank {rank} is outside 1..{MAX_RANK}")
    if len(data) < offset + 4 * rank:
        raise AdapterError(f"{path}: truncated dimension list at byte {len(data)}")
    dims = struct.unpack_from(f"<{rank}I", data, offset)
    offset += 4 * rank
    if any(d == 0 for d in dims):
        raise AdapterError(f"{path}: zero-size dimension in shape {dims}")
    if len(data) < offset + 1:
        raise AdapterError(f"{path}: truncated header at byte {len(data)}")
    tag = data[offset]
    offset += 1
    dtype = DTYPES.get(tag)
    if dtype is None:
        raise AdapterError(f"{path}: unknown dtype tag {tag}")
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    payload = data[offset:]
    if len(payload) != expected:
        raise AdapterError(
            f"{path}: payload holds {len(payload)} bytes, expected {expected} "
            f"for shape {dims} {dtype}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(dims)
