"""Minimal tensor container for pipeline outputs.

Layout (little-endian throughout):

    magic   5 bytes  b"PSTN1"
    rank    u32
    dims    rank x u32
    dtype   u8 tag (1=uint8, 2=float32, 3=float64, 4=int64)
    payload row-major element bytes, exactly prod(dims) elements

The format is intentionally dumb: no compression, no alignment, no
metadata.  Consumers outside this package parse it from the byte layout
above alone.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ContainerError

MAGIC = b"PSTN1"
MAX_RANK = 8

_TAG_BY_DTYPE = {
    np.dtype(np.uint8): 1,
    np.dtype("<f4"): 2,
    np.dtype("<f8"): 3,
    np.dtype("<i8"): 4,
}
_DTYPE_BY_TAG = {tag: dtype for dtype, tag in _TAG_BY_DTYPE.items()}


def write_tensor(path: str | Path, array: np.ndarray) -> None:
    """Serialize an array; dtype must be uint8, float32, float64, or int64."""
    arr = np.ascontiguousarray(array)
    dtype = arr.dtype.newbyteorder("<") if arr.dtype.byteorder == ">" else arr.dtype
    tag = _TAG_BY_DTYPE.get(np.dtype(dtype))
    if tag is None:
        supported = ", ".join(str(d) for d in _TAG_BY_DTYPE)
        raise ContainerError(f"unsupported dtype {arr.dtype}; supported: {supported}")
    if arr.ndim < 1 or arr.ndim > MAX_RANK:
        raise ContainerError(f"rank {arr.ndim} is outside 1..{MAX_RANK}")
    if any(d == 0 for d in arr.shape):
        raise ContainerError(f"every dimension must be >= 1, got shape {arr.shape}")
    header = MAGIC + struct.pack("<I", arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
    header += struct.pack("<B", tag)
    payload = arr.astype(_DTYPE_BY_TAG[tag], copy=False).tobytes(order="C")
    Path(path).write_bytes(header + payload)


def read_tensor(path: str | Path) -> np.ndarray:
    """Parse a container back into an array; bit-exact round trip with write_tensor."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 4:
        raise ContainerError(f"{path}: truncated header at byte {len(raw)}")
    if raw[: len(MAGIC)] != MAGIC:
        raise ContainerError(
            f"{path}: bad magic {raw[:len(MAGIC)]!r} at byte 0, expected {MAGIC!r}"
        )
    offset = len(MAGIC)
    (rank,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if rank < 1 or rank > MAX_RANK:
        raise ContainerError(
            f"{path}: rank {rank} at byte {len(MAGIC)} is outside 1..{MAX_RANK}"
        )
    if len(raw) < offset + 4 * rank + 1:
        raise ContainerError(f"{path}: truncated dimension list at byte {len(raw)}")
    dims = struct.unpack_from(f"<{rank}I", raw, offset)
    for i, d in enumerate(dims):
        if d == 0:
            raise ContainerError(
                f"{path}: zero-size dimension {i} at byte {offset + 4 * i} "
                f"in shape {tuple(dims)}"
            )
    offset += 4 * rank
    (tag,) = struct.unpack_from("<B", raw, offset)
    dtype = _DTYPE_BY_TAG.get(tag)
    if dtype is None:
        raise ContainerError(f"{path}: unknown dtype tag {tag} at byte {offset}")
    offset += 1
    count = 1
    for d in dims:
        count *= d
    expected = count * dtype.itemsize
    actual = len(raw) - offset
    if actual != expected:
        raise ContainerError(
            f"{path}: payload at byte {offset} is {actual} bytes, "
            f"expected {expected} for shape {tuple(dims)}"
        )
    flat = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
    return flat.reshape(dims).copy()
