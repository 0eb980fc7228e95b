"""Flat binary container for named float64 arrays.

Byte layout (all integers little-endian uint32, all floats little-endian
float64):

    magic   4 bytes  b"MBA1" (doubles as the format version)
    count   uint32   number of arrays
    then per array, in insertion order:
        name_len  uint32
        name      name_len bytes, UTF-8
        ndim      uint32
        shape     ndim * uint32
        data      prod(shape) * float64, C order

Round-trips are bit-exact.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path
from typing import Mapping

import numpy as np

MAGIC = b"MBA1"


class CheckpointError(ValueError):
    """Malformed or wrong-version checkpoint file."""


def save_arrays(path: str | Path, arrays: Mapping[str, np.ndarray]) -> None:
    """Serialize named arrays; the file is written atomically."""
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", len(arrays))
    for name, arr in arrays.items():
        data = np.ascontiguousarray(arr, dtype=np.float64)
        encoded = name.encode("utf-8")
        blob += struct.pack("<I", len(encoded))
        blob += encoded
        blob += struct.pack("<I", data.ndim)
        blob += struct.pack(f"<{data.ndim}I", *data.shape)
        blob += data.astype("<f8").tobytes()
    _atomic_write_bytes(Path(path), bytes(blob))


def load_arrays(path: str | Path) -> dict[str, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise CheckpointError(
            f"{path}: bad magic/version header (expected {MAGIC!r}, got {raw[:4]!r})"
        )
    (count,) = struct.unpack_from("<I", raw, 4)
    offset = 8
    arrays: dict[str, np.ndarray] = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", raw, offset)
            offset += 4
            name = raw[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<I", raw, offset)
            offset += 4
            shape = struct.unpack_from(f"<{ndim}I", raw, offset)
            offset += 4 * ndim
            n = int(np.prod(shape, dtype=np.int64)) if ndim else 1
            data = np.frombuffer(raw, dtype="<f8", count=n, offset=offset).reshape(shape)
            offset += 8 * n
            arrays[name] = data.astype(np.float64)
    except (struct.error, ValueError) as exc:
        raise CheckpointError(f"{path}: truncated or corrupt checkpoint ({exc})") from exc
    if offset != len(raw):
        raise CheckpointError(f"{path}: trailing bytes after {count} arrays")
    return arrays


def _atomic_write_bytes(path: Path, blob: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
