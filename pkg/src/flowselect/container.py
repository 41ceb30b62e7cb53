"""Length-prefixed binary container used by all persisted artifacts.

Layout (little-endian throughout):

    magic            4 bytes
    header           n_header x u32
    arrays           repeated: u64 element count, raw f64 data
    crc32            u32 over every preceding byte

Array shapes are not stored; readers reconstruct them from model
structure (and from explicit layout arrays where needed).
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ChecksumError, InvalidInputError

MAGIC_FLOW = b"FSFL"
MAGIC_NULLS = b"FSNS"
MAGIC_LASSO = b"FSLA"
MAGIC_FOREST = b"FSRF"
MAGIC_MLP = b"FSNN"


def write_container(
    path: str | Path,
    magic: bytes,
    header: Sequence[int],
    arrays: Sequence[np.ndarray],
) -> None:
    if len(magic) != 4:
        raise ValueError("magic must be exactly 4 bytes")
    buf = bytearray()
    buf += magic
    for value in header:
        if value < 0 or value > 0xFFFFFFFF:
            raise ValueError(f"header value {value} does not fit in u32")
        buf += struct.pack("<I", int(value))
    for arr in arrays:
        flat = np.ascontiguousarray(arr, dtype="<f8").ravel()
        buf += struct.pack("<Q", flat.size)
        buf += flat.tobytes()
    buf += struct.pack("<I", zlib.crc32(bytes(buf)) & 0xFFFFFFFF)
    Path(path).write_bytes(bytes(buf))


def read_container(
    path: str | Path,
    magic: bytes,
    n_header: int,
) -> tuple[tuple[int, ...], list[np.ndarray]]:
    """Read and CRC-verify a container, returning (header, flat arrays)."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 + 4 * n_header + 4:
        raise InvalidInputError(f"{path}: file too short for a valid container")
    body, (stored_crc,) = raw[:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
        raise ChecksumError(f"{path}: CRC32 mismatch, file is corrupt")
    if body[:4] != magic:
        raise InvalidInputError(
            f"{path}: wrong magic {body[:4]!r}, expected {magic!r}"
        )
    header = struct.unpack_from(f"<{n_header}I", body, 4)
    offset = 4 + 4 * n_header
    arrays: list[np.ndarray] = []
    while offset < len(body):
        if offset + 8 > len(body):
            raise InvalidInputError(f"{path}: truncated array length prefix")
        (count,) = struct.unpack_from("<Q", body, offset)
        offset += 8
        end = offset + 8 * count
        if end > len(body):
            raise InvalidInputError(f"{path}: truncated array payload")
        arrays.append(np.frombuffer(body, dtype="<f8", count=count, offset=offset).copy())
        offset = end
    return header, arrays
