"""Binary tensor file format.

Layout, all little-endian:

    magic   4 bytes  b"STGP"
    version u16      1
    rank    u16      3 (TokenGrid) or 4 (FrameTokens)
    dims    u32 * rank
    dtype   u16      0 = float32
    payload rank-product * 4 bytes, row-major float32

Writes go to a temp file in the target directory and are renamed into
place, so a failed write never leaves a partial output behind.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .tensors import FrameTokens, TokenGrid

__all__ = [
    "TensorFormatError",
    "encode_tensor",
    "decode_tensor",
    "read_tensor",
    "write_tensor",
]

MAGIC = b"STGP"
VERSION = 1
DTYPE_F32 = 0


class TensorFormatError(ValueError):
    pass


def encode_tensor(tensor: FrameTokens | TokenGrid) -> bytes:
    arr = tensor.data
    header = struct.pack("<4sHH", MAGIC, VERSION, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    header += struct.pack("<H", DTYPE_F32)
    return header + arr.astype("<f4").tobytes(order="C")


def decode_tensor(buf: bytes) -> FrameTokens | TokenGrid:
    if len(buf) < 8 or buf[:4] != MAGIC:
        raise TensorFormatError("bad magic: not an STGP tensor file")
    version, rank = struct.unpack_from("<HH", buf, 4)
    if version != VERSION:
        raise TensorFormatError(f"bad version: expected {VERSION}, got {version}")
    if rank not in (3, 4):
        raise TensorFormatError(f"bad rank: expected 3 or 4, got {rank}")
    offset = 8
    if len(buf) < offset + 4 * rank + 2:
        raise TensorFormatError("truncated header")
    dims = struct.unpack_from(f"<{rank}I", buf, offset)
    offset += 4 * rank
    (dtype,) = struct.unpack_from("<H", buf, offset)
    offset += 2
    if dtype != DTYPE_F32:
        raise TensorFormatError(f"bad dtype: expected code {DTYPE_F32}, got {dtype}")

    expected = int(np.prod(dims, dtype=np.int64)) * 4
    payload = buf[offset:]
    if len(payload) < expected:
        raise TensorFormatError(
            f"truncated payload: expected {expected} bytes, got {len(payload)}"
        )
    if len(payload) > expected:
        raise TensorFormatError(
            f"trailing data: expected {expected} payload bytes, got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return FrameTokens(arr) if rank == 4 else TokenGrid(arr)


def read_tensor(path: str | os.PathLike) -> FrameTokens | TokenGrid:
    with open(path, "rb") as f:
        return decode_tensor(f.read())


def write_tensor(path: str | os.PathLike, tensor: FrameTokens | TokenGrid) -> None:
    data = encode_tensor(tensor)
    write_bytes_atomic(path, data)


def write_bytes_atomic(path: str | os.PathLike, data: bytes) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".stgp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
