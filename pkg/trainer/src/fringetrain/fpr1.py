"""Reader/writer for the FPR1 raster container.

Byte layout: magic "FPR1", unsigned 32-bit little-endian width and height,
one dtype byte (0 = real, 1 = complex interleaved re/im), then the payload
as little-endian 32-bit floats in row-major order.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"FPR1"


class Fpr1Error(ValueError):
    pass


def read_raster(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise Fpr1Error(f"{path}: bad magic {raw[:4]!r}")
    width, height = struct.unpack_from("<II", raw, 4)
    dtype = raw[12]
    n = width * height * (2 if dtype == 1 else 1)
    payload = np.frombuffer(raw, dtype="<f4", count=n, offset=13)
    if dtype == 0:
        return payload.reshape(height, width).astype(np.float64)
    if dtype == 1:
        pairs = payload.reshape(height, width, 2).astype(np.float64)
        return pairs[..., 0] + 1j * pairs[..., 1]
    raise Fpr1Error(f"{path}: unknown dtype byte {dtype}")


def write_raster(data: np.ndarray, path) -> None:
    data = np.asarray(data)
    if data.ndim != 2:
        raise Fpr1Error("raster must be 2D")
    height, width = data.shape
    if np.iscomplexobj(data):
        payload = np.empty((height, width, 2), dtype="<f4")
        payload[..., 0] = data.real
        payload[..., 1] = data.imag
        dtype = 1
    else:
        payload = data.astype("<f4")
        dtype = 0
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", width, height))
        f.write(bytes([dtype]))
        f.write(payload.tobytes())
