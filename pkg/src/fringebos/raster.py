"""Core 2D field types and bit-exact FPR1 raster I/O.

Conventions fixed here and relied on everywhere else:
  * arrays are row-major with shape (height, width)
  * sample(x, y) = data[y, x], i.e. x is the column index and the fringe
    carrier runs along x
  * files store 32-bit little-endian IEEE-754 payloads
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagic,
    DegenerateRange,
    IoFailure,
    TruncatedPayload,
    UnsupportedDtype,
)

MAGIC = b"FPR1"
DTYPE_REAL = 0
DTYPE_COMPLEX = 1
HEADER_SIZE = 13  # 4 magic + 4 width + 4 height + 1 dtype


def _as_2d(data, dtype) -> np.ndarray:
    arr = np.asarray(data, dtype=dtype)
    if arr.ndim != 2:
        raise ValueError(f"expected 2D array, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("fields must be at least 1x1")
    return arr


@dataclass(frozen=True)
class RealField:
    """2D raster of real samples (fringe intensity or phase)."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_2d(self.data, np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("RealField samples must be finite")
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def sample(self, x: int, y: int) -> float:
        return float(self.data[y, x])


@dataclass(frozen=True)
class ComplexField:
    """2D raster of complex samples (analytic signal)."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_2d(self.data, np.complex128)
        if not np.all(np.isfinite(arr)):
            raise ValueError("ComplexField samples must be finite")
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def sample(self, x: int, y: int) -> complex:
        return complex(self.data[y, x])


def read_raster(path) -> RealField | ComplexField:
    """Read an FPR1 file; dtype byte selects real vs complex payload."""
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise IoFailure(str(e)) from e
    if len(raw) < HEADER_SIZE:
        raise TruncatedPayload(f"{path}: file shorter than header")
    magic = raw[:4]
    if magic != MAGIC:
        raise BadMagic(f"{path}: magic {magic!r} != {MAGIC!r}")
    width, height = struct.unpack_from("<II", raw, 4)
    dtype = raw[12]
    if dtype not in (DTYPE_REAL, DTYPE_COMPLEX):
        raise UnsupportedDtype(f"{path}: dtype byte {dtype}")
    n = width * height
    floats = n * (1 if dtype == DTYPE_REAL else 2)
    expected = HEADER_SIZE + 4 * floats
    if len(raw) < expected:
        raise TruncatedPayload(f"{path}: need {expected} bytes, have {len(raw)}")
    payload = np.frombuffer(raw, dtype="<f4", count=floats, offset=HEADER_SIZE)
    if dtype == DTYPE_REAL:
        return RealField(payload.reshape(height, width).astype(np.float64))
    cplx = payload.reshape(height, width, 2)
    return ComplexField(cplx[..., 0].astype(np.float64) + 1j * cplx[..., 1].astype(np.float64))


def write_raster(field: RealField | ComplexField, path) -> None:
    """Write a field as FPR1; payload cast to 32-bit floats."""
    if isinstance(field, RealField):
        dtype = DTYPE_REAL
        payload = field.data.astype("<f4").tobytes()
    elif isinstance(field, ComplexField):
        dtype = DTYPE_COMPLEX
        inter = np.empty(field.data.shape + (2,), dtype="<f4")
        inter[..., 0] = field.data.real
        inter[..., 1] = field.data.imag
        payload = inter.tobytes()
    else:
        raise TypeError(f"not a field: {type(field)}")
    header = MAGIC + struct.pack("<IIB", field.width, field.height, dtype)
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(payload)
    except OSError as e:
        raise IoFailure(str(e)) from e


def export_png(field: RealField, path, lo: float, hi: float) -> None:
    """Export as 16-bit grayscale PNG, mapping [lo, hi] to [0, 65535]."""
    from PIL import Image

    if not lo < hi:
        raise DegenerateRange(f"lo={lo} must be < hi={hi}")
    scaled = np.clip((field.data - lo) / (hi - lo), 0.0, 1.0)
    pix = np.rint(scaled * 65535.0).astype(np.uint16)
    img = Image.fromarray(pix)
    try:
        img.save(path, format="PNG")
    except OSError as e:
        raise IoFailure(str(e)) from e
