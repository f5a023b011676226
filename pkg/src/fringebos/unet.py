"""FNW1 weights container and the numpy forward pass of the learned
fringe normalizer (encoder-decoder with skip connections).

Block structure (fixed; only depth/base_channels/input_size vary):
  encoder i:  4x4 conv stride 2 -> scale/bias norm (skipped for i = 0)
              -> leaky rectifier slope 0.2
  decoder j:  4x4 transposed conv stride 2 -> scale/bias norm -> rectifier
              -> channel concat with the mirror encoder output
  output:     4x4 transposed conv stride 2 -> tanh

Channel widths follow base * min(2^i, 8).  Normalization is a per-channel
affine with statistics folded in at export time, so inference is a pure
function of (weights, input).  Convolutions carry no bias term; the affine
norm layers supply the additive degrees of freedom.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import BadArch, BadMagic, HashMismatch, IoFailure, ShapeMismatch

MAGIC = b"FNW1"


@dataclass(frozen=True)
class UnetArch:
    depth: int = 5
    base_channels: int = 16
    input_size: int = 256

    def __post_init__(self):
        if self.depth < 2 or self.base_channels < 1:
            raise BadArch("depth must be >= 2 and base_channels >= 1")
        if self.input_size % (1 << self.depth) != 0:
            raise BadArch(
                f"input_size {self.input_size} not divisible by 2^depth={1 << self.depth}")

    def channels(self, i: int) -> int:
        return self.base_channels * min(1 << i, 8)


def enumerate_layers(arch: UnetArch) -> list[tuple[str, str, tuple[int, ...]]]:
    """Ordered (name, kind, shape) for every tensor the forward pass consumes.

    Conv shapes use (out, in, kh, kw); transposed-conv shapes use
    (in, out, kh, kw).
    """
    d = arch.depth
    ch = [arch.channels(i) for i in range(d)]
    layers: list[tuple[str, str, tuple[int, ...]]] = []
    prev = 1
    for i in range(d):
        layers.append((f"enc{i}.conv", "conv", (ch[i], prev, 4, 4)))
        if i > 0:
            layers.append((f"enc{i}.norm.scale", "norm-scale", (ch[i],)))
            layers.append((f"enc{i}.norm.bias", "norm-bias", (ch[i],)))
        prev = ch[i]
    for j in range(d - 1):
        in_ch = ch[d - 1] if j == 0 else 2 * ch[d - 1 - j]
        out_ch = ch[d - 2 - j]
        layers.append((f"dec{j}.conv", "transposed-conv", (in_ch, out_ch, 4, 4)))
        layers.append((f"dec{j}.norm.scale", "norm-scale", (out_ch,)))
        layers.append((f"dec{j}.norm.bias", "norm-bias", (out_ch,)))
    layers.append(("out.conv", "transposed-conv", (2 * ch[0], 1, 4, 4)))
    return layers


@dataclass(frozen=True)
class ModelWeights:
    arch: UnetArch
    tensors: dict  # name -> float32 ndarray, in enumerate_layers order
    blob_sha256: bytes


def _blob(arch: UnetArch, tensors: dict) -> bytes:
    return b"".join(np.ascontiguousarray(tensors[name], dtype="<f4").tobytes()
                    for name, _, _ in enumerate_layers(arch))


def save_weights(weights: ModelWeights, path) -> None:
    arch = weights.arch
    spec = enumerate_layers(arch)
    blob = _blob(arch, weights.tensors)
    digest = hashlib.sha256(blob).hexdigest()
    entries = []
    off = 0
    for name, kind, shape in spec:
        entries.append({"name": name, "kind": kind, "shape": list(shape),
                        "byte_offset": off})
        off += 4 * int(np.prod(shape))
    header = json.dumps({
        "arch": {"depth": arch.depth, "base_channels": arch.base_channels,
                 "input_size": arch.input_size},
        "layers": entries,
        "blob_sha256": digest,
    }).encode()
    try:
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", len(header)))
            f.write(header)
            f.write(blob)
    except OSError as e:
        raise IoFailure(str(e)) from e


def load_weights(path) -> ModelWeights:
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise IoFailure(str(e)) from e
    if raw[:4] != MAGIC:
        raise BadMagic(f"{path}: magic {raw[:4]!r} != {MAGIC!r}")
    (hlen,) = struct.unpack_from("<I", raw, 4)
    header = json.loads(raw[8:8 + hlen])
    arch = UnetArch(**header["arch"])
    blob = raw[8 + hlen:]
    digest = hashlib.sha256(blob).hexdigest()
    if digest != header["blob_sha256"]:
        raise HashMismatch(f"{path}: blob hash mismatch")
    expected = enumerate_layers(arch)
    got = [(e["name"], e["kind"], tuple(e["shape"])) for e in header["layers"]]
    if got != expected:
        raise ShapeMismatch(f"{path}: layer list does not match architecture")
    tensors = {}
    for entry in header["layers"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape))
        off = entry["byte_offset"]
        if off + 4 * n > len(blob):
            raise ShapeMismatch(f"{path}: blob too short for {entry['name']}")
        tensors[entry["name"]] = np.frombuffer(
            blob, dtype="<f4", count=n, offset=off).reshape(shape).copy()
    return ModelWeights(arch=arch, tensors=tensors, blob_sha256=bytes.fromhex(digest))


# --- forward pass primitives (match torch Conv2d/ConvTranspose2d, k=4 s=2 p=1) ---

def conv_s2(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """x: (C, H, W) -> (O, H/2, W/2); w: (O, C, 4, 4)."""
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (4, 4), axis=(1, 2))[:, ::2, ::2]
    return np.einsum("chwij,ocij->ohw", win, w, optimize=True).astype(np.float32)


def convT_s2(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """x: (C, H, W) -> (O, 2H, 2W); w: (C, O, 4, 4) (torch layout)."""
    c, h, width = x.shape
    up = np.zeros((c, 2 * h + 3, 2 * width + 3), dtype=np.float32)
    up[:, 2:2 * h + 1:2, 2:2 * width + 1:2] = x
    wf = w[:, :, ::-1, ::-1]
    win = sliding_window_view(up, (4, 4), axis=(1, 2))
    return np.einsum("chwij,coij->ohw", win, wf, optimize=True).astype(np.float32)


def _leaky(x, slope=0.2):
    return np.where(x > 0, x, slope * x)


def forward(weights: ModelWeights, img: np.ndarray) -> np.ndarray:
    """Forward pass on an (H, W) array already scaled to [-1, 1]."""
    arch = weights.arch
    t = weights.tensors
    x = np.asarray(img, dtype=np.float32)[None]
    skips = []
    for i in range(arch.depth):
        x = conv_s2(x, t[f"enc{i}.conv"])
        if i > 0:
            x = x * t[f"enc{i}.norm.scale"][:, None, None] + t[f"enc{i}.norm.bias"][:, None, None]
        x = _leaky(x)
        skips.append(x)
    x = skips[-1]
    for j in range(arch.depth - 1):
        x = convT_s2(x, t[f"dec{j}.conv"])
        x = x * t[f"dec{j}.norm.scale"][:, None, None] + t[f"dec{j}.norm.bias"][:, None, None]
        x = np.maximum(x, 0.0)
        x = np.concatenate([x, skips[arch.depth - 2 - j]], axis=0)
    x = convT_s2(x, t["out.conv"])
    return np.tanh(x[0]).astype(np.float32)
