"""Export trained generator weights to the FNW1 container and produce
parity dumps for the inference-side implementation.

FNW1 layout: magic "FNW1", unsigned 32-bit little-endian header length,
JSON header {arch, layers: [{name, kind, shape, byte_offset}], blob_sha256
hex}, then a little-endian 32-bit float blob of all tensors concatenated in
layer order.  Normalization statistics are folded into per-channel
scale/bias so inference is a pure affine + convolution pipeline.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct

import numpy as np
import torch

from .fpr1 import read_raster, write_raster
from .models import _NORM_EPS, Generator, GeneratorArch

MAGIC = b"FNW1"


def enumerate_layers(arch: GeneratorArch) -> list[tuple[str, str, tuple[int, ...]]]:
    """Ordered (name, kind, shape) contract shared with the inference side."""
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


def _fold_norm(norm) -> tuple[np.ndarray, np.ndarray]:
    """Collapse tracked statistics + affine into inference scale/bias."""
    mean = norm.running_mean.detach().numpy()
    var = norm.running_var.detach().numpy()
    gamma = norm.weight.detach().numpy()
    beta = norm.bias.detach().numpy()
    scale = gamma / np.sqrt(var + _NORM_EPS)
    return scale.astype(np.float32), (beta - mean * scale).astype(np.float32)


def generator_tensors(gen: Generator) -> dict[str, np.ndarray]:
    arch = gen.arch
    tensors: dict[str, np.ndarray] = {}
    for i in range(arch.depth):
        tensors[f"enc{i}.conv"] = gen.enc_convs[i].weight.detach().numpy()
        if i > 0:
            scale, bias = _fold_norm(gen.enc_norms[i - 1])
            tensors[f"enc{i}.norm.scale"] = scale
            tensors[f"enc{i}.norm.bias"] = bias
    for j in range(arch.depth - 1):
        tensors[f"dec{j}.conv"] = gen.dec_convs[j].weight.detach().numpy()
        scale, bias = _fold_norm(gen.dec_norms[j])
        tensors[f"dec{j}.norm.scale"] = scale
        tensors[f"dec{j}.norm.bias"] = bias
    tensors["out.conv"] = gen.out_conv.weight.detach().numpy()
    return tensors


def export_weights(gen: Generator, path) -> None:
    arch = gen.arch
    spec = enumerate_layers(arch)
    tensors = generator_tensors(gen)
    blob = b"".join(np.ascontiguousarray(tensors[name], dtype="<f4").tobytes()
                    for name, _, _ in spec)
    digest = hashlib.sha256(blob).hexdigest()
    entries = []
    off = 0
    for name, kind, shape in spec:
        assert tuple(tensors[name].shape) == shape, (name, tensors[name].shape, shape)
        entries.append({"name": name, "kind": kind, "shape": list(shape),
                        "byte_offset": off})
        off += 4 * int(np.prod(shape))
    header = json.dumps({
        "arch": {"depth": arch.depth, "base_channels": arch.base_channels,
                 "input_size": arch.input_size},
        "layers": entries,
        "blob_sha256": digest,
    }).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(blob)


def import_weights(path) -> tuple[GeneratorArch, dict[str, np.ndarray]]:
    """Read an FNW1 container back (round-trip check support)."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: bad magic")
    (hlen,) = struct.unpack_from("<I", raw, 4)
    header = json.loads(raw[8:8 + hlen])
    blob = raw[8 + hlen:]
    if hashlib.sha256(blob).hexdigest() != header["blob_sha256"]:
        raise ValueError(f"{path}: blob hash mismatch")
    arch = GeneratorArch(**header["arch"])
    tensors = {}
    for entry in header["layers"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape))
        tensors[entry["name"]] = np.frombuffer(
            blob, dtype="<f4", count=n, offset=entry["byte_offset"]).reshape(shape).copy()
    return arch, tensors


def _scale_to_unit(img: np.ndarray) -> np.ndarray:
    lo, hi = img.min(), img.max()
    if hi - lo < 1e-12:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo) * 2.0 - 1.0


def parity_dump(gen: Generator, input_paths: list[str], out_dir: str) -> list[str]:
    """Run the generator (inference mode) on the canonical parity inputs and
    write one output raster per input; returns the written paths."""
    gen.eval()
    os.makedirs(out_dir, exist_ok=True)
    written = []
    with torch.no_grad():
        for path in input_paths:
            img = _scale_to_unit(read_raster(path)).astype(np.float32)
            out = gen(torch.from_numpy(img)[None, None])[0, 0].numpy()
            dst = os.path.join(out_dir,
                               os.path.splitext(os.path.basename(path))[0] + "_out.fpr")
            write_raster(out, dst)
            written.append(dst)
    return written
