import numpy as np
import pytest

import fringebos.unet as unet
from fringebos.errors import (
    BadMagic,
    HashMismatch,
    NoCarrier,
    ShapeMismatch,
    SizeMismatch,
)
from fringebos.normalize import (
    NormalizedFringe,
    classical_normalize,
    load_weights,
    normalize_auto,
    unet_forward,
)
from fringebos.raster import RealField
from fringebos.simulate import make_test_scene, synth_fringe
from fringebos.unet import ModelWeights, UnetArch, enumerate_layers, save_weights


def _random_weights(arch=UnetArch(depth=3, base_channels=4, input_size=64), seed=0):
    rng = np.random.default_rng(seed)
    tensors = {}
    for name, kind, shape in enumerate_layers(arch):
        if kind == "norm-scale":
            tensors[name] = np.ones(shape, dtype=np.float32)
        elif kind == "norm-bias":
            tensors[name] = np.zeros(shape, dtype=np.float32)
        else:
            tensors[name] = rng.normal(scale=0.05, size=shape).astype(np.float32)
    blob = b"".join(tensors[n].tobytes() for n, _, _ in enumerate_layers(arch))
    import hashlib

    return ModelWeights(arch=arch, tensors=tensors,
                        blob_sha256=hashlib.sha256(blob).digest())


# --- classical normalizer ---

def test_classical_normalize_pure_carrier():
    x = np.arange(256)
    img = RealField(np.tile(0.5 + 0.5 * np.cos(2 * np.pi * 0.05 * x), (256, 1)))
    out = classical_normalize(img).data
    target = np.tile(np.cos(2 * np.pi * 0.05 * x), (256, 1))
    assert np.abs(out - target)[20:-20, 20:-20].max() < 0.05


def test_classical_normalize_idempotent_on_normalized():
    x = np.arange(256)
    img = RealField(np.tile(np.cos(2 * np.pi * 0.05 * x), (256, 1)))
    out = classical_normalize(img).data
    assert np.abs(out - img.data)[20:-20, 20:-20].max() < 0.05


def test_classical_normalize_constant_rejected():
    with pytest.raises(NoCarrier):
        classical_normalize(RealField(np.full((128, 128), 0.4)))


def test_classical_normalize_amplitude_equalized():
    # scene with i1 >= 0.2 at 20 dB: local amplitude within [0.8, 1.2]
    scene = make_test_scene("uniform", 3, snr_db=20.0)
    out = classical_normalize(synth_fringe(scene)).data
    from fringebos.demodulate import analytic_signal

    amp = np.abs(analytic_signal(RealField(out)).data)[20:-20, 20:-20]
    assert (amp > 0.8).mean() > 0.95 and amp.max() < 1.3


def test_normalized_fringe_range_enforced():
    with pytest.raises(ValueError):
        NormalizedFringe(RealField(np.full((8, 8), 1.5)))


# --- weights container ---

def test_weights_round_trip(tmp_path):
    w = _random_weights()
    path = tmp_path / "w.fnw"
    save_weights(w, path)
    back = load_weights(path)
    assert back.arch == w.arch
    for name, _, _ in enumerate_layers(w.arch):
        np.testing.assert_array_equal(back.tensors[name], w.tensors[name])


def test_weights_bad_magic(tmp_path):
    path = tmp_path / "bad.fnw"
    path.write_bytes(b"XXXX" + bytes(100))
    with pytest.raises(BadMagic):
        load_weights(path)


def test_weights_corrupt_blob(tmp_path):
    w = _random_weights()
    path = tmp_path / "w.fnw"
    save_weights(w, path)
    raw = bytearray(path.read_bytes())
    raw[-1] ^= 0xFF
    path.write_bytes(bytes(raw))
    with pytest.raises(HashMismatch):
        load_weights(path)


def test_weights_layer_list_validated(tmp_path):
    import json
    import struct

    w = _random_weights()
    path = tmp_path / "w.fnw"
    save_weights(w, path)
    raw = path.read_bytes()
    (hlen,) = struct.unpack_from("<I", raw, 4)
    header = json.loads(raw[8:8 + hlen])
    header["layers"][0]["shape"] = [1, 1, 4, 4]
    new_header = json.dumps(header).encode()
    path.write_bytes(raw[:4] + struct.pack("<I", len(new_header)) + new_header + raw[8 + hlen:])
    with pytest.raises(ShapeMismatch):
        load_weights(path)


def test_layer_enumeration_counts():
    # depth-5 generator: 5 encoder convs + 4 norms, 4 decoder convs + norms,
    # 1 output conv
    arch = UnetArch(depth=5, base_channels=16, input_size=256)
    layers = enumerate_layers(arch)
    convs = [l for l in layers if l[1] in ("conv", "transposed-conv")]
    assert len(convs) == 5 + 4 + 1
    names = [l[0] for l in layers]
    assert names[0] == "enc0.conv" and names[-1] == "out.conv"
    assert "enc0.norm.scale" not in names  # first block skips normalization


def test_every_tensor_consumed_once():
    # the forward pass touches each tensor exactly once
    w = _random_weights()
    seen = []

    class Spy(dict):
        def __getitem__(self, key):
            seen.append(key)
            return w.tensors[key]

    spy = ModelWeights(arch=w.arch, tensors=Spy(), blob_sha256=w.blob_sha256)
    rng = np.random.default_rng(1)
    unet.forward(spy, rng.uniform(-1, 1, (64, 64)).astype(np.float32))
    assert sorted(seen) == sorted(n for n, _, _ in enumerate_layers(w.arch))


# --- numpy forward primitives vs reference ---

def test_conv_matches_torch_semantics():
    torch = pytest.importorskip("torch")
    rng = np.random.default_rng(2)
    x = rng.normal(size=(3, 16, 16)).astype(np.float32)
    w = rng.normal(size=(5, 3, 4, 4)).astype(np.float32)
    ours = unet.conv_s2(x, w)
    ref = torch.nn.functional.conv2d(torch.from_numpy(x)[None], torch.from_numpy(w),
                                     stride=2, padding=1)[0].numpy()
    np.testing.assert_allclose(ours, ref, atol=1e-5)


def test_convT_matches_torch_semantics():
    torch = pytest.importorskip("torch")
    rng = np.random.default_rng(3)
    x = rng.normal(size=(4, 8, 8)).astype(np.float32)
    w = rng.normal(size=(4, 6, 4, 4)).astype(np.float32)
    ours = unet.convT_s2(x, w)
    ref = torch.nn.functional.conv_transpose2d(
        torch.from_numpy(x)[None], torch.from_numpy(w), stride=2, padding=1)[0].numpy()
    np.testing.assert_allclose(ours, ref, atol=1e-5)


# --- learned path dispatch ---

def test_unet_forward_shape_and_range():
    w = _random_weights()
    rng = np.random.default_rng(4)
    img = RealField(rng.uniform(0, 1, (64, 64)))
    out = unet_forward(w, img)
    assert out.data.shape == (64, 64)
    assert out.data.min() >= -1.0 and out.data.max() <= 1.0


def test_unet_forward_deterministic():
    w = _random_weights()
    img = RealField(np.random.default_rng(5).uniform(0, 1, (64, 64)))
    a = unet_forward(w, img).data
    b = unet_forward(w, img).data
    np.testing.assert_array_equal(a, b)


def test_unet_forward_size_mismatch():
    w = _random_weights()
    with pytest.raises(SizeMismatch):
        unet_forward(w, RealField(np.zeros((32, 32))))


def test_normalize_auto_dispatch():
    x = np.arange(256)
    img = RealField(np.tile(0.5 + 0.5 * np.cos(2 * np.pi * 0.05 * x), (256, 1)))
    classical = normalize_auto(img, None)
    assert np.abs(classical.data).max() <= 1.0


def test_normalize_auto_tiled_seams():
    # 128^2 model on a 192^2 image: blended tiles stay continuous
    w = _random_weights(UnetArch(depth=3, base_channels=4, input_size=128), seed=6)
    rng = np.random.default_rng(7)
    img = RealField(rng.uniform(0, 1, (192, 192)))
    out = normalize_auto(img, w).data
    assert out.shape == (192, 192)
    jumps = max(np.abs(np.diff(out, axis=0)).max(),
                np.abs(np.diff(out, axis=1)).max())
    # random weights give small activations; the seams must not add steps
    assert np.isfinite(out).all()
    assert out.min() >= -1.0 and out.max() <= 1.0
    assert jumps < 0.5
