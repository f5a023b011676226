import numpy as np
import pytest
import torch

from fringetrain.export import (
    _fold_norm,
    enumerate_layers,
    export_weights,
    generator_tensors,
    import_weights,
    parity_dump,
)
from fringetrain.fpr1 import read_raster, write_raster
from fringetrain.models import Generator, GeneratorArch


def _randomized_generator(arch=GeneratorArch(depth=3, base_channels=4, input_size=64),
                          seed=0):
    torch.manual_seed(seed)
    gen = Generator(arch)
    # give the tracked statistics non-trivial values
    with torch.no_grad():
        for _ in range(3):
            gen(torch.randn(2, 1, arch.input_size, arch.input_size))
    return gen.eval()


def test_enumerate_layers_matches_module_shapes():
    arch = GeneratorArch(depth=4, base_channels=8, input_size=64)
    gen = Generator(arch)
    tensors = generator_tensors(gen)
    spec = enumerate_layers(arch)
    assert sorted(tensors) == sorted(n for n, _, _ in spec)
    for name, kind, shape in spec:
        assert tuple(tensors[name].shape) == shape, name


def test_fold_norm_matches_eval_batchnorm():
    torch.manual_seed(2)
    norm = torch.nn.BatchNorm2d(6, eps=1e-5)
    with torch.no_grad():
        norm.weight.copy_(torch.rand(6) + 0.5)
        norm.bias.copy_(torch.randn(6))
        norm.running_mean.copy_(torch.randn(6))
        norm.running_var.copy_(torch.rand(6) + 0.1)
    norm.eval()
    scale, bias = _fold_norm(norm)
    x = torch.randn(1, 6, 8, 8)
    with torch.no_grad():
        want = norm(x).numpy()
    got = x.numpy() * scale[None, :, None, None] + bias[None, :, None, None]
    np.testing.assert_allclose(got, want, atol=1e-5)


def test_export_round_trip_exact(tmp_path):
    gen = _randomized_generator()
    path = tmp_path / "w.fnw"
    export_weights(gen, path)
    arch, tensors = import_weights(path)
    assert arch == gen.arch
    want = generator_tensors(gen)
    for name in want:
        np.testing.assert_array_equal(tensors[name],
                                      want[name].astype(np.float32))


def test_import_rejects_corrupt_blob(tmp_path):
    gen = _randomized_generator()
    path = tmp_path / "w.fnw"
    export_weights(gen, path)
    raw = bytearray(path.read_bytes())
    raw[-2] ^= 0x40
    path.write_bytes(bytes(raw))
    with pytest.raises(ValueError):
        import_weights(path)


def test_import_rejects_bad_magic(tmp_path):
    path = tmp_path / "w.fnw"
    path.write_bytes(b"NOPE" + bytes(64))
    with pytest.raises(ValueError):
        import_weights(path)


def test_parity_dump_matches_direct_eval(tmp_path):
    gen = _randomized_generator(seed=3)
    rng = np.random.default_rng(0)
    inputs = []
    for k in range(2):
        img = rng.uniform(0, 1, (64, 64))
        p = tmp_path / f"in{k}.fpr"
        write_raster(img, p)
        inputs.append(str(p))
    written = parity_dump(gen, inputs, str(tmp_path / "out"))
    assert len(written) == 2
    img = read_raster(inputs[0])
    lo, hi = img.min(), img.max()
    scaled = ((img - lo) / (hi - lo) * 2 - 1).astype(np.float32)
    with torch.no_grad():
        want = gen(torch.from_numpy(scaled)[None, None])[0, 0].numpy()
    got = read_raster(written[0])
    np.testing.assert_allclose(got, want, atol=1e-6)
