import numpy as np
import pytest
import torch

from fringetrain.models import (
    FULL_ARCH,
    BadArch,
    Discriminator,
    Generator,
    GeneratorArch,
    build_models,
    parameter_count,
)


def test_arch_validation():
    with pytest.raises(BadArch):
        GeneratorArch(depth=1)
    with pytest.raises(BadArch):
        GeneratorArch(depth=5, input_size=100)  # not divisible by 32
    with pytest.raises(BadArch):
        GeneratorArch(base_channels=0)


def test_channel_widths_cap_at_8x():
    arch = FULL_ARCH
    assert [arch.channels(i) for i in range(8)] == [64, 128, 256, 512,
                                                   512, 512, 512, 512]


def test_full_arch_layer_shapes():
    gen = Generator(FULL_ARCH).eval()
    x = torch.zeros(1, 1, 256, 256)
    # first encoder block halves the image into 64 channels
    h = torch.nn.functional.leaky_relu(gen.enc_convs[0](x), 0.2)
    assert tuple(h.shape) == (1, 64, 128, 128)
    with torch.no_grad():
        out = gen(x)
    assert tuple(out.shape) == (1, 1, 256, 256)


def test_full_discriminator_patch_grid():
    disc = Discriminator(64).eval()
    with torch.no_grad():
        out = disc(torch.zeros(1, 1, 256, 256), torch.zeros(1, 1, 256, 256))
    assert tuple(out.shape) == (1, 1, 16, 16)


def test_desk_arch_parameter_count():
    gen, _ = build_models(GeneratorArch())
    assert parameter_count(gen) == 1_042_336


def test_generator_output_in_tanh_range():
    gen = Generator(GeneratorArch(depth=3, base_channels=4, input_size=64)).eval()
    with torch.no_grad():
        out = gen(torch.randn(2, 1, 64, 64))
    assert out.min() >= -1.0 and out.max() <= 1.0
    assert tuple(out.shape) == (2, 1, 64, 64)


def test_generator_convs_have_no_bias():
    gen = Generator(GeneratorArch(depth=3, base_channels=4, input_size=64))
    for conv in [*gen.enc_convs, *gen.dec_convs, gen.out_conv]:
        assert conv.bias is None


def test_first_encoder_block_unnormalized():
    gen = Generator(GeneratorArch(depth=4, base_channels=8, input_size=64))
    assert len(gen.enc_norms) == gen.arch.depth - 1
    assert len(gen.dec_norms) == gen.arch.depth - 1


def test_skip_connections_change_output():
    # zeroing an early encoder's contribution must alter the result, i.e.
    # the skips are actually wired through
    torch.manual_seed(0)
    arch = GeneratorArch(depth=3, base_channels=4, input_size=32)
    gen = Generator(arch).eval()
    x = torch.randn(1, 1, 32, 32)
    with torch.no_grad():
        base = gen(x)
        gen.enc_convs[0].weight.zero_()
        ablated = gen(x)
    assert not torch.allclose(base, ablated)


def test_discriminator_depends_on_both_inputs():
    torch.manual_seed(1)
    disc = Discriminator(8).eval()
    a = torch.randn(1, 1, 64, 64)
    b = torch.randn(1, 1, 64, 64)
    with torch.no_grad():
        assert not torch.allclose(disc(a, b), disc(a, torch.zeros_like(b)))
        assert not torch.allclose(disc(a, b), disc(torch.zeros_like(a), b))
