"""Generator and discriminator architectures.

Generator: encoder-decoder with skip connections.  Encoder block i is a
4x4 stride-2 convolution, per-channel normalization (skipped for the first
block), leaky rectifier (slope 0.2).  Decoder block j is a 4x4 stride-2
transposed convolution, normalization, rectifier, then channel-concat with
the mirror encoder output.  The final layer is a transposed convolution to
one channel followed by tanh.  Channel widths are base * min(2^i, 8);
convolutions carry no bias (the normalization affine supplies offsets).

Discriminator: conditional patch classifier over the channel-concat of the
conditioning image and the candidate, four 4x4 stride-2 convolutions
(normalized except the first) and a 3x3 stride-1 head producing one logit
per patch; a 256^2 input yields a 16x16 patch grid.

The full-scale configuration is depth 8 / base 64 (first downsample
128x128x64, output 256x256x1, discriminator channels 64-128-256-512); the
desk-scale default used by the acceptance suite is depth 5 / base 16.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn


class BadArch(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorArch:
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


FULL_ARCH = GeneratorArch(depth=8, base_channels=64, input_size=256)

# Normalization: per-channel learned scale/bias with tracked statistics.
# Batch size is 1 throughout, so training-time batch statistics are
# per-instance; inference uses the tracked statistics, which export_weights
# folds into plain scale/bias tensors.
_NORM_EPS = 1e-5


def _norm(ch: int) -> nn.BatchNorm2d:
    return nn.BatchNorm2d(ch, eps=_NORM_EPS)


class Generator(nn.Module):
    def __init__(self, arch: GeneratorArch):
        super().__init__()
        self.arch = arch
        ch = [arch.channels(i) for i in range(arch.depth)]
        self.enc_convs = nn.ModuleList()
        self.enc_norms = nn.ModuleList()
        prev = 1
        for i in range(arch.depth):
            self.enc_convs.append(nn.Conv2d(prev, ch[i], 4, 2, 1, bias=False))
            if i > 0:
                self.enc_norms.append(_norm(ch[i]))
            prev = ch[i]
        self.dec_convs = nn.ModuleList()
        self.dec_norms = nn.ModuleList()
        for j in range(arch.depth - 1):
            in_ch = ch[arch.depth - 1] if j == 0 else 2 * ch[arch.depth - 1 - j]
            out_ch = ch[arch.depth - 2 - j]
            self.dec_convs.append(nn.ConvTranspose2d(in_ch, out_ch, 4, 2, 1, bias=False))
            self.dec_norms.append(_norm(out_ch))
        self.out_conv = nn.ConvTranspose2d(2 * ch[0], 1, 4, 2, 1, bias=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for i in range(self.arch.depth):
            x = self.enc_convs[i](x)
            if i > 0:
                x = self.enc_norms[i - 1](x)
            x = nn.functional.leaky_relu(x, 0.2)
            skips.append(x)
        x = skips[-1]
        for j in range(self.arch.depth - 1):
            x = self.dec_convs[j](x)
            x = self.dec_norms[j](x)
            x = nn.functional.relu(x)
            x = torch.cat([x, skips[self.arch.depth - 2 - j]], dim=1)
        return torch.tanh(self.out_conv(x))


class Discriminator(nn.Module):
    """Patch classifier on (condition, candidate) channel pairs; emits logits."""

    def __init__(self, base_channels: int = 64):
        super().__init__()
        ch = [base_channels * m for m in (1, 2, 4, 8)]
        layers: list[nn.Module] = [nn.Conv2d(2, ch[0], 4, 2, 1, bias=False),
                                   nn.LeakyReLU(0.2)]
        prev = ch[0]
        for c in ch[1:]:
            layers += [nn.Conv2d(prev, c, 4, 2, 1, bias=False), _norm(c),
                       nn.LeakyReLU(0.2)]
            prev = c
        layers.append(nn.Conv2d(prev, 1, 3, 1, 1, bias=True))
        self.net = nn.Sequential(*layers)

    def forward(self, condition: torch.Tensor, candidate: torch.Tensor) -> torch.Tensor:
        return self.net(torch.cat([condition, candidate], dim=1))


def build_models(arch: GeneratorArch) -> tuple[Generator, Discriminator]:
    return Generator(arch), Discriminator(arch.base_channels)


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())
