"""Fringe normalization: map a degraded fringe pattern to a background-free,
unit-modulation fringe, either classically or with the learned model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import unet
from .demodulate import analytic_signal, estimate_carrier
from .errors import NoCarrier, SizeMismatch
from .raster import RealField
from .unet import ModelWeights, load_weights  # re-exported API

__all__ = [
    "NormalizedFringe", "classical_normalize", "unet_forward",
    "normalize_auto", "ModelWeights", "load_weights",
]

DC_RADIUS = 0.01  # cycles/pixel disk zeroed around DC


@dataclass(frozen=True)
class NormalizedFringe:
    """Fringe with background removed and modulation equalized; samples in [-1, 1]."""

    field: RealField

    def __post_init__(self):
        d = self.field.data
        if d.min() < -1 - 1e-9 or d.max() > 1 + 1e-9:
            raise ValueError("normalized fringe must lie in [-1, 1]")

    @property
    def data(self) -> np.ndarray:
        return self.field.data


def _check_carrier(img: np.ndarray) -> None:
    spec = np.abs(np.fft.fft(img, axis=1)).mean(axis=0)
    freqs = np.fft.fftfreq(img.shape[1])
    outside = np.abs(freqs) > DC_RADIUS
    if not outside.any():
        raise NoCarrier("image too small to resolve a carrier")
    peak = spec[outside].max()
    dc = abs(spec[0]) + 1e-30
    if peak < 1e-8 * dc or peak <= 0.0:
        raise NoCarrier("no spectral peak beyond the DC region")


def classical_normalize(img: RealField) -> NormalizedFringe:
    """Reference normalizer: DC-disk background suppression, then division by
    a smoothed analytic-signal envelope."""
    from scipy.ndimage import gaussian_filter

    data = img.data
    _check_carrier(data)
    h, w = data.shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    spec = np.fft.fft2(data)
    spec[np.hypot(fx, fy) <= DC_RADIUS] = 0.0
    bg_removed = np.fft.ifft2(spec).real
    fx_hat = abs(estimate_carrier(RealField(bg_removed)))
    env = np.abs(analytic_signal(RealField(bg_removed)).data)
    env = gaussian_filter(env, sigma=1.0 / (2.0 * fx_hat))
    eps = 1e-3 * env.max()
    out = np.clip(bg_removed / np.maximum(env, eps), -1.0, 1.0)
    return NormalizedFringe(RealField(out))


def unet_forward(weights: ModelWeights, img: RealField) -> NormalizedFringe:
    """Forward inference of the learned normalizer on one full-size tile.

    The input is linearly rescaled to [-1, 1] from its own [min, max].
    """
    n = weights.arch.input_size
    if img.height != n or img.width != n:
        raise SizeMismatch(f"expected {n} x {n} input, got {img.height} x {img.width}")
    d = img.data
    lo, hi = d.min(), d.max()
    scaled = np.zeros_like(d) if hi - lo < 1e-12 else (d - lo) / (hi - lo) * 2.0 - 1.0
    out = unet.forward(weights, scaled)
    return NormalizedFringe(RealField(np.clip(out.astype(np.float64), -1.0, 1.0)))


def _cosine_ramp(n: int, overlap: int, lo_edge: bool, hi_edge: bool) -> np.ndarray:
    w = np.ones(n)
    ramp = 0.5 - 0.5 * np.cos(np.pi * (np.arange(overlap) + 0.5) / overlap)
    if lo_edge:
        w[:overlap] = ramp
    if hi_edge:
        w[-overlap:] = ramp[::-1]
    return w


def _tile_starts(total: int, tile: int, overlap: int) -> list[int]:
    if total <= tile:
        return [0]
    step = tile - overlap
    starts = list(range(0, total - tile, step))
    starts.append(total - tile)
    return starts


def normalize_auto(img: RealField, weights: ModelWeights | None = None) -> NormalizedFringe:
    """Dispatch to the learned normalizer when weights are supplied
    (tiled with cosine-blended overlaps for larger inputs), else classical."""
    if weights is None:
        return classical_normalize(img)
    n = weights.arch.input_size
    h, w = img.height, img.width
    if h == n and w == n:
        return unet_forward(weights, img)
    if h < n or w < n:
        raise SizeMismatch(f"input {h} x {w} smaller than model tile {n}")
    overlap = 32
    acc = np.zeros((h, w))
    wsum = np.zeros((h, w))
    ys = _tile_starts(h, n, overlap)
    xs = _tile_starts(w, n, overlap)
    for y0 in ys:
        for x0 in xs:
            tile = RealField(img.data[y0:y0 + n, x0:x0 + n])
            out = unet_forward(weights, tile).data
            wy = _cosine_ramp(n, overlap, y0 > 0, y0 + n < h)
            wx = _cosine_ramp(n, overlap, x0 > 0, x0 + n < w)
            wt = wy[:, None] * wx[None, :]
            acc[y0:y0 + n, x0:x0 + n] += out * wt
            wsum[y0:y0 + n, x0:x0 + n] += wt
    return NormalizedFringe(RealField(np.clip(acc / wsum, -1.0, 1.0)))
