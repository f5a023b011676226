"""FT (carrier-sideband) and windowed-Fourier-ridges demodulators used as
comparison baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .demodulate import estimate_carrier
from .errors import InvariantViolation, NoCarrier
from .raster import ComplexField, RealField


@dataclass(frozen=True)
class FtConfig:
    band_center: float | None = None     # cycles/px; None = estimate from the image
    band_halfwidth: float | None = None  # default 0.8 * band_center
    # Gaussian mask with sigma = band_halfwidth / 2


@dataclass(frozen=True)
class WftConfig:
    sigma: float = 10.0                      # window width, pixels
    fx_range: tuple = (-2.0, 2.0)            # rad/px
    fy_range: tuple = (-2.0, 2.0)
    fstep: float = 0.025                     # rad/px

    def __post_init__(self):
        if self.fstep > 1.0 / self.sigma + 1e-12:
            raise InvariantViolation("fstep must be <= 1/sigma")


def ft_demodulate(img: RealField, cfg: FtConfig | None = None) -> RealField:
    """Takeda-style demodulation: isolate the +fx sideband with a Gaussian band
    mask (hard-zeroed around DC), shift to baseband, take the argument.

    Output is the wrapped phase with the carrier already removed.
    """
    cfg = cfg or FtConfig()
    data = img.data
    h, w = data.shape
    center = cfg.band_center
    if center is None:
        center = estimate_carrier(img)
    if center <= 0:
        raise NoCarrier("band center must be positive")
    halfwidth = cfg.band_halfwidth if cfg.band_halfwidth is not None else 0.8 * center
    if center - halfwidth <= 0:
        raise NoCarrier("sideband must exclude DC")
    fx = np.fft.fftfreq(w)[None, :]
    fy = np.fft.fftfreq(h)[:, None]
    sigma = halfwidth / 2.0
    mask = np.exp(-((fx - center) ** 2 + fy ** 2) / (2.0 * sigma ** 2))
    mask = np.where(fx >= center - halfwidth, mask, 0.0)  # hard-zero the DC side
    sideband = np.fft.ifft2(np.fft.fft2(data) * mask)
    x = np.arange(w)[None, :]
    baseband = sideband * np.exp(-2j * np.pi * center * x)
    return RealField(np.angle(baseband))


def _freq_grid(rng: tuple, step: float) -> np.ndarray:
    lo, hi = rng
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def wft_demodulate(field: ComplexField, cfg: WftConfig | None = None,
                   return_ridge: bool = False):
    """Windowed-Fourier ridge demodulation of a complex field.

    For each frequency on the (fx, fy) grid the field is correlated with a
    Gaussian-windowed complex exponential; each pixel keeps the phase of the
    response at its maximizing (ridge) frequency.  Ties go to the lowest
    frequency index, so the output is deterministic.
    """
    cfg = cfg or WftConfig()
    data = field.data
    h, w = data.shape
    need = int(np.ceil(4 * cfg.sigma))
    if h < need or w < need:
        raise InvariantViolation(f"field must be at least 4*sigma = {need} per side")
    half = int(np.ceil(4.0 * cfg.sigma))
    dx = np.arange(-half, half + 1)
    g1 = np.exp(-dx ** 2 / (2.0 * cfg.sigma ** 2))
    fxs = _freq_grid(cfg.fx_range, cfg.fstep)
    fys = _freq_grid(cfg.fy_range, cfg.fstep)

    def axis_ffts(freqs, n):
        # 1D FFTs of the windowed exponential placed at the origin with
        # wrap-around; the separable 2D kernel FFT is their outer product
        out = []
        for f in freqs:
            line = np.zeros(n, dtype=np.complex128)
            np.add.at(line, dx % n, g1 * np.exp(1j * f * dx))
            out.append(np.fft.fft(line))
        return out

    fxs_f = axis_ffts(fxs, w)
    fys_f = axis_ffts(fys, h)

    spec = np.fft.fft2(data)
    best_mag = np.full((h, w), -1.0)
    best_resp = np.zeros((h, w), dtype=np.complex128)
    ridge_fx = np.zeros((h, w))
    ridge_fy = np.zeros((h, w))
    fxs_conj = np.conj(np.asarray(fxs_f))  # (nx, w)
    for iy, wy in enumerate(fys):
        # all fx candidates for this fy in one batched inverse transform
        stack = (spec * np.conj(fys_f[iy])[:, None])[None, :, :] * fxs_conj[:, None, :]
        resp = np.fft.ifft2(stack, axes=(1, 2))
        mag = np.abs(resp)
        pick = mag.argmax(axis=0)  # ties -> lowest fx index
        rows, cols = np.ogrid[:h, :w]
        mag = mag[pick, rows, cols]
        better = mag > best_mag + 1e-15
        best_mag = np.where(better, mag, best_mag)
        best_resp = np.where(better, resp[pick, rows, cols], best_resp)
        ridge_fx = np.where(better, fxs[pick], ridge_fx)
        ridge_fy = np.where(better, wy, ridge_fy)
    phase = RealField(np.angle(best_resp))
    if return_ridge:
        return phase, RealField(ridge_fx), RealField(ridge_fy)
    return phase
