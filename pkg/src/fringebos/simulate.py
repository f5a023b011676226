"""Fringe-pattern simulation: carrier fringes, modulation maps, noise models,
training datasets, and synthetic diffusion sequences.

All randomness is a pure function of (parameters, seed).  Per-image streams
are split off the master seed by spawn keys, so generation order (serial or
parallel) never changes the output.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadSpeckleSize,
    BadTimes,
    ConstantField,
    DimensionMismatch,
    InvariantViolation,
    IoFailure,
)
from .raster import RealField, write_raster
from .zernike import ZernikeSpec, zernike_eval

# substream indices off a scene seed
_STREAM_SPECKLE = 0
_STREAM_AWGN = 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Deterministic child generator; independent of the order streams are drawn."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass(frozen=True)
class SimScene:
    """Full description of one simulated fringe pattern."""

    phase: RealField            # radians, excludes the carrier
    background: RealField       # i0 in [0, 1]
    modulation: RealField       # i1 in [0, 1], i0 + i1 <= 1
    fx: float                   # carrier, cycles/pixel, in (0, 0.5)
    snr_db: float | None = None
    speckle_px: float | None = None
    awgn_sd: float | None = None   # fixed-sigma alternative to snr_db
    seed: int = 0
    clip: bool = False          # sensor-like saturation to [0, 1.5], off by default

    def __post_init__(self):
        i0, i1 = self.background.data, self.modulation.data
        if i0.shape != i1.shape or i0.shape != self.phase.data.shape:
            raise DimensionMismatch("phase/background/modulation shapes differ")
        if i0.min() < -1e-12 or i0.max() > 1 + 1e-12 or i1.min() < -1e-12 or i1.max() > 1 + 1e-12:
            raise InvariantViolation("i0 and i1 must lie in [0, 1]")
        if (i0 + i1).max() > 1 + 1e-9:
            raise InvariantViolation("i0 + i1 must not exceed 1")
        if not 0.0 < self.fx < 0.5:
            raise InvariantViolation(f"carrier fx={self.fx} outside (0, 0.5)")
        if self.snr_db is not None and self.awgn_sd is not None:
            raise InvariantViolation("snr_db and awgn_sd are mutually exclusive")

    @property
    def width(self) -> int:
        return self.phase.width

    @property
    def height(self) -> int:
        return self.phase.height

    def normalized_truth(self) -> RealField:
        """Ground-truth normalized fringe cos(2 pi fx x + phi)."""
        x = np.arange(self.width)
        return RealField(np.cos(2 * np.pi * self.fx * x[None, :] + self.phase.data))


def add_awgn(field: RealField, snr_db: float, rng: np.random.Generator,
             ac_power: float | None = None) -> RealField:
    """Add zero-mean Gaussian noise at the requested SNR.

    SNR is referenced to the AC fringe power: sigma^2 = P_ac / 10^(snr/10).
    When ac_power is not supplied, the variance of `field` itself is used
    (appropriate when the field is the modulated term).
    """
    if ac_power is None:
        ac_power = float(np.var(field.data))
    if ac_power <= 0.0:
        raise ConstantField("AC power is zero; SNR undefined")
    sigma = np.sqrt(ac_power / 10.0 ** (snr_db / 10.0))
    return RealField(field.data + rng.normal(0.0, sigma, size=field.data.shape))


def add_awgn_sd(field: RealField, sd: float, rng: np.random.Generator) -> RealField:
    """Add zero-mean Gaussian noise with a fixed standard deviation."""
    if sd < 0:
        raise InvariantViolation("noise sd must be >= 0")
    return RealField(field.data + rng.normal(0.0, sd, size=field.data.shape))


def gen_speckle(width: int, height: int, speckle_px: float,
                rng: np.random.Generator) -> RealField:
    """Fully developed speckle intensity with mean 1.

    A circular complex Gaussian field is low-passed by a circular pupil of
    radius 1/(2*speckle_px) cycles/pixel; the intensity is |.|^2.
    """
    if not 2.0 <= speckle_px <= min(width, height) / 4.0:
        raise BadSpeckleSize(f"speckle_px={speckle_px} outside [2, min(w,h)/4]")
    g = rng.normal(size=(height, width)) + 1j * rng.normal(size=(height, width))
    fx = np.fft.fftfreq(width)[None, :]
    fy = np.fft.fftfreq(height)[:, None]
    pupil = np.hypot(fx, fy) <= 1.0 / (2.0 * speckle_px)
    u = np.fft.ifft2(np.fft.fft2(g) * pupil)
    intensity = np.abs(u) ** 2
    return RealField(intensity / intensity.mean())


def apply_speckle(clean: RealField, speckle: RealField, dc: RealField) -> RealField:
    """Multiply the modulated term by the speckle field: dc + (clean - dc) * s."""
    if clean.data.shape != speckle.data.shape or clean.data.shape != dc.data.shape:
        raise DimensionMismatch("clean/speckle/dc shapes differ")
    return RealField(dc.data + (clean.data - dc.data) * speckle.data)


def synth_fringe(scene: SimScene) -> RealField:
    """Render the scene: clean fringe, then speckle, then AWGN."""
    x = np.arange(scene.width)
    modulated = scene.modulation.data * np.cos(
        2 * np.pi * scene.fx * x[None, :] + scene.phase.data)
    out = scene.background.data + modulated
    if scene.speckle_px is not None:
        s = gen_speckle(scene.width, scene.height, scene.speckle_px,
                        substream(scene.seed, _STREAM_SPECKLE))
        out = scene.background.data + (out - scene.background.data) * s.data
    ac_power = float(np.var(out - scene.background.data))
    rng = substream(scene.seed, _STREAM_AWGN)
    if scene.snr_db is not None:
        if ac_power <= 0.0:
            raise ConstantField("modulated term has zero power")
        out = out + rng.normal(0.0, np.sqrt(ac_power / 10 ** (scene.snr_db / 10.0)),
                               size=out.shape)
    elif scene.awgn_sd is not None:
        out = out + rng.normal(0.0, scene.awgn_sd, size=out.shape)
    if scene.clip:
        out = np.clip(out, 0.0, 1.5)
    return RealField(out)


def modulation_map(kind: str, width: int, height: int,
                   rng: np.random.Generator | None = None) -> RealField:
    """Non-uniform fringe-amplitude test maps.

    uniform: constant 0.45.
    M1: low-pass random field quantized to 4 levels in [0.1, 0.8]
        (piecewise-constant patches with step edges).
    M2: smooth product of sinusoids with periods ~ width/3, in [0.1, 0.8].
    """
    kind = kind.lower()
    if kind == "uniform":
        return RealField(np.full((height, width), 0.45))
    if kind == "m1":
        if rng is None:
            raise InvariantViolation("M1 map requires an rng")
        raw = rng.normal(size=(height, width))
        f_x = np.fft.fftfreq(width)[None, :]
        f_y = np.fft.fftfreq(height)[:, None]
        lowpass = np.hypot(f_x, f_y) <= 3.0 / min(width, height)
        smooth = np.fft.ifft2(np.fft.fft2(raw) * lowpass).real
        # rank-based quartile quantization keeps the four patches balanced
        qs = np.quantile(smooth, [0.25, 0.5, 0.75])
        levels = np.linspace(0.1, 0.8, 4)
        idx = np.searchsorted(qs, smooth)
        return RealField(levels[idx])
    if kind == "m2":
        x = np.arange(width)[None, :]
        y = np.arange(height)[:, None]
        base = np.sin(2 * np.pi * x / (width / 3.0)) * np.sin(2 * np.pi * y / (height / 3.0))
        return RealField(0.45 + 0.35 * base)
    raise InvariantViolation(f"unknown modulation kind {kind!r}")


def random_phase_map(width: int, height: int, rng: np.random.Generator,
                     n_terms: int = 20, pv_range: tuple[float, float] = (10.0, 30.0)) -> RealField:
    """Random Zernike phase, rescaled to a random peak-to-valley in pv_range."""
    coeffs = rng.uniform(-1.0, 1.0, size=n_terms)
    raw = zernike_eval(ZernikeSpec(tuple(coeffs)), width, height).data
    pv = raw.max() - raw.min()
    target = rng.uniform(*pv_range)
    if pv < 1e-12:
        return RealField(np.zeros((height, width)))
    return RealField((raw - raw.mean()) * (target / pv))


@dataclass(frozen=True)
class DatasetParams:
    """Parameter ranges for the training corpus.  Defaults match the
    reference corpus; evaluation studies that probe outside these ranges
    (e.g. lower SNR or larger speckle) can widen them."""

    fx_range: tuple = (0.04, 0.06)           # cycles/px
    speckle_range: tuple = (4.0, 8.0)        # px
    snr_range_db: tuple = (10.0, 40.0)

    def __post_init__(self):
        for lo, hi in (self.fx_range, self.speckle_range, self.snr_range_db):
            if not lo <= hi:
                raise InvariantViolation("ranges must satisfy lo <= hi")


def random_scene(width: int, height: int, seed: int,
                 params: DatasetParams | None = None) -> SimScene:
    """Draw one training-corpus scene: random Zernike phase and i0/i1 maps,
    fx ~ U[0.04, 0.06], speckle_px ~ U[4, 8], snr_db ~ U[10, 40] by default."""
    params = params or DatasetParams()
    rng = substream(seed, 100)
    phase = random_phase_map(width, height, rng)
    raw0 = zernike_eval(ZernikeSpec(tuple(rng.uniform(-1, 1, size=6))), width, height).data
    raw1 = zernike_eval(ZernikeSpec(tuple(rng.uniform(-1, 1, size=6))), width, height).data

    def unit(a):
        span = a.max() - a.min()
        return (a - a.min()) / span if span > 1e-12 else np.zeros_like(a)

    i0 = 0.15 + 0.45 * unit(raw0)                  # [0.15, 0.6]
    i1 = 0.1 + unit(raw1) * (0.95 - i0 - 0.1)      # [0.1, 0.95 - i0]
    return SimScene(
        phase=phase,
        background=RealField(i0),
        modulation=RealField(i1),
        fx=float(rng.uniform(*params.fx_range)),
        speckle_px=float(rng.uniform(*params.speckle_range)),
        snr_db=float(rng.uniform(*params.snr_range_db)),
        seed=seed,
    )


def make_test_scene(mod_kind: str, seed: int, width: int = 256, height: int = 256,
                    fx: float = 0.05, snr_db: float | None = None,
                    speckle_px: float | None = None,
                    awgn_sd: float | None = None) -> SimScene:
    """Evaluation scene: random smooth Zernike phase, flat background 0.2,
    M1/M2/uniform modulation."""
    rng = substream(seed, 200)
    phase = random_phase_map(width, height, rng, n_terms=10, pv_range=(12.0, 25.0))
    i1 = modulation_map(mod_kind, width, height, rng)
    i0 = RealField(np.full((height, width), 0.2))
    return SimScene(phase=phase, background=i0, modulation=i1, fx=fx,
                    snr_db=snr_db, speckle_px=speckle_px, awgn_sd=awgn_sd, seed=seed)


def gen_dataset(n: int, out_dir, master_seed: int, width: int = 256,
                height: int = 256, params: DatasetParams | None = None) -> list[dict]:
    """Write n (degraded, normalized-ground-truth) FPR1 pairs and a JSONL manifest.

    Returns the manifest records.
    """
    if n < 1:
        raise InvariantViolation("n must be >= 1")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise IoFailure(str(e)) from e
    records = []
    for i in range(n):
        seed = int(np.random.SeedSequence(master_seed, spawn_key=(i,)).generate_state(1)[0])
        scene = random_scene(width, height, seed, params)
        degraded = synth_fringe(scene)
        truth = scene.normalized_truth()
        in_path = os.path.join(out_dir, f"input_{i:05d}.fpr")
        tgt_path = os.path.join(out_dir, f"target_{i:05d}.fpr")
        write_raster(degraded, in_path)
        write_raster(truth, tgt_path)
        records.append({
            "index": i,
            "seed": seed,
            "fx": scene.fx,
            "snr_db": scene.snr_db,
            "speckle_px": scene.speckle_px,
            "input_path": os.path.basename(in_path),
            "target_path": os.path.basename(tgt_path),
        })
    try:
        with open(os.path.join(out_dir, "manifest.jsonl"), "w") as f:
            for rec in records:
                f.write(json.dumps(rec) + "\n")
    except OSError as e:
        raise IoFailure(str(e)) from e
    return records


def diffusion_phase(x_m: np.ndarray, D: float, t: float, amplitude: float,
                    x0_m: float = 0.0) -> np.ndarray:
    """A * exp(-(x-x0)^2 / (4 D t)) / (2 sqrt(D t))."""
    return amplitude * np.exp(-(x_m - x0_m) ** 2 / (4.0 * D * t)) / (2.0 * np.sqrt(D * t))


def synth_diffusion_sequence(D: float, times, px: float, width: int, height: int,
                             noise_sd: float = 0.0, peak_to_valley: float = 6.0,
                             seed: int = 0) -> list[RealField]:
    """Phase frames of a 1D diffusion process centered at the middle column.

    The amplitude is fixed so the first frame has the requested peak-to-valley.
    """
    times = [float(t) for t in times]
    if D <= 0:
        raise BadTimes("D must be positive")
    if len(times) == 0 or any(t <= 0 for t in times) or sorted(times) != times:
        raise BadTimes("times must be positive and ascending")
    x0_col = width // 2
    x_m = (np.arange(width) - x0_col) * px
    first = diffusion_phase(x_m, D, times[0], 1.0)
    span = first.max() - first.min()
    if span <= 0:
        raise BadTimes("degenerate first frame")
    amplitude = peak_to_valley / span
    frames = []
    for k, t in enumerate(times):
        row = diffusion_phase(x_m, D, t, amplitude)
        frame = np.tile(row, (height, 1))
        if noise_sd > 0:
            frame = frame + substream(seed, 300, k).normal(0.0, noise_sd, size=frame.shape)
        frames.append(RealField(frame))
    return frames
