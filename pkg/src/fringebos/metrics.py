"""Phase-map evaluation: piston-removed RMSE, single-scale SSIM, and
sweep orchestration over noise or speckle axes."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRange, DimensionMismatch
from .raster import RealField

DEFAULT_MARGIN = 7  # W + 2 for the default subspace half-window W = 5


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    ssim: float
    piston_removed: float
    valid_fraction: float = 1.0


def _interior(a: np.ndarray, margin: int) -> np.ndarray:
    if margin > 0 and min(a.shape) > 2 * margin:
        return a[margin:-margin, margin:-margin]
    return a


def rmse_phase(est: RealField, truth: RealField, margin: int = DEFAULT_MARGIN) -> float:
    """Piston-removed RMSE over the interior."""
    if est.data.shape != truth.data.shape:
        raise DimensionMismatch("est/truth shapes differ")
    e = _interior(est.data, margin)
    t = _interior(truth.data, margin)
    c = float(np.mean(e - t))
    return float(np.sqrt(np.mean((e - c - t) ** 2)))


def _gaussian_kernel(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    ax = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-ax ** 2 / (2.0 * sigma ** 2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim_phase(est: RealField, truth: RealField, margin: int = DEFAULT_MARGIN,
               range_mode: str = "truth") -> float:
    """Single-scale SSIM (11x11 Gaussian window, sigma 1.5, K1=0.01, K2=0.03).

    The piston is removed first; the dynamic range L comes from the truth map
    (range_mode="pair" uses the joint range and makes the metric symmetric).
    Only fully interior window positions contribute.
    """
    from scipy.signal import fftconvolve

    if est.data.shape != truth.data.shape:
        raise DimensionMismatch("est/truth shapes differ")
    e = _interior(est.data, margin)
    t = _interior(truth.data, margin)
    if min(e.shape) < 11:
        raise DimensionMismatch("need at least 11 x 11 after margin")
    if range_mode == "pair":
        # split the piston between both maps so the metric is exchange-symmetric
        half = 0.5 * float(np.mean(e - t))
        e = e - half
        t = t + half
        L = max(e.max(), t.max()) - min(e.min(), t.min())
    else:
        e = e - float(np.mean(e - t))
        L = t.max() - t.min()
    if L <= 0:
        raise DegenerateRange("truth map has zero dynamic range")
    c1 = (0.01 * L) ** 2
    c2 = (0.03 * L) ** 2
    k = _gaussian_kernel()
    mu1 = fftconvolve(e, k, mode="valid")
    mu2 = fftconvolve(t, k, mode="valid")
    s11 = fftconvolve(e * e, k, mode="valid") - mu1 ** 2
    s22 = fftconvolve(t * t, k, mode="valid") - mu2 ** 2
    s12 = fftconvolve(e * t, k, mode="valid") - mu1 * mu2
    num = (2 * mu1 * mu2 + c1) * (2 * s12 + c2)
    den = (mu1 ** 2 + mu2 ** 2 + c1) * (s11 + s22 + c2)
    return float(np.mean(num / den))


def evaluate(est: RealField, truth: RealField, margin: int = DEFAULT_MARGIN) -> EvalReport:
    piston = float(np.mean(_interior(est.data, margin) - _interior(truth.data, margin)))
    return EvalReport(
        rmse=rmse_phase(est, truth, margin),
        ssim=ssim_phase(est, truth, margin),
        piston_removed=piston,
    )


SWEEP_COLUMNS = ["axis_value", "method", "rmse_mean", "rmse_sd",
                 "ssim_mean", "ssim_sd", "trials", "seed"]


def sweep_eval(method: str, axis: str, values, trials: int, seed: int,
               mod_kind: str = "m1", awgn_sd: float | None = None,
               weights=None, threads: int = 1, size: int = 256,
               cfg=None) -> list[dict]:
    """Run the full pipeline of `method` over an SNR or speckle-size axis.

    Each axis value gets `trials` independent scenes; per-trial seeds derive
    from the master seed, so the table is reproducible regardless of
    scheduling.  Returns one record per axis value.
    """
    from .pipeline import run_method
    from .simulate import make_test_scene, substream

    values = list(values)
    if not values:
        raise DegenerateRange("values list is empty")
    rows = []
    for vi, value in enumerate(values):
        rmses, ssims = [], []
        for t in range(trials):
            trial_seed = int(np.random.SeedSequence(seed, spawn_key=(vi, t)).generate_state(1)[0])
            if axis == "snr_db":
                scene = make_test_scene(mod_kind, trial_seed, width=size, height=size,
                                        snr_db=float(value))
            elif axis == "speckle_px":
                scene = make_test_scene(mod_kind, trial_seed, width=size, height=size,
                                        speckle_px=float(value), awgn_sd=awgn_sd)
            else:
                raise DegenerateRange(f"unknown axis {axis!r}")
            est = run_method(method, scene, weights=weights, threads=threads,
                             cfg=cfg)
            rmses.append(rmse_phase(est, RealField(scene.phase.data)))
            ssims.append(ssim_phase(est, RealField(scene.phase.data)))
        rows.append({
            "axis_value": value, "method": method,
            "rmse_mean": float(np.mean(rmses)), "rmse_sd": float(np.std(rmses)),
            "ssim_mean": float(np.mean(ssims)), "ssim_sd": float(np.std(ssims)),
            "trials": trials, "seed": seed,
        })
    return rows


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
