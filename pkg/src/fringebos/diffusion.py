"""Diffusion-coefficient extraction from temporal phase differences.

The phase difference between two frames of a 1D diffusion process follows
    dphi(x) = A * ( exp[-(x-x0)^2/(4 D t1)] / (2 sqrt(D t1))
                  - exp[-(x-x0)^2/(4 D t2)] / (2 sqrt(D t2)) )
with a free proportionality constant A and center offset x0.  Rows are fit
independently by Levenberg-Marquardt and aggregated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadArguments,
    DegenerateWindow,
    DimensionMismatch,
    NoConvergence,
)
from .raster import RealField


@dataclass(frozen=True)
class DiffusionFit:
    row: int
    D: float          # m^2/s
    amplitude: float  # absorbs the model's proportionality constant
    x0: float         # meters
    r2: float


@dataclass(frozen=True)
class DiffusionAggregate:
    mean_D: float
    sd_D: float
    fits: tuple

    def __post_init__(self):
        if len(self.fits) < 2:
            raise BadArguments("aggregate needs >= 2 row fits")


def phase_difference(phi_t1: RealField, phi_t2: RealField,
                     piston_band: float = 0.1) -> RealField:
    """phi_t1 - phi_t2 with joint piston removal.

    The piston is the median of the difference over the leftmost
    `piston_band` fraction of columns, assumed free of diffusion signal.
    """
    if phi_t1.data.shape != phi_t2.data.shape:
        raise DimensionMismatch("frame shapes differ")
    d = phi_t1.data - phi_t2.data
    band = max(1, int(round(piston_band * d.shape[1])))
    return RealField(d - np.median(d[:, :band]))


def model_dphi(x, D: float, A: float, x0: float, t1: float, t2: float):
    """Closed-form phase-difference model; x and x0 in meters."""
    if D <= 0 or t1 <= 0 or t2 <= 0 or t1 >= t2:
        raise BadArguments("need D > 0 and 0 < t1 < t2")
    x = np.asarray(x, dtype=np.float64)
    u = (x - x0) ** 2 / (4.0 * D)
    return A * (np.exp(-u / t1) / (2.0 * np.sqrt(D * t1))
                - np.exp(-u / t2) / (2.0 * np.sqrt(D * t2)))


def fit_row(dphi_row, px: float, t1: float, t2: float,
            fit_window: tuple[int, int], row: int = 0,
            d_init: float = 1e-9) -> DiffusionFit:
    """Least-squares fit of (D, A, x0) on one row; D is fit in log space to
    stay positive.  Convergence: relative cost change < 1e-12 or 200 iterations."""
    from scipy.optimize import least_squares

    dphi_row = np.asarray(dphi_row, dtype=np.float64)
    lo, hi = fit_window
    if hi - lo < 30:
        raise BadArguments("fit window must span at least 30 samples")
    y = dphi_row[lo:hi]
    x = np.arange(lo, hi) * px
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot < 1e-12:
        raise DegenerateWindow("flat data in fit window")
    peak_idx = int(np.argmax(np.abs(y)))
    x0_init = float(x[peak_idx])
    peak_model = 1.0 / (2 * np.sqrt(d_init * t1)) - 1.0 / (2 * np.sqrt(d_init * t2))
    a_init = float(y[peak_idx] / peak_model)

    def residuals(p):
        log_d, a, x0 = p
        return model_dphi(x, np.exp(log_d), a, x0, t1, t2) - y

    result = least_squares(
        residuals, [np.log(d_init), a_init, x0_init], method="lm",
        ftol=1e-12, xtol=1e-14, gtol=1e-14, max_nfev=200 * 4)
    if not result.success:
        raise NoConvergence(f"row {row}: {result.message}")
    log_d, a, x0 = result.x
    ss_res = float(np.sum(result.fun ** 2))
    return DiffusionFit(row=row, D=float(np.exp(log_d)), amplitude=float(a),
                        x0=float(x0), r2=1.0 - ss_res / ss_tot)


def fit_diffusion(frames, times, px: float, rows, fit_window: tuple[int, int],
                  frame_pair: tuple[int, int] = (0, 5)) -> DiffusionAggregate:
    """Phase-difference the designated frame pair, fit the listed rows, and
    aggregate mean/sd of D."""
    frames = list(frames)
    times = [float(t) for t in times]
    rows = list(rows)
    if len(frames) < 2 or len(frames) != len(times):
        raise BadArguments("need >= 2 frames with matching times")
    if len(rows) < 2:
        raise BadArguments("need >= 2 rows")
    i, j = frame_pair
    dphi = phase_difference(frames[i], frames[j])
    fits = tuple(fit_row(dphi.data[r], px, times[i], times[j], fit_window, row=r)
                 for r in rows)
    ds = np.array([f.D for f in fits])
    return DiffusionAggregate(mean_D=float(ds.mean()), sd_D=float(ds.std(ddof=1)),
                              fits=fits)
