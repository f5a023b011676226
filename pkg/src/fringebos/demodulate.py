"""Windowed linear-phase subspace demodulation.

Per pixel, an S x S window of the analytic signal is modeled as
exp(j(a0 + a1*x + a2*y)) with centered window coordinates.  The dominant
singular triple of the window matrix gives the signal subspace; the shift
(rotational-invariance) phase of the singular vectors yields (a1, a2) and
the carrier-compensated window mean yields a0.  The wrapped phase at the
pixel is a0.

Axis convention (pinned by the axis-calibration tests): the window matrix
is indexed [row, column] = [y, x], so the left singular vector carries the
y-frequency a2 and the conjugated right singular vector carries the
x-frequency a1.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvariantViolation, NoConvergence, NonFinite, NoPeak, RankDeficient
from .raster import ComplexField, RealField

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowEstimate:
    """Local polynomial phase coefficients for one window."""

    a0: float  # radians, in (-pi, pi]
    a1: float  # radians/pixel along x (columns), includes the carrier
    a2: float  # radians/pixel along y (rows)


@dataclass(frozen=True)
class SubspaceConfig:
    W: int = 5                       # half-window; S = 2W + 1
    svd_mode: str = "power-iteration"  # or "full"
    power_iters: int = 30
    boundary: str = "mirror"
    carrier: float | None = None     # known fx (cycles/px); None = estimate

    def __post_init__(self):
        if self.W < 1:
            raise InvariantViolation("W must be >= 1 (S >= 3)")
        if self.power_iters < 5:
            raise InvariantViolation("power_iters must be >= 5")
        if self.svd_mode not in ("full", "power-iteration"):
            raise InvariantViolation(f"unknown svd_mode {self.svd_mode!r}")
        if self.boundary != "mirror":
            raise InvariantViolation("only mirror boundary handling is supported")

    @property
    def S(self) -> int:
        return 2 * self.W + 1


def wrap(phase):
    """Wrap to (-pi, pi]."""
    return np.angle(np.exp(1j * np.asarray(phase, dtype=np.float64)))


def analytic_signal(norm) -> ComplexField:
    """Per-row 1D analytic signal (carrier along x).

    Forward transform along x, zero strictly-negative frequencies, double
    strictly-positive, keep DC and the even-length Nyquist bin unscaled.
    """
    from scipy.signal import hilbert

    data = norm.data if hasattr(norm, "data") else np.asarray(norm, dtype=np.float64)
    if hasattr(data, "field"):
        data = data.field.data
    return ComplexField(hilbert(data, axis=1))


def dominant_svd(matrix: np.ndarray, mode: str = "full", iters: int = 30):
    """Leading singular triple (sigma1, u1, v1) of a complex matrix.

    Power mode iterates on M^H M starting from its largest-norm column and
    reads sigma1 off the Rayleigh quotient; raises NoConvergence (with the
    best estimate attached) if the relative sigma change has not dropped
    below 1e-10 after `iters` iterations.
    """
    m = np.asarray(matrix, dtype=np.complex128)
    if not np.all(np.isfinite(m)):
        raise NonFinite("window contains non-finite samples")
    if mode == "full":
        u, s, vh = np.linalg.svd(m)
        if s[0] == 0.0:
            raise RankDeficient("all-zero window")
        return float(s[0]), u[:, 0], vh[0].conj()
    b = m.conj().T @ m
    col = int(np.argmax(np.linalg.norm(b, axis=0)))
    v = b[:, col]
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise RankDeficient("all-zero window")
    v = v / nv
    prev_sigma = None
    for _ in range(iters):
        w = b @ v
        lam = np.real(np.vdot(v, w))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise RankDeficient("power iteration collapsed")
        v = w / nw
        sigma = np.sqrt(max(lam, 0.0))
        if prev_sigma is not None and abs(sigma - prev_sigma) <= 1e-10 * max(sigma, 1e-300):
            prev_sigma = sigma
            break
        prev_sigma = sigma
    else:
        err = NoConvergence("power iteration did not converge; returning best estimate")
        mv = m @ v
        sigma = np.linalg.norm(mv)
        err.estimate = (float(sigma), mv / sigma, v)
        raise err
    mv = m @ v
    sigma = float(np.linalg.norm(mv))
    return sigma, mv / sigma, v


def _coeffs_from_uv(u1: np.ndarray, v1: np.ndarray) -> tuple[float, float]:
    """(a1, a2) from the shift phases of the singular vectors."""
    a2 = float(np.angle(np.vdot(u1[:-1], u1[1:])))
    a1 = float(np.angle(np.sum(v1[:-1] * np.conj(v1[1:]))))
    return a1, a2


def estimate_window(win: np.ndarray | ComplexField, mode: str = "full",
                    iters: int = 30) -> WindowEstimate:
    """Estimate (a0, a1, a2) for one S x S window."""
    m = win.data if isinstance(win, ComplexField) else np.asarray(win, dtype=np.complex128)
    s_len = m.shape[0]
    if m.ndim != 2 or m.shape[0] != m.shape[1] or s_len < 3:
        raise InvariantViolation("window must be S x S with S >= 3")
    _, u1, v1 = dominant_svd(m, mode=mode, iters=iters)
    a1, a2 = _coeffs_from_uv(u1, v1)
    w = s_len // 2
    c = np.arange(-w, w + 1)
    phase_ramp = np.exp(-1j * (a1 * c[None, :] + a2 * c[:, None]))
    a0 = float(np.angle(np.mean(m * phase_ramp)))
    return WindowEstimate(a0=a0, a1=a1, a2=a2)


def _windows_for_rows(padded: np.ndarray, y0: int, y1: int, S: int) -> np.ndarray:
    """(rows, width, S, S) view of windows centered on output rows y0..y1-1."""
    block = padded[y0:y1 + S - 1]
    return sliding_window_view(block, (S, S))


def _batched_power(wins: np.ndarray, iters: int):
    """Leading triple for a (N, S, S) stack via power iteration on M^H M.

    Iterates with batched matmul; renormalizes every few steps (growth per
    step is sigma1^2, so a handful of steps cannot overflow) and once at the
    end, which keeps the per-iteration cost to a single mat-vec.
    """
    b = np.matmul(wins.conj().transpose(0, 2, 1), wins)
    col = np.argmax(np.linalg.norm(b, axis=1), axis=1)
    v = np.take_along_axis(b, col[:, None, None], axis=2)[:, :, 0]
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    bad = norms[:, 0] == 0.0
    norms[bad] = 1.0
    v = v / norms
    prev = None
    for k in range(iters):
        v = np.matmul(b, v[:, :, None])[:, :, 0]
        if k % 4 == 3 or k == iters - 1:
            nw = np.linalg.norm(v, axis=1, keepdims=True)
            dead = nw[:, 0] == 0.0
            nw[dead] = 1.0
            bad |= dead
            v = v / nw
            # all windows converged (iterate direction stationary) -> stop
            if prev is not None:
                overlap = np.abs(np.einsum("ni,ni->n", prev.conj(), v))
                if np.max(1.0 - overlap) < 1e-12:
                    break
            prev = v
    mv = np.matmul(wins, v[:, :, None])[:, :, 0]
    sigma = np.linalg.norm(mv, axis=1)
    bad |= sigma == 0.0
    safe = np.where(sigma == 0.0, 1.0, sigma)
    u = mv / safe[:, None]
    return sigma, u, v, bad


def _batched_full(wins: np.ndarray):
    u, s, vh = np.linalg.svd(wins)
    sigma = s[:, 0]
    bad = sigma == 0.0
    return sigma, u[:, :, 0], vh[:, 0].conj(), bad


def _demod_rows(padded: np.ndarray, y0: int, y1: int, cfg: SubspaceConfig,
                out: np.ndarray, flags: np.ndarray) -> None:
    S = cfg.S
    wins = np.ascontiguousarray(_windows_for_rows(padded, y0, y1, S))
    rows, width = wins.shape[0], wins.shape[1]
    flat = wins.reshape(-1, S, S)
    finite = np.isfinite(flat).all(axis=(1, 2))
    flat = np.where(finite[:, None, None], flat, 0.0)
    if cfg.svd_mode == "power-iteration":
        _, u, v, bad = _batched_power(flat, cfg.power_iters)
    else:
        _, u, v, bad = _batched_full(flat)
    bad |= ~finite
    a2 = np.angle(np.einsum("ni,ni->n", u[:, :-1].conj(), u[:, 1:]))
    a1 = np.angle(np.einsum("ni,ni->n", v[:, :-1], v[:, 1:].conj()))
    # the mean of m * exp(-j(a1 x + a2 y)) is separable: ey^T (M ex)
    c = np.arange(-cfg.W, cfg.W + 1)
    ex = np.exp(-1j * a1[:, None] * c[None, :])
    ey = np.exp(-1j * a2[:, None] * c[None, :])
    a0 = np.angle(np.einsum("ni,ni->n", ey, np.matmul(flat, ex[:, :, None])[:, :, 0]))
    out[y0:y1] = a0.reshape(rows, width)
    flags[y0:y1] = bad.reshape(rows, width)


def demodulate_subspace(field: ComplexField, cfg: SubspaceConfig | None = None,
                        threads: int = 1) -> RealField:
    """Wrapped phase of the whole field by sliding-window subspace estimation.

    Degenerate pixels (rank-deficient or non-finite windows) are filled from
    the nearest valid neighbor; the count is logged.
    """
    cfg = cfg or SubspaceConfig()
    data = field.data
    h, w = data.shape
    if h < cfg.S or w < cfg.S:
        raise InvariantViolation(f"field must be at least {cfg.S} x {cfg.S}")
    padded = np.pad(data, cfg.W, mode="reflect")
    out = np.empty((h, w))
    flags = np.empty((h, w), dtype=bool)
    chunk = 32
    spans = [(y, min(y + chunk, h)) for y in range(0, h, chunk)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda s: _demod_rows(padded, s[0], s[1], cfg, out, flags), spans))
    else:
        for y0, y1 in spans:
            _demod_rows(padded, y0, y1, cfg, out, flags)
    n_bad = int(flags.sum())
    if n_bad:
        log.warning("demodulate_subspace: %d degenerate pixels filled from neighbors", n_bad)
        from scipy.ndimage import distance_transform_edt

        idx = distance_transform_edt(flags, return_distances=False, return_indices=True)
        out = out[tuple(idx)]
    return RealField(out)


def estimate_carrier(field: ComplexField | RealField) -> float:
    """Carrier frequency from the x-axis marginal spectrum peak,
    refined by 3-point parabolic interpolation; DC excluded."""
    data = field.data
    h, w = data.shape
    if h < 64 or w < 64:
        raise NoPeak("field must be at least 64 x 64")
    # 8x zero-padding shrinks the leakage bias of the parabolic refinement
    n = 8 * w
    spec = np.abs(np.fft.fft(data, n=n, axis=1)).mean(axis=0)
    freqs = np.fft.fftfreq(n)
    mask = np.abs(freqs) > 1e-12  # exclude DC bin
    if np.isrealobj(data):
        mask &= freqs > 0
    cand = np.where(mask, spec, -1.0)
    k = int(np.argmax(cand))
    if spec[k] <= 0.0:
        raise NoPeak("empty spectrum")
    ym1, y0, yp1 = spec[(k - 1) % n], spec[k], spec[(k + 1) % n]
    denom = ym1 - 2 * y0 + yp1
    delta = 0.0 if abs(denom) < 1e-300 else 0.5 * (ym1 - yp1) / denom
    delta = float(np.clip(delta, -0.5, 0.5))
    return float(freqs[k] + delta / n)


def remove_carrier(wrapped: RealField, fx: float) -> RealField:
    """wrap(phase - 2 pi fx x)."""
    x = np.arange(wrapped.width)
    return RealField(wrap(wrapped.data - 2 * np.pi * fx * x[None, :]))
