"""End-to-end demodulation pipelines shared by the sweep driver and the CLI."""

from __future__ import annotations

import numpy as np

from .baselines import FtConfig, WftConfig, ft_demodulate, wft_demodulate
from .demodulate import (
    SubspaceConfig,
    analytic_signal,
    demodulate_subspace,
    estimate_carrier,
    remove_carrier,
)
from .errors import InvariantViolation
from .normalize import normalize_auto
from .raster import RealField
from .simulate import SimScene, synth_fringe
from .unwrap import unwrap2d

# WFT search grid used for pipeline comparisons: centered on the carrier,
# wide enough for the phase gradients the simulator produces, and cheap
# enough for sweeps.  The module-level WftConfig defaults stay untouched.
WFT_SWEEP_HALFRANGE = 0.6
WFT_SWEEP_STEP = 0.05


def subspace_pipeline(img: RealField, fx: float | None = None, weights=None,
                      cfg: SubspaceConfig | None = None, threads: int = 1) -> RealField:
    """normalize -> analytic signal -> subspace -> carrier removal -> unwrap."""
    norm = normalize_auto(img, weights)
    field = analytic_signal(norm)
    if fx is None:
        fx = estimate_carrier(field)
    wrapped = demodulate_subspace(field, cfg, threads=threads)
    return unwrap2d(remove_carrier(wrapped, fx))


def ft_pipeline(img: RealField, fx: float | None = None) -> RealField:
    wrapped = ft_demodulate(img, FtConfig(band_center=fx))
    return unwrap2d(wrapped)


def wft_pipeline(img: RealField, fx: float | None = None,
                 cfg: WftConfig | None = None, normalized: bool = True,
                 weights=None) -> RealField:
    """WFT ridges on the normalized analytic field (default) or the raw
    analytic field (paper-faithful mode, normalized=False)."""
    src = normalize_auto(img, weights).field if normalized else img
    field = analytic_signal(src)
    if fx is None:
        fx = estimate_carrier(field)
    if cfg is None:
        wc = 2 * np.pi * fx
        cfg = WftConfig(
            fx_range=(wc - WFT_SWEEP_HALFRANGE, wc + WFT_SWEEP_HALFRANGE),
            fy_range=(-WFT_SWEEP_HALFRANGE, WFT_SWEEP_HALFRANGE),
            fstep=WFT_SWEEP_STEP,
        )
    wrapped = wft_demodulate(field, cfg)
    return unwrap2d(remove_carrier(wrapped, fx))


def run_method(method: str, scene: SimScene, weights=None, threads: int = 1,
               cfg: SubspaceConfig | None = None) -> RealField:
    """Render the scene and demodulate it with the chosen method; the scene's
    known carrier is passed to every method for a fair comparison."""
    img = synth_fringe(scene)
    if method == "subspace":
        return subspace_pipeline(img, fx=scene.fx, weights=weights, cfg=cfg,
                                 threads=threads)
    if method == "ft":
        return ft_pipeline(img, fx=scene.fx)
    if method == "wft":
        return wft_pipeline(img, fx=scene.fx, weights=weights)
    raise InvariantViolation(f"unknown method {method!r}")
