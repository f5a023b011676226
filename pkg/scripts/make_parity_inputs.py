#!/usr/bin/env python3
"""Generate the five canonical parity inputs shipped with the repository.

The trainer dumps its generator outputs for these rasters; the inference
implementation must reproduce those outputs within 1e-4.  Inputs cover the
degenerate case (all zeros), an ideal carrier, and three degraded scenes.
"""

import argparse
import os

import numpy as np

from fringebos.raster import RealField, write_raster
from fringebos.simulate import make_test_scene, synth_fringe


def build_inputs(size: int = 256) -> dict[str, RealField]:
    x = np.arange(size)[None, :].astype(float)
    carrier = 0.5 + 0.5 * np.cos(2 * np.pi * 0.05 * x) * np.ones((size, 1))
    inputs = {
        "parity0_zeros": RealField(np.zeros((size, size))),
        "parity1_carrier": RealField(carrier),
        "parity2_m1_speckle": synth_fringe(
            make_test_scene("m1", 11, width=size, height=size,
                            snr_db=20.0, speckle_px=6.0)),
        "parity3_m2_noisy": synth_fringe(
            make_test_scene("m2", 12, width=size, height=size, snr_db=10.0)),
        "parity4_uniform_speckle": synth_fringe(
            make_test_scene("uniform", 13, width=size, height=size,
                            snr_db=15.0, speckle_px=4.0)),
    }
    return inputs


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="artifacts/parity/inputs")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    for name, field in build_inputs().items():
        write_raster(field, os.path.join(args.out, name + ".fpr"))
        print(name)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
