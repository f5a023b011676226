#!/usr/bin/env python3
"""Build the training corpus used for the shipped normalizer weights.

Three parts, one manifest:

1. Generic pairs from the random-scene family (smooth Zernike background and
   modulation maps), with the SNR range widened to U[0, 40] dB and the
   speckle-size range to U[3, 12] px so the network also sees the severe
   conditions it is evaluated under.
2. Evaluation-style pairs (flat background, banded / smooth-field / uniform
   modulation, speckle present only half the time).  Their seeds start at
   10000 and never overlap the evaluation seeds.
3. Hard pairs: banded/smooth modulation with the carrier pushed to
   U[0.05, 0.075] cycles/px and SNR restricted to U[0, 15] dB.  Local fringe
   frequency above ~0.45 rad/px is where the normalizer fails first, so this
   slice gets extra coverage.  Seeds start at 20000.
4. Speckle-study pairs: fixed-sigma AWGN U[0.2, 0.45] on top of speckle
   U[3, 12] px.  With a weak modulation this sits below 0 dB local SNR,
   a regime the SNR-parameterized parts never reach.  Seeds start at 30000.

Besides the full manifest, staged prefixes are written
(manifest_stage1.jsonl = parts 1-2, manifest_stage2.jsonl = parts 1-3) so
the curriculum schedule in scripts/train_normalizer.sh is reproducible.
"""

import argparse
import json
import os

import numpy as np

from fringebos.raster import write_raster
from fringebos.simulate import (
    DatasetParams,
    gen_dataset,
    make_test_scene,
    synth_fringe,
)


def add_scene_style_pairs(out_dir: str, n: int, records: list[dict]) -> None:
    rng = np.random.default_rng(42)
    mods = ["m1", "m2", "uniform"]
    for i in range(n):
        seed = 10_000 + i
        mod = mods[i % 3]
        snr = float(rng.uniform(0.0, 40.0))
        speckle = None if rng.random() < 0.5 else float(rng.uniform(3.0, 12.0))
        fx = float(rng.uniform(0.04, 0.06))
        scene = make_test_scene(mod, seed, fx=fx, snr_db=snr, speckle_px=speckle)
        ip, tp = f"sinput_{i:05d}.fpr", f"starget_{i:05d}.fpr"
        write_raster(synth_fringe(scene), os.path.join(out_dir, ip))
        write_raster(scene.normalized_truth(), os.path.join(out_dir, tp))
        records.append({"index": len(records), "seed": seed, "fx": fx,
                        "snr_db": snr, "speckle_px": speckle,
                        "input_path": ip, "target_path": tp})


def add_hard_pairs(out_dir: str, n: int, records: list[dict]) -> None:
    rng = np.random.default_rng(1234)
    mods = ["m1", "m2"]
    for i in range(n):
        seed = 20_000 + i
        mod = mods[i % 2]
        snr = float(rng.uniform(0.0, 15.0))
        speckle = None if rng.random() < 0.5 else float(rng.uniform(3.0, 12.0))
        fx = float(rng.uniform(0.05, 0.075))
        scene = make_test_scene(mod, seed, fx=fx, snr_db=snr, speckle_px=speckle)
        ip, tp = f"hinput_{i:05d}.fpr", f"htarget_{i:05d}.fpr"
        write_raster(synth_fringe(scene), os.path.join(out_dir, ip))
        write_raster(scene.normalized_truth(), os.path.join(out_dir, tp))
        records.append({"index": len(records), "seed": seed, "fx": fx,
                        "snr_db": snr, "speckle_px": speckle,
                        "input_path": ip, "target_path": tp})


def add_speckle_study_pairs(out_dir: str, n: int, records: list[dict]) -> None:
    rng = np.random.default_rng(5678)
    mods = ["m1", "m2", "uniform"]
    for i in range(n):
        seed = 30_000 + i
        mod = mods[i % 3]
        sd = float(rng.uniform(0.2, 0.45))
        speckle = float(rng.uniform(3.0, 12.0))
        fx = float(rng.uniform(0.04, 0.06))
        scene = make_test_scene(mod, seed, fx=fx, speckle_px=speckle, awgn_sd=sd)
        ip, tp = f"kinput_{i:05d}.fpr", f"ktarget_{i:05d}.fpr"
        write_raster(synth_fringe(scene), os.path.join(out_dir, ip))
        write_raster(scene.normalized_truth(), os.path.join(out_dir, tp))
        records.append({"index": len(records), "seed": seed, "fx": fx,
                        "snr_db": None, "speckle_px": speckle,
                        "input_path": ip, "target_path": tp})


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", required=True)
    ap.add_argument("--generic", type=int, default=1200)
    ap.add_argument("--scene-style", type=int, default=600)
    ap.add_argument("--hard", type=int, default=400)
    ap.add_argument("--speckle-study", type=int, default=450)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    params = DatasetParams(snr_range_db=(0.0, 40.0), speckle_range=(3.0, 12.0))
    records = gen_dataset(args.generic, args.out, args.seed, params=params)
    add_scene_style_pairs(args.out, args.scene_style, records)
    stage1 = len(records)
    add_hard_pairs(args.out, args.hard, records)
    stage2 = len(records)
    add_speckle_study_pairs(args.out, args.speckle_study, records)
    for name, upto in (("manifest_stage1.jsonl", stage1),
                       ("manifest_stage2.jsonl", stage2),
                       ("manifest.jsonl", len(records))):
        with open(os.path.join(args.out, name), "w") as f:
            for rec in records[:upto]:
                f.write(json.dumps(rec) + "\n")
    print(f"{len(records)} pairs in {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
