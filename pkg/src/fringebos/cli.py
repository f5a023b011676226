"""Command-line pipeline orchestration.

Subcommands: simulate, demodulate, sweep, fit-diffusion.  Every run writes a
sidecar JSON with the fully resolved configuration so results can be
reproduced exactly.  Exit codes: 0 success, 2 usage, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import diffusion as diff
from . import metrics, pipeline, simulate
from .demodulate import SubspaceConfig
from .errors import DataError, FringebosError, NumericalError
from .raster import RealField, export_png, read_raster, write_raster

PRESETS = {
    "m1-0db": dict(mod_kind="m1", snr_db=0.0),
    "m2-0db": dict(mod_kind="m2", snr_db=0.0),
    "m1-clean": dict(mod_kind="m1", snr_db=None),
    "m2-clean": dict(mod_kind="m2", snr_db=None),
    "uniform-clean": dict(mod_kind="uniform", snr_db=None),
}


def _resolve_threads(args) -> int:
    env = os.environ.get("FRINGEBOS_THREADS")
    if env is not None:
        return max(1, int(env))
    if getattr(args, "threads", None) in (None, "auto"):
        return 1
    return max(1, int(args.threads))


def _write_sidecar(out_dir: str, args: argparse.Namespace, extra: dict | None = None) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg.update(extra or {})
    with open(os.path.join(out_dir, "run_config.json"), "w") as f:
        json.dump(cfg, f, indent=2, sort_keys=True, default=str)


def _parse_values(text: str) -> list[float]:
    if ".." in text:
        lo, hi = text.split("..")
        return [float(v) for v in range(int(lo), int(hi) + 1)]
    return [float(v) for v in text.split(",")]


def cmd_simulate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.dataset:
        params = simulate.DatasetParams()
        if args.snr_range:
            lo, hi = (float(v) for v in args.snr_range.split(","))
            params = simulate.DatasetParams(
                fx_range=params.fx_range, speckle_range=params.speckle_range,
                snr_range_db=(lo, hi))
        if args.speckle_range:
            lo, hi = (float(v) for v in args.speckle_range.split(","))
            params = simulate.DatasetParams(
                fx_range=params.fx_range, speckle_range=(lo, hi),
                snr_range_db=params.snr_range_db)
        simulate.gen_dataset(args.dataset, args.out, args.seed,
                             width=args.size, height=args.size, params=params)
        _write_sidecar(args.out, args)
        return 0
    if args.diffusion_sequence:
        times = _parse_values(args.times)
        frames = simulate.synth_diffusion_sequence(
            args.diffusion_d, times, args.px, args.size, args.size,
            noise_sd=args.noise_sd, seed=args.seed)
        for k, frame in enumerate(frames):
            write_raster(frame, os.path.join(args.out, f"frame_{k:02d}.fpr"))
        with open(os.path.join(args.out, "sequence.json"), "w") as f:
            json.dump({"times_s": times, "px_m": args.px,
                       "frames": [f"frame_{k:02d}.fpr" for k in range(len(frames))]}, f)
        _write_sidecar(args.out, args)
        return 0
    preset = PRESETS[args.preset]
    scene = simulate.make_test_scene(
        preset["mod_kind"], args.seed, width=args.size, height=args.size,
        snr_db=preset["snr_db"], speckle_px=args.speckle, awgn_sd=args.awgn_sd)
    degraded = simulate.synth_fringe(scene)
    write_raster(degraded, os.path.join(args.out, "degraded.fpr"))
    write_raster(scene.phase, os.path.join(args.out, "truth_phase.fpr"))
    with open(os.path.join(args.out, "manifest.json"), "w") as f:
        json.dump({"preset": args.preset, "seed": args.seed, "fx": scene.fx,
                   "snr_db": scene.snr_db, "speckle_px": scene.speckle_px,
                   "size": args.size}, f)
    _write_sidecar(args.out, args)
    return 0


def cmd_demodulate(args) -> int:
    threads = _resolve_threads(args)
    field = read_raster(args.input)
    if not isinstance(field, RealField):
        raise DataError("demodulate expects a real raster")
    weights = None
    if args.normalizer == "learned":
        from .normalize import load_weights

        if args.weights is None:
            raise DataError("--normalizer learned requires --weights")
        weights = load_weights(args.weights)
    fx = args.fx
    cfg = SubspaceConfig(W=args.window_half) if args.method == "subspace" else None
    if args.method == "subspace":
        phase = pipeline.subspace_pipeline(field, fx=fx, weights=weights,
                                           cfg=cfg, threads=threads)
    elif args.method == "ft":
        phase = pipeline.ft_pipeline(field, fx=fx)
    elif args.method == "wft":
        phase = pipeline.wft_pipeline(field, fx=fx, weights=weights,
                                      normalized=args.normalizer != "none")
    else:
        raise DataError(f"unknown method {args.method}")
    os.makedirs(args.out, exist_ok=True)
    write_raster(phase, os.path.join(args.out, "phase.fpr"))
    export_png(phase, os.path.join(args.out, "phase.png"),
               float(phase.data.min()), float(phase.data.max() + 1e-9))
    _write_sidecar(args.out, args, {"resolved_threads": threads})
    return 0


def cmd_sweep(args) -> int:
    threads = _resolve_threads(args)
    values = _parse_values(args.values)
    if not values:
        raise DataError("empty values list")
    axis = {"snr": "snr_db", "speckle": "speckle_px"}[args.axis]
    weights = None
    if args.weights:
        from .normalize import load_weights

        weights = load_weights(args.weights)
    os.makedirs(args.out, exist_ok=True)
    cfg = SubspaceConfig(W=args.window_half)
    rows = []
    for method in args.methods.split(","):
        rows.extend(metrics.sweep_eval(
            method.strip(), axis, values, trials=args.trials, seed=args.seed,
            mod_kind=args.mod, awgn_sd=args.awgn_sd, weights=weights,
            threads=threads, size=args.size, cfg=cfg))
    csv_text = metrics.sweep_csv(rows)
    with open(os.path.join(args.out, "sweep.csv"), "w") as f:
        f.write(csv_text)
    _write_sidecar(args.out, args, {"resolved_threads": threads})
    return 0


def cmd_fit_diffusion(args) -> int:
    seq_path = os.path.join(args.dir, "sequence.json")
    if not os.path.exists(seq_path):
        raise DataError(f"missing {seq_path}")
    with open(seq_path) as f:
        seq = json.load(f)
    frames = [read_raster(os.path.join(args.dir, name)) for name in seq["frames"]]
    if len(frames) < 2:
        raise DataError("need at least 2 frames")
    rows = [int(r) for r in args.rows.split(",")]
    lo, hi = (int(v) for v in args.window.split(":"))
    pair = tuple(int(v) for v in args.frame_pair.split(","))
    agg = diff.fit_diffusion(frames, seq["times_s"], seq["px_m"], rows, (lo, hi),
                             frame_pair=pair)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "fits.csv"), "w") as f:
        f.write("row,D,A,x0,r2\n")
        for fit in agg.fits:
            f.write(f"{fit.row},{fit.D!r},{fit.amplitude!r},{fit.x0!r},{fit.r2!r}\n")
    with open(os.path.join(args.out, "summary.json"), "w") as f:
        json.dump({"mean_D": agg.mean_D, "sd_D": agg.sd_D}, f)
    _write_sidecar(args.out, args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fringebos")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate scenes, datasets, or diffusion sequences")
    sim.add_argument("--preset", choices=sorted(PRESETS), default="m1-0db")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--size", type=int, default=256)
    sim.add_argument("--speckle", type=float, default=None)
    sim.add_argument("--awgn-sd", type=float, default=None)
    sim.add_argument("--dataset", type=int, default=0,
                     help="generate N training pairs instead of a single scene")
    sim.add_argument("--snr-range", default=None,
                     help="override dataset SNR range, e.g. 0,40")
    sim.add_argument("--speckle-range", default=None,
                     help="override dataset speckle-size range, e.g. 3,12")
    sim.add_argument("--diffusion-sequence", action="store_true")
    sim.add_argument("--diffusion-d", type=float, default=1.47e-9)
    sim.add_argument("--times", default="120,240,360,480,600,900,1200,1500,1800")
    sim.add_argument("--px", type=float, default=9.1e-6)
    sim.add_argument("--noise-sd", type=float, default=0.0)
    sim.add_argument("--out", required=True)
    sim.set_defaults(func=cmd_simulate)

    dem = sub.add_parser("demodulate", help="extract unwrapped phase from a raster")
    dem.add_argument("--input", required=True)
    dem.add_argument("--method", choices=["subspace", "ft", "wft"], default="subspace")
    dem.add_argument("--normalizer", choices=["classical", "learned", "none"],
                     default="classical")
    dem.add_argument("--weights", default=None)
    dem.add_argument("--fx", type=float, default=None)
    dem.add_argument("--window-half", "-W", type=int, default=5)
    dem.add_argument("--threads", default="auto")
    dem.add_argument("--out", required=True)
    dem.set_defaults(func=cmd_demodulate)

    sw = sub.add_parser("sweep", help="RMSE/SSIM sweep over SNR or speckle size")
    sw.add_argument("--axis", choices=["snr", "speckle"], required=True)
    sw.add_argument("--values", required=True,
                    help="comma list (0,5,10) or inclusive range (3..12)")
    sw.add_argument("--mod", choices=["m1", "m2", "uniform"], default="m1")
    sw.add_argument("--methods", default="subspace,ft,wft")
    sw.add_argument("--trials", type=int, default=5)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--awgn-sd", type=float, default=None)
    sw.add_argument("--size", type=int, default=256)
    sw.add_argument("--weights", default=None)
    sw.add_argument("--window-half", "-W", type=int, default=5)
    sw.add_argument("--threads", default="auto")
    sw.add_argument("--out", required=True)
    sw.set_defaults(func=cmd_sweep)

    fit = sub.add_parser("fit-diffusion", help="fit D from a phase-frame sequence")
    fit.add_argument("--dir", required=True)
    fit.add_argument("--rows", default="150,350,502,650,800")
    fit.add_argument("--window", default="28:228", help="column range lo:hi")
    fit.add_argument("--frame-pair", default="0,5")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit_diffusion)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 4
    except (DataError, FringebosError, ValueError, KeyError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
