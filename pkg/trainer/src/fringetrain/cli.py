"""Trainer command line: train, export, parity."""

from __future__ import annotations

import argparse
import os
import sys

from .export import export_weights, parity_dump
from .models import GeneratorArch
from .train import TrainConfig, gan_train, load_checkpoint, save_checkpoint


def cmd_train(args) -> int:
    arch = GeneratorArch(depth=args.depth, base_channels=args.base_channels,
                         input_size=args.input_size)
    cfg = TrainConfig(manifest=args.manifest, epochs=args.epochs,
                      batch_size=args.batch_size, learning_rate=args.lr,
                      lambda_l1=args.lambda_l1, arch=arch, crop=args.crop,
                      seed=args.seed, init_checkpoint=args.init_checkpoint)
    os.makedirs(args.out, exist_ok=True)
    gen, disc, log = gan_train(cfg, log_path=os.path.join(args.out, "loss_log.json"))
    save_checkpoint(gen, disc, cfg, log, os.path.join(args.out, "checkpoint.pt"))
    export_weights(gen, os.path.join(args.out, "generator.fnw"))
    return 0


def cmd_export(args) -> int:
    gen, _, _ = load_checkpoint(args.checkpoint)
    export_weights(gen, args.out)
    return 0


def cmd_parity(args) -> int:
    gen, _, _ = load_checkpoint(args.checkpoint)
    inputs = sorted(
        os.path.join(args.inputs, n) for n in os.listdir(args.inputs)
        if n.endswith(".fpr"))
    if len(inputs) != 5:
        print(f"expected 5 canonical inputs, found {len(inputs)}", file=sys.stderr)
        return 2
    parity_dump(gen, inputs, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fringetrain")
    sub = p.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="train the conditional GAN")
    tr.add_argument("--manifest", required=True)
    tr.add_argument("--epochs", type=int, default=15)
    tr.add_argument("--batch-size", type=int, default=1)
    tr.add_argument("--lr", type=float, default=2e-4)
    tr.add_argument("--lambda-l1", type=float, default=100.0)
    tr.add_argument("--depth", type=int, default=5)
    tr.add_argument("--base-channels", type=int, default=16)
    tr.add_argument("--input-size", type=int, default=256)
    tr.add_argument("--crop", type=int, default=128)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--init-checkpoint", default=None,
                    help="warm-start generator and discriminator from a checkpoint")
    tr.add_argument("--out", required=True)
    tr.set_defaults(func=cmd_train)

    ex = sub.add_parser("export", help="export checkpoint weights to FNW1")
    ex.add_argument("--checkpoint", required=True)
    ex.add_argument("--out", required=True)
    ex.set_defaults(func=cmd_export)

    pa = sub.add_parser("parity", help="dump generator outputs for parity inputs")
    pa.add_argument("--checkpoint", required=True)
    pa.add_argument("--inputs", required=True)
    pa.add_argument("--out", required=True)
    pa.set_defaults(func=cmd_parity)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
