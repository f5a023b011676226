"""Conditional-GAN training loop.

The discriminator is trained to separate (input, target) from
(input, generated); the generator minimizes the adversarial term plus
lambda_l1 times the L1 distance to the target.  Batch size defaults to 1.
Augmentation is resize-and-random-crop; a 10% held-out split provides a
per-epoch L1 validation score (also logged before the first update as
epoch 0).
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np
import torch
from torch import nn

from .fpr1 import read_raster
from .models import GeneratorArch, build_models


class DatasetTooSmall(ValueError):
    pass


class Divergence(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    manifest: str
    epochs: int = 15
    batch_size: int = 1
    learning_rate: float = 2e-4
    lambda_l1: float = 100.0
    arch: GeneratorArch = field(default_factory=GeneratorArch)
    crop: int = 128
    resize_factor: float = 1.117  # zoom drawn from U[1/f, f] before the crop
    val_fraction: float = 0.1
    seed: int = 0
    init_checkpoint: str | None = None  # warm-start both nets from a checkpoint

    def __post_init__(self):
        if self.lambda_l1 < 0:
            raise ValueError("lambda_l1 must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.crop % (1 << self.arch.depth) != 0:
            raise ValueError("crop must be divisible by 2^depth")


def _scale_to_unit(img: np.ndarray) -> np.ndarray:
    lo, hi = img.min(), img.max()
    if hi - lo < 1e-12:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo) * 2.0 - 1.0


def load_pairs(manifest_path: str) -> list[tuple[np.ndarray, np.ndarray]]:
    base = os.path.dirname(os.path.abspath(manifest_path))
    pairs = []
    with open(manifest_path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            x = read_raster(os.path.join(base, rec["input_path"]))
            y = read_raster(os.path.join(base, rec["target_path"]))
            pairs.append((_scale_to_unit(x).astype(np.float32),
                          y.astype(np.float32)))
    return pairs


def _augment(x: torch.Tensor, y: torch.Tensor, crop: int, factor: float,
             rng: torch.Generator) -> tuple[torch.Tensor, torch.Tensor]:
    """Jitter both images identically: random bilinear zoom then random crop.

    The zoom is drawn from U[1/factor, factor] so the network sees fringe
    frequencies both below and above the raw corpus range; a one-sided
    upscale would systematically lower every frequency it trains on.
    """
    lo, hi = min(factor, 1.0 / factor), max(factor, 1.0 / factor)
    f = lo + (hi - lo) * float(torch.rand(1, generator=rng))
    size = max(crop, int(round(x.shape[-1] * f)))
    both = torch.cat([x, y], dim=1)
    both = nn.functional.interpolate(both, size=(size, size), mode="bilinear",
                                     align_corners=False)
    max_off = size - crop
    oy = int(torch.randint(0, max_off + 1, (1,), generator=rng))
    ox = int(torch.randint(0, max_off + 1, (1,), generator=rng))
    both = both[:, :, oy:oy + crop, ox:ox + crop]
    return both[:, :1], both[:, 1:]


def _validate(gen, pairs) -> float:
    gen.eval()
    total = 0.0
    with torch.no_grad():
        for x, y in pairs:
            xt = torch.from_numpy(x)[None, None]
            yt = torch.from_numpy(y)[None, None]
            total += float(nn.functional.l1_loss(gen(xt), yt))
    gen.train()
    return total / len(pairs)


def gan_train(cfg: TrainConfig, log_path: str | None = None):
    """Train the conditional GAN; returns (generator, discriminator, log).

    The log holds per-epoch mean loss terms and the held-out L1 curve
    (index 0 = before any update).  Raises Divergence on non-finite loss.
    """
    pairs = load_pairs(cfg.manifest)
    if len(pairs) < 10:
        raise DatasetTooSmall(f"need >= 10 pairs, got {len(pairs)}")
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(pairs))
    n_val = max(1, int(round(cfg.val_fraction * len(pairs))))
    val_pairs = [pairs[i] for i in order[:n_val]]
    train_pairs = [pairs[i] for i in order[n_val:]]

    torch.manual_seed(cfg.seed)
    gen, disc = build_models(cfg.arch)
    if cfg.init_checkpoint:
        blob = torch.load(cfg.init_checkpoint, map_location="cpu", weights_only=False)
        if blob["arch"] != asdict(cfg.arch):
            raise ValueError(f"init checkpoint arch {blob['arch']} != configured "
                             f"{asdict(cfg.arch)}")
        gen.load_state_dict(blob["generator"])
        disc.load_state_dict(blob["discriminator"])
    gen.train()
    disc.train()
    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.999))
    bce = nn.BCEWithLogitsLoss()
    trng = torch.Generator().manual_seed(cfg.seed)

    log = {"config": {**asdict(cfg), "arch": asdict(cfg.arch)},
           "val_l1": [_validate(gen, val_pairs)], "epochs": []}
    for epoch in range(cfg.epochs):
        idx = rng.permutation(len(train_pairs))
        sums = {"d": 0.0, "adv": 0.0, "l1": 0.0, "g": 0.0}
        steps = 0
        for start in range(0, len(idx), cfg.batch_size):
            batch = idx[start:start + cfg.batch_size]
            xs, ys = [], []
            for i in batch:
                x, y = train_pairs[i]
                xt, yt = _augment(torch.from_numpy(x)[None, None],
                                  torch.from_numpy(y)[None, None],
                                  cfg.crop, cfg.resize_factor, trng)
                xs.append(xt)
                ys.append(yt)
            x = torch.cat(xs)
            y = torch.cat(ys)

            fake = gen(x)
            d_real = disc(x, y)
            d_fake = disc(x, fake.detach())
            loss_d = 0.5 * (bce(d_real, torch.ones_like(d_real))
                            + bce(d_fake, torch.zeros_like(d_fake)))
            opt_d.zero_grad()
            loss_d.backward()
            opt_d.step()

            d_fake = disc(x, fake)
            adv = bce(d_fake, torch.ones_like(d_fake))
            l1 = nn.functional.l1_loss(fake, y)
            loss_g = adv + cfg.lambda_l1 * l1
            opt_g.zero_grad()
            loss_g.backward()
            opt_g.step()

            terms = (loss_d.item(), adv.item(), l1.item(), loss_g.item())
            if not all(np.isfinite(v) for v in terms):
                raise Divergence(f"non-finite loss at epoch {epoch}: {terms}")
            # decomposition invariant: total = adversarial + lambda * L1
            assert abs(terms[3] - (terms[1] + cfg.lambda_l1 * terms[2])) <= 1e-6 * max(1.0, terms[3])
            for k, v in zip(("d", "adv", "l1", "g"), terms):
                sums[k] += v
            steps += 1
        epoch_log = {k: v / steps for k, v in sums.items()}
        epoch_log["epoch"] = epoch
        val = _validate(gen, val_pairs)
        log["val_l1"].append(val)
        log["epochs"].append(epoch_log)
        print(f"epoch {epoch:2d}: D {epoch_log['d']:.4f} adv {epoch_log['adv']:.4f} "
              f"L1 {epoch_log['l1']:.4f} val-L1 {val:.4f}", flush=True)
        if log_path:
            with open(log_path, "w") as f:
                json.dump(log, f, indent=2)
    return gen, disc, log


def save_checkpoint(gen, disc, cfg: TrainConfig, log: dict, path: str) -> None:
    torch.save({"arch": asdict(cfg.arch), "generator": gen.state_dict(),
                "discriminator": disc.state_dict(),
                "config": {**asdict(cfg), "arch": asdict(cfg.arch)},
                "log": log}, path)


def load_checkpoint(path: str):
    blob = torch.load(path, map_location="cpu", weights_only=False)
    arch = GeneratorArch(**blob["arch"])
    gen, disc = build_models(arch)
    gen.load_state_dict(blob["generator"])
    disc.load_state_dict(blob["discriminator"])
    gen.eval()
    disc.eval()
    return gen, disc, blob
