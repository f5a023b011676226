"""fringetrain: conditional-GAN trainer for the learned fringe normalizer.

Consumes simulator-generated training pairs (FPR1 rasters + JSONL manifest)
and produces FNW1 weight containers plus parity dumps for the inference-side
implementation.
"""

from .models import GeneratorArch, build_models
from .train import TrainConfig, gan_train

__all__ = ["GeneratorArch", "build_models", "TrainConfig", "gan_train"]

__version__ = "0.1.0"
