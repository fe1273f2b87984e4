"""
Composer - transformer VAE that writes score-token variations.

- model: Composer, LatentState
- losses: free-bits KL, reconstruction NLL
- schedule: cyclical KL weight
- generate: grammar-constrained greedy/top-p decoding, variations
- train: training loop, checkpoint loading, reconstruction accuracy
- presets, ablation: KL-regularization study
"""

from .ablation import ablation_report, reconstructions, train_presets
from .config import ComposerConfig
from .generate import DecodeMode, encode_score_latent, generate, sample_prior, top_p_filter, vary
from .losses import ComposerLoss, composer_loss, kl_free_bits, kl_per_dim, reconstruction_nll
from .model import Composer, LatentState
from .presets import ABLATION_PRESETS, preset_config
from .schedule import beta_schedule
from .train import build_composer, load_composer, prepare_sequences, reconstruction_accuracy, train_composer

__all__ = [
    "ABLATION_PRESETS",
    "Composer",
    "ComposerConfig",
    "ComposerLoss",
    "DecodeMode",
    "LatentState",
    "ablation_report",
    "beta_schedule",
    "build_composer",
    "composer_loss",
    "encode_score_latent",
    "generate",
    "kl_free_bits",
    "kl_per_dim",
    "load_composer",
    "preset_config",
    "prepare_sequences",
    "reconstruction_accuracy",
    "reconstruction_nll",
    "reconstructions",
    "sample_prior",
    "top_p_filter",
    "train_composer",
    "train_presets",
    "vary",
]
