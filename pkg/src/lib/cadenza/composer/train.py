"""
Composer training, checkpoint loading and teacher-forced evaluation.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import torch

from ..core.errors import CheckpointError
from ..core.note_event import Score
from ..core.run_log import RunLog
from ..numerics.checkpoint import Checkpoint, restore
from ..numerics.rng import seed_torch, torch_generator
from ..numerics.training import TrainingConfig, pad_batch, train_loop
from ..tokenizer.config import TokenizerConfig
from ..tokenizer.pertok import PerTok
from .config import ComposerConfig
from .losses import composer_loss
from .model import Composer

logger = logging.getLogger(__name__)

KIND = "composer"


def prepare_sequences(scores: Sequence[Score], tokenizer: PerTok, max_seq_len: int) -> List[List[int]]:
    """
    Score-only token ids of each score.

    Sequences longer than max_seq_len are skipped.
    """
    sequences = []
    for index, score in enumerate(scores):
        ids = tokenizer.vocabulary.encode_ids(tokenizer.strip_performance(tokenizer.encode(score)))
        if len(ids) > max_seq_len:
            logger.debug("Skipping item %d: %d tokens exceed max_seq_len %d", index, len(ids), max_seq_len)
            continue
        sequences.append(ids)
    if len(sequences) < len(scores):
        logger.info("Kept %d of %d sequences within max_seq_len %d", len(sequences), len(scores), max_seq_len)
    return sequences


def build_composer(config: ComposerConfig, tokenizer: PerTok, seed: int) -> Composer:
    """Composer bound to the tokenizer's vocabulary, initialized from the seed."""
    seed_torch(seed, KIND, "init")
    return Composer(config.with_vocabulary(len(tokenizer.vocabulary)))


def train_composer(sequences: Sequence[List[int]], config: ComposerConfig, training: TrainingConfig,
                   tokenizer: PerTok, seed: int = 0, run_log: Optional[RunLog] = None,
                   checkpoint_dir: Optional[Union[str, Path]] = None,
                   resume: Optional[Checkpoint] = None, progress: bool = False) -> Checkpoint:
    """
    Teacher-forced Adam training of the composer VAE.

    Each step encodes a seeded batch, samples z with seeded noise and
    minimizes recon + beta(step) * free-bits KL.

    Args:
        sequences: Score-only token ids (see prepare_sequences)
        config: Composer configuration
        training: Loop settings
        tokenizer: Tokenizer the ids come from
        seed: Run seed
        run_log: Receives recon/kl/beta/loss curves
        checkpoint_dir: Periodic checkpoint directory
        resume: Checkpoint to continue from
        progress: Show a progress bar

    Returns:
        Final Checkpoint

    Raises:
        CorpusError: If there are no sequences
    """
    model = build_composer(config, tokenizer, seed)
    config = model.config
    pad_id = tokenizer.vocabulary.pad_id

    def step_fn(step: int, batch: List[List[int]]) -> Dict[str, Any]:
        ids = pad_batch(batch, pad_id)
        padding = ids == pad_id
        h = model.encode_latent(ids, padding)
        noise = torch.randn(h.shape[0], config.latent_dz,
                            generator=torch_generator(seed, KIND, "eps", step)).to(h.dtype)
        latent = model.reparameterize(h, noise)
        beta = config.beta_at(step)
        loss = composer_loss(model, ids, latent, beta, config.free_bit_lambda, pad_id)
        return {"loss": loss.total, "recon": loss.recon, "kl": loss.kl, "beta": beta}

    header = {"kind": KIND, "seed": seed, "tokenizer": tokenizer.config.to_dict(),
              "composer": config.to_dict(), "training": training.to_dict()}
    return train_loop(model, sequences, training, seed, KIND, step_fn, header,
                      run_log, checkpoint_dir, resume, progress)


def load_composer(checkpoint: Checkpoint) -> Tuple[Composer, PerTok]:
    """
    Rebuild a composer and its tokenizer from a checkpoint.

    Raises:
        CheckpointError: If the checkpoint is not a composer checkpoint or
            its vocabulary size disagrees with its tokenizer
    """
    if checkpoint.kind != KIND:
        raise CheckpointError(f"expected a composer checkpoint, got {checkpoint.kind or 'unknown'}")
    try:
        tokenizer = PerTok(TokenizerConfig.from_dict(checkpoint.header["tokenizer"]))
        config = ComposerConfig.from_dict(checkpoint.header["composer"])
    except KeyError as exc:
        raise CheckpointError(f"checkpoint header lacks {exc}") from None
    if config.vocab_size != len(tokenizer.vocabulary):
        raise CheckpointError(
            f"checkpoint vocab_size {config.vocab_size} does not match its tokenizer ({len(tokenizer.vocabulary)})")
    model = Composer(config)
    restore(model, checkpoint)
    model.eval()
    return model, tokenizer


def reconstruction_accuracy(model: Composer, sequences: Sequence[List[int]], pad_id: int = 0,
                            batch_size: int = 16) -> float:
    """
    Teacher-forced next-token accuracy with z = mu, over non-PAD targets.
    """
    correct = 0
    total = 0
    was_training = model.training
    model.eval()
    with torch.no_grad():
        for start in range(0, len(sequences), batch_size):
            ids = pad_batch(sequences[start:start + batch_size], pad_id)
            padding = ids == pad_id
            latent = model.reparameterize(model.encode_latent(ids, padding))
            logits = model.decode_forward(ids[:, :-1], latent.mu, padding[:, :-1])
            targets = ids[:, 1:]
            keep = targets != pad_id
            correct += int((logits.argmax(dim=-1)[keep] == targets[keep]).sum())
            total += int(keep.sum())
    model.train(was_training)
    return correct / total if total else 0.0
