"""
Performer training with every performance token masked, checkpoint
loading and mask-prediction accuracy.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import torch

from ..core.errors import CheckpointError, ConfigurationError
from ..core.note_event import Score
from ..core.run_log import RunLog
from ..numerics.checkpoint import Checkpoint, restore
from ..numerics.rng import seed_torch
from ..numerics.training import TrainingConfig, pad_batch, train_loop
from ..tokenizer.config import TokenizerConfig
from ..tokenizer.pertok import PerTok
from .config import PerformerConfig
from .infill import performance_kinds
from .model import Performer, performer_loss

logger = logging.getLogger(__name__)

KIND = "performer"


def prepare_examples(scores: Sequence[Score], tokenizer: PerTok, max_seq_len: int) -> List[List[int]]:
    """
    Full token ids (score and performance) of each score.

    Raises:
        ConfigurationError: If the tokenizer emits no performance tokens
    """
    if not tokenizer.config.performance_enabled:
        raise ConfigurationError("the performer needs a tokenizer with velocity or microshift enabled")
    examples = []
    for index, score in enumerate(scores):
        ids = tokenizer.encode_ids(score)
        if len(ids) > max_seq_len:
            logger.debug("Skipping item %d: %d tokens exceed max_seq_len %d", index, len(ids), max_seq_len)
            continue
        examples.append(ids)
    return examples


def performance_mask(ids: torch.Tensor, tokenizer: PerTok) -> torch.Tensor:
    """Bool tensor, True where an id is a Velocity or MicroShift token."""
    mask = torch.zeros_like(ids, dtype=torch.bool)
    for kind in performance_kinds(tokenizer):
        span = tokenizer.vocabulary.kind_ids(kind)
        mask |= (ids >= span.start) & (ids < span.stop)
    return mask


def build_performer(config: PerformerConfig, tokenizer: PerTok, seed: int) -> Performer:
    """Performer bound to the tokenizer's vocabulary, initialized from the seed."""
    seed_torch(seed, KIND, "init")
    return Performer(config.with_vocabulary(len(tokenizer.vocabulary)))


def train_performer(sequences: Sequence[List[int]], config: PerformerConfig, training: TrainingConfig,
                    tokenizer: PerTok, seed: int = 0, run_log: Optional[RunLog] = None,
                    checkpoint_dir: Optional[Union[str, Path]] = None,
                    resume: Optional[Checkpoint] = None, progress: bool = False) -> Checkpoint:
    """
    Masked-infilling training: all performance tokens of every example are
    replaced by MASK and predicted from the remaining score tokens.

    Args:
        sequences: Full token ids (see prepare_examples)
        config: Performer configuration
        training: Loop settings
        tokenizer: Tokenizer the ids come from
        seed: Run seed
        run_log: Receives loss curves
        checkpoint_dir: Periodic checkpoint directory
        resume: Checkpoint to continue from
        progress: Show a progress bar

    Returns:
        Final Checkpoint

    Raises:
        CorpusError: If there are no sequences
    """
    model = build_performer(config, tokenizer, seed)
    vocabulary = tokenizer.vocabulary

    def step_fn(step: int, batch: List[List[int]]) -> Dict[str, Any]:
        ids = pad_batch(batch, vocabulary.pad_id)
        masked_positions = performance_mask(ids, tokenizer)
        inputs = ids.masked_fill(masked_positions, vocabulary.mask_id)
        logits = model(inputs, ids == vocabulary.pad_id)
        return {"loss": performer_loss(logits, ids, masked_positions),
                "masked": int(masked_positions.sum())}

    header = {"kind": KIND, "seed": seed, "tokenizer": tokenizer.config.to_dict(),
              "performer": model.config.to_dict(), "training": training.to_dict()}
    return train_loop(model, sequences, training, seed, KIND, step_fn, header,
                      run_log, checkpoint_dir, resume, progress)


def load_performer(checkpoint: Checkpoint) -> Tuple[Performer, PerTok]:
    """
    Rebuild a performer and its tokenizer from a checkpoint.

    Raises:
        CheckpointError: If the checkpoint is not a performer checkpoint or
            its vocabulary size disagrees with its tokenizer
    """
    if checkpoint.kind != KIND:
        raise CheckpointError(f"expected a performer checkpoint, got {checkpoint.kind or 'unknown'}")
    try:
        tokenizer = PerTok(TokenizerConfig.from_dict(checkpoint.header["tokenizer"]))
        config = PerformerConfig.from_dict(checkpoint.header["performer"])
    except KeyError as exc:
        raise CheckpointError(f"checkpoint header lacks {exc}") from None
    if config.vocab_size != len(tokenizer.vocabulary):
        raise CheckpointError(
            f"checkpoint vocab_size {config.vocab_size} does not match its tokenizer ({len(tokenizer.vocabulary)})")
    model = Performer(config)
    restore(model, checkpoint)
    model.eval()
    return model, tokenizer


def mask_accuracy(model: Performer, sequences: Sequence[List[int]], tokenizer: PerTok,
                  batch_size: int = 16) -> float:
    """Share of masked performance tokens recovered by kind-restricted argmax."""
    vocabulary = tokenizer.vocabulary
    correct = 0
    total = 0
    was_training = model.training
    model.eval()
    with torch.no_grad():
        for start in range(0, len(sequences), batch_size):
            ids = pad_batch(sequences[start:start + batch_size], vocabulary.pad_id)
            inputs = ids.masked_fill(performance_mask(ids, tokenizer), vocabulary.mask_id)
            logits = model(inputs, ids == vocabulary.pad_id)
            for kind in performance_kinds(tokenizer):
                span = vocabulary.kind_ids(kind)
                here = (ids >= span.start) & (ids < span.stop)
                predicted = logits[..., span.start:span.stop].argmax(dim=-1) + span.start
                correct += int((predicted[here] == ids[here]).sum())
                total += int(here.sum())
    model.train(was_training)
    return correct / total if total else 0.0
