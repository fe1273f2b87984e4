"""
Training configuration, batch assembly and the seeded training loop shared
by the composer and the performer.

Every stochastic choice of a step (batch indices, dropout, latent noise) is
drawn from streams keyed by (seed, purpose, step), so a run resumed from a
checkpoint continues bit-identically.
"""

import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
from pydantic import Field
from tqdm import tqdm

from ..core.config_model import ConfigModel
from ..core.errors import CheckpointError, CorpusError
from ..core.run_log import RunEventType, RunLog
from .autograd import backward
from .checkpoint import Checkpoint, capture, restore
from .optim import adam_step, build_optimizer
from .rng import seed_torch, stream

logger = logging.getLogger(__name__)

StepFn = Callable[[int, List[List[int]]], Dict[str, Any]]


class TrainingConfig(ConfigModel):
    """Optimizer and loop settings."""

    steps: int = Field(default=1000, ge=1)
    batch_size: int = Field(default=16, ge=1)
    lr: float = Field(default=1e-4, gt=0)
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = Field(default=1e-8, gt=0)
    max_grad_norm: Optional[float] = Field(default=1.0, gt=0)
    checkpoint_every: int = Field(default=0, ge=0)
    log_every: int = Field(default=10, ge=1)


def batch_indices(corpus_size: int, batch_size: int, seed: int, purpose: str, step: int) -> np.ndarray:
    """Indices of the items of one training batch, drawn without replacement."""
    generator = stream(seed, purpose, step)
    return generator.choice(corpus_size, size=min(batch_size, corpus_size), replace=False)


def pad_batch(sequences: Sequence[Sequence[int]], pad_id: int) -> torch.Tensor:
    """LongTensor[batch, longest] right-padded with pad_id."""
    longest = max(len(s) for s in sequences)
    batch = torch.full((len(sequences), longest), pad_id, dtype=torch.long)
    for row, sequence in enumerate(sequences):
        batch[row, :len(sequence)] = torch.as_tensor(list(sequence), dtype=torch.long)
    return batch


def select(sequences: Sequence[List[int]], indices: np.ndarray) -> List[List[int]]:
    return [sequences[int(i)] for i in indices]


def train_loop(model: nn.Module, sequences: Sequence[List[int]], training: TrainingConfig,
               seed: int, purpose: str, step_fn: StepFn, header: Dict[str, Any],
               run_log: Optional[RunLog] = None,
               checkpoint_dir: Optional[Union[str, Path]] = None,
               resume: Optional[Checkpoint] = None, progress: bool = False) -> Checkpoint:
    """
    Run Adam steps until `training.steps` and snapshot the result.

    Args:
        model: Module being trained, already initialized from the seed
        sequences: Token-id sequences
        training: Loop settings
        seed: Run seed
        purpose: Stream key and checkpoint kind ("composer", "performer")
        step_fn: (step, batch) -> {"loss": scalar tensor, other scalars to log}
        header: Checkpoint header without "step"
        run_log: Receives TRAIN_STEP and CHECKPOINT records
        checkpoint_dir: Where periodic checkpoints go
        resume: Checkpoint to continue from (params, Adam moments, step)
        progress: Show a tqdm progress bar

    Returns:
        Final Checkpoint (parameters and Adam moments)

    Raises:
        CorpusError: If there are no sequences
        CheckpointError: If `resume` belongs to another kind of model
    """
    if not sequences:
        raise CorpusError(f"no training sequences for the {purpose}")
    optimizer = build_optimizer(model, training.lr, training.betas, training.eps)
    start = 0
    if resume is not None:
        if resume.kind != purpose:
            raise CheckpointError(f"cannot resume {purpose} training from a {resume.kind or 'unknown'} checkpoint")
        restore(model, resume, optimizer)
        start = resume.step
        logger.info("Resuming %s training at step %d", purpose, start)

    model.train()
    for step in tqdm(range(start, training.steps), desc=purpose, disable=not progress, leave=False):
        seed_torch(seed, purpose, "step", step)
        batch = select(sequences, batch_indices(len(sequences), training.batch_size, seed, purpose, step))
        terms = step_fn(step, batch)
        backward(terms["loss"])
        adam_step(optimizer, training.max_grad_norm)

        done = step + 1
        if done % training.log_every == 0 or done == training.steps:
            values = {name: float(value) for name, value in terms.items()}
            logger.debug("%s step %d: %s", purpose, done, values)
            if run_log is not None:
                run_log.log(RunEventType.TRAIN_STEP, step=done, **values)
        if checkpoint_dir is not None and training.checkpoint_every and done % training.checkpoint_every == 0:
            path = Path(checkpoint_dir) / f"{purpose}-{done:07d}.ckpt"
            capture(model, {**header, "step": done}, optimizer).save(path)
            if run_log is not None:
                run_log.log(RunEventType.CHECKPOINT, step=done, path=str(path))
    model.eval()
    return capture(model, {**header, "step": max(start, training.steps)}, optimizer)
