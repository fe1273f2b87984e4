"""
Performer - Bidirectional transformer encoder over masked token sequences.

Token embeddings plus sinusoidal absolute positions feed a stack of
unmasked pre-norm blocks; the final layer norm output is projected back
onto the vocabulary with the embedding matrix.
"""

from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.errors import ConfigurationError, SequenceLengthError
from ..numerics.layers import SinusoidalPositions, TiedEmbedding, TransformerBlock, init_weights
from .config import PerformerConfig


class Performer(nn.Module):
    """Masked-token encoder with tied output projection."""

    def __init__(self, config: PerformerConfig):
        """
        Initialize performer.

        Raises:
            ConfigurationError: If vocab_size is unset
        """
        super().__init__()
        if config.vocab_size is None:
            raise ConfigurationError("PerformerConfig.vocab_size must be set before building a model")
        self.config = config
        d = config.hidden_d
        self.embedding = TiedEmbedding(config.vocab_size, d)
        self.positions = SinusoidalPositions(config.max_seq_len, d)
        self.input_dropout = nn.Dropout(config.dropout)
        self.blocks = nn.ModuleList(
            TransformerBlock(d, config.heads, config.ff_mult, config.dropout) for _ in range(config.layers))
        self.norm = nn.LayerNorm(d)
        init_weights(self)

    def forward(self, ids: torch.Tensor, key_padding: Optional[torch.Tensor] = None) -> torch.Tensor:
        """
        Logits at every position.

        Args:
            ids: LongTensor[batch, t] (or [t]) with MASK at performance slots
            key_padding: Bool[batch, t], True at PAD positions

        Returns:
            Tensor[batch, t, vocab]

        Raises:
            SequenceLengthError: If t exceeds max_seq_len
        """
        if ids.dim() == 1:
            ids = ids.unsqueeze(0)
        if ids.shape[1] > self.config.max_seq_len:
            raise SequenceLengthError(
                f"sequence of {ids.shape[1]} tokens exceeds max_seq_len {self.config.max_seq_len}")
        x = self.embedding(ids) + self.positions(ids.shape[1])
        x = self.input_dropout(x)
        for block in self.blocks:
            x = block(x, causal=False, key_padding=key_padding)
        return self.embedding.project(self.norm(x))


def performer_loss(logits: torch.Tensor, targets: torch.Tensor, mask_positions: torch.Tensor) -> torch.Tensor:
    """
    Mean cross-entropy over masked positions only.

    Args:
        logits: Tensor[batch, t, vocab]
        targets: LongTensor[batch, t], original ids
        mask_positions: Bool[batch, t], True where the input was masked

    Returns:
        Scalar loss; zero when nothing is masked
    """
    if not bool(mask_positions.any()):
        return logits.sum() * 0.0
    return F.cross_entropy(logits[mask_positions], targets[mask_positions])
