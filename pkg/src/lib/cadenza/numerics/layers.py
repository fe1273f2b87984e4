"""
Transformer building blocks: pre-norm block, tied embedding, sinusoidal
positions, weight initialization.
"""

import math
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.errors import SequenceLengthError
from .attention import MultiHeadSelfAttention
from .rotary import RotaryTable

INIT_STD = 0.02


class FeedForward(nn.Module):
    """Position-wise GELU feed-forward layer."""

    def __init__(self, d_model: int, ff_mult: int = 4, dropout: float = 0.0):
        super().__init__()
        self.inner = nn.Linear(d_model, ff_mult * d_model)
        self.outer = nn.Linear(ff_mult * d_model, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.outer(self.dropout(F.gelu(self.inner(x))))


class TransformerBlock(nn.Module):
    """
    Transformer Block - Pre-norm residual attention + feed-forward.

        x = x + Dropout(Attention(LayerNorm(x)))
        x = x + Dropout(FeedForward(LayerNorm(x)))
    """

    def __init__(self, d_model: int, heads: int, ff_mult: int = 4, dropout: float = 0.1):
        super().__init__()
        self.norm_attention = nn.LayerNorm(d_model)
        self.attention = MultiHeadSelfAttention(d_model, heads, dropout)
        self.norm_ff = nn.LayerNorm(d_model)
        self.ff = FeedForward(d_model, ff_mult, dropout)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, causal: bool = False,
                rotary: Optional[RotaryTable] = None,
                key_padding: Optional[torch.Tensor] = None) -> torch.Tensor:
        x = x + self.dropout(self.attention(self.norm_attention(x), causal, rotary, key_padding))
        return x + self.dropout(self.ff(self.norm_ff(x)))


class TiedEmbedding(nn.Module):
    """
    Token embedding whose matrix also serves as the output projection.

    Both uses read the single `weight` Parameter, so gradients from lookup
    and projection accumulate into it.
    """

    def __init__(self, vocab_size: int, d_model: int):
        super().__init__()
        self.weight = nn.Parameter(torch.empty(vocab_size, d_model))
        nn.init.normal_(self.weight, 0.0, INIT_STD)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        return F.embedding(ids, self.weight)

    def project(self, hidden: torch.Tensor) -> torch.Tensor:
        """Logits h @ E^T."""
        return hidden @ self.weight.t()


class SinusoidalPositions(nn.Module):
    """Fixed sin/cos absolute position encodings."""

    def __init__(self, max_len: int, d_model: int):
        super().__init__()
        position = torch.arange(max_len, dtype=torch.float64).unsqueeze(1)
        div_term = torch.exp(torch.arange(0, d_model, 2, dtype=torch.float64) * (-math.log(10000.0) / d_model))
        table = torch.zeros(max_len, d_model, dtype=torch.float64)
        table[:, 0::2] = torch.sin(position * div_term)
        table[:, 1::2] = torch.cos(position * div_term[: d_model // 2])
        self.register_buffer("table", table.float(), persistent=False)

    @property
    def max_len(self) -> int:
        return self.table.shape[0]

    def forward(self, length: int, offset: int = 0) -> torch.Tensor:
        if offset + length > self.max_len:
            raise SequenceLengthError(f"positions up to {offset + length} exceed {self.max_len}")
        return self.table[offset:offset + length]


def init_weights(module: nn.Module) -> None:
    """normal(0, 0.02) for Linear and embedding weights, zero biases."""
    for child in module.modules():
        if isinstance(child, nn.Linear):
            nn.init.normal_(child.weight, 0.0, INIT_STD)
            if child.bias is not None:
                nn.init.zeros_(child.bias)
        elif isinstance(child, (nn.Embedding, TiedEmbedding)):
            nn.init.normal_(child.weight, 0.0, INIT_STD)
        elif isinstance(child, nn.LayerNorm):
            nn.init.ones_(child.weight)
            nn.init.zeros_(child.bias)
