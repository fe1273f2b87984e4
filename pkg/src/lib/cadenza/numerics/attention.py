"""
Multi-head self-attention with optional causal masking and rotary positions.
"""

from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..core.errors import ConfigurationError
from .rotary import RotaryTable, rope_apply


def attention_mask(length: int, causal: bool, key_padding: Optional[torch.Tensor] = None,
                   device: Optional[torch.device] = None) -> torch.Tensor:
    """
    Boolean mask of allowed (query, key) pairs.

    Args:
        length: Sequence length
        causal: Forbid attending to later positions
        key_padding: Bool[batch, length], True at padding keys

    Returns:
        Bool[length, length] or Bool[batch, 1, length, length]. Query rows
        whose keys are all padding keep the unpadded pattern so that outputs
        stay finite.
    """
    base = torch.ones(length, length, dtype=torch.bool, device=device)
    if causal:
        base = torch.tril(base)
    if key_padding is None:
        return base
    allowed = base & ~key_padding[:, None, None, :]
    empty = ~allowed.any(dim=-1, keepdim=True)
    return allowed | (empty & base)


class MultiHeadSelfAttention(nn.Module):
    """Scaled dot-product self-attention over `heads` heads."""

    def __init__(self, d_model: int, heads: int, dropout: float = 0.0):
        super().__init__()
        if heads <= 0 or d_model % heads:
            raise ConfigurationError(f"hidden size {d_model} is not divisible by {heads} heads")
        self.d_model = d_model
        self.heads = heads
        self.d_head = d_model // heads
        self.dropout = dropout
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.out = nn.Linear(d_model, d_model)

    def forward(self, x: torch.Tensor, causal: bool = False,
                rotary: Optional[RotaryTable] = None,
                key_padding: Optional[torch.Tensor] = None) -> torch.Tensor:
        """
        Attend.

        Args:
            x: Tensor[batch, t, d] (or [t, d])
            causal: Causal masking
            rotary: Rotate queries and keys by position when given
            key_padding: Bool[batch, t], True at padding positions

        Returns:
            Tensor of the same shape as x
        """
        unbatched = x.dim() == 2
        if unbatched:
            x = x.unsqueeze(0)
            if key_padding is not None:
                key_padding = key_padding.unsqueeze(0)
        if x.shape[-1] != self.d_model:
            raise ConfigurationError(f"input width {x.shape[-1]} does not match attention width {self.d_model}")
        batch, length, _ = x.shape

        q, k, v = self.qkv(x).split(self.d_model, dim=-1)
        q, k, v = (t.view(batch, length, self.heads, self.d_head).transpose(1, 2) for t in (q, k, v))
        if rotary is not None:
            q, k = rope_apply(q, k, rotary)
        mask = attention_mask(length, causal, key_padding, device=x.device)
        y = F.scaled_dot_product_attention(
            q, k, v, attn_mask=mask, dropout_p=self.dropout if self.training else 0.0)
        y = self.out(y.transpose(1, 2).reshape(batch, length, self.d_model))
        return y.squeeze(0) if unbatched else y


def attention(x: torch.Tensor, module: MultiHeadSelfAttention, causal: bool = False,
              rotary: Optional[RotaryTable] = None,
              key_padding: Optional[torch.Tensor] = None) -> torch.Tensor:
    """Functional entry point to a MultiHeadSelfAttention module."""
    return module(x, causal=causal, rotary=rotary, key_padding=key_padding)
