"""
Rotary position embeddings.

Each consecutive channel pair (2i, 2i+1) of a query/key vector at position m
is rotated by the angle m * base^(-2i/d). Dot products of rotated vectors
then depend only on the distance between positions.
"""

from dataclasses import dataclass
from typing import Tuple

import torch

from ..core.errors import ConfigurationError, SequenceLengthError

DEFAULT_BASE = 10000.0


@dataclass(frozen=True)
class RotaryTable:
    """
    Precomputed cos/sin per (position, channel pair).

    Attributes:
        cos: Tensor[max_len, d_head / 2]
        sin: Tensor[max_len, d_head / 2]
        base: Frequency base
    """

    cos: torch.Tensor
    sin: torch.Tensor
    base: float = DEFAULT_BASE

    @classmethod
    def build(cls, max_len: int, d_head: int, base: float = DEFAULT_BASE,
              dtype: torch.dtype = torch.float64) -> "RotaryTable":
        """
        Build a table.

        Args:
            max_len: Number of positions
            d_head: Head dimension, must be even
            base: Frequency base
            dtype: Table precision

        Raises:
            ConfigurationError: If d_head is odd
        """
        if d_head % 2:
            raise ConfigurationError(f"rotary embeddings need an even head dimension, got {d_head}")
        inv_freq = base ** (-torch.arange(0, d_head, 2, dtype=torch.float64) / d_head)
        angles = torch.outer(torch.arange(max_len, dtype=torch.float64), inv_freq)
        return cls(torch.cos(angles).to(dtype), torch.sin(angles).to(dtype), base)

    @property
    def max_len(self) -> int:
        return self.cos.shape[0]

    @property
    def d_head(self) -> int:
        return 2 * self.cos.shape[1]


def _rotate(x: torch.Tensor, cos: torch.Tensor, sin: torch.Tensor) -> torch.Tensor:
    even = x[..., 0::2]
    odd = x[..., 1::2]
    rotated = torch.stack((even * cos - odd * sin, even * sin + odd * cos), dim=-1)
    return rotated.flatten(-2)


def rope_apply(q: torch.Tensor, k: torch.Tensor, table: RotaryTable,
               offset: int = 0) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Rotate queries and keys by their positions.

    Args:
        q: Tensor[..., t, d_head]
        k: Tensor[..., t, d_head]
        table: Rotary table covering offset + t positions
        offset: Position of the first row

    Returns:
        (rotated q, rotated k) with unchanged shapes

    Raises:
        ConfigurationError: On an odd or mismatched head dimension
        SequenceLengthError: If the table has too few positions
    """
    d_head = q.shape[-1]
    if d_head % 2:
        raise ConfigurationError(f"rotary embeddings need an even head dimension, got {d_head}")
    if d_head != table.d_head or k.shape[-1] != d_head:
        raise ConfigurationError(f"head dimension {d_head} does not match rotary table {table.d_head}")
    length = q.shape[-2]
    if offset + length > table.max_len:
        raise SequenceLengthError(f"positions up to {offset + length} exceed rotary table of {table.max_len}")
    cos = table.cos[offset:offset + length].to(q.dtype)
    sin = table.sin[offset:offset + length].to(q.dtype)
    return _rotate(q, cos, sin), _rotate(k, cos, sin)
