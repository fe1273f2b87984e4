"""
Composer - Transformer VAE over score-token sequences.

The encoder is a bidirectional RoPE transformer; its position-0 output is
pooled into h, mapped to (mu, logvar) and sampled into z. The decoder is a
causal RoPE transformer that adds the expanded latent z_pre = z W_pre to the
hidden state before every block ("in-attention"). Token embedding and
output projection share one matrix.
"""

from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn as nn

from ..core.errors import ConfigurationError, SequenceLengthError
from ..numerics.layers import TiedEmbedding, TransformerBlock, init_weights
from ..numerics.rotary import RotaryTable
from .config import ComposerConfig


@dataclass
class LatentState:
    """
    Posterior sample.

    Attributes:
        mu: Tensor[batch, d_z]
        logvar: Tensor[batch, d_z]
        z: mu + exp(0.5 * logvar) * eps
        eps: The noise draw used for z
    """

    mu: torch.Tensor
    logvar: torch.Tensor
    z: torch.Tensor
    eps: torch.Tensor


class Composer(nn.Module):
    """Sequence-to-sequence VAE with in-attention latent injection."""

    def __init__(self, config: ComposerConfig):
        """
        Initialize composer.

        Args:
            config: Composer configuration with vocab_size set

        Raises:
            ConfigurationError: If vocab_size is unset
        """
        super().__init__()
        if config.vocab_size is None:
            raise ConfigurationError("ComposerConfig.vocab_size must be set before building a model")
        self.config = config
        d = config.hidden_d
        self.embedding = TiedEmbedding(config.vocab_size, d)
        self.encoder = nn.ModuleList(
            TransformerBlock(d, config.heads, config.ff_mult, config.dropout) for _ in range(config.layers))
        self.encoder_norm = nn.LayerNorm(d)
        self.w_mu = nn.Linear(d, config.latent_dz, bias=False)
        self.w_sigma = nn.Linear(d, config.latent_dz, bias=False)
        self.w_pre = nn.Linear(config.latent_dz, d, bias=False)
        self.decoder = nn.ModuleList(
            TransformerBlock(d, config.heads, config.ff_mult, config.dropout) for _ in range(config.layers))
        self.decoder_norm = nn.LayerNorm(d)
        self.rotary = RotaryTable.build(config.max_seq_len, d // config.heads, config.rope_base)
        init_weights(self)

    def _batched(self, ids: torch.Tensor) -> torch.Tensor:
        if ids.dim() == 1:
            ids = ids.unsqueeze(0)
        if ids.shape[1] < 1:
            raise SequenceLengthError("empty sequence")
        if ids.shape[1] > self.config.max_seq_len:
            raise SequenceLengthError(
                f"sequence of {ids.shape[1]} tokens exceeds max_seq_len {self.config.max_seq_len}")
        return ids

    def encode_latent(self, ids: torch.Tensor, key_padding: Optional[torch.Tensor] = None) -> torch.Tensor:
        """
        Pool a token sequence into h.

        Args:
            ids: LongTensor[batch, t] (or [t])
            key_padding: Bool[batch, t], True at PAD positions

        Returns:
            Tensor[batch, d], the position-0 row of the encoder output
        """
        ids = self._batched(ids)
        x = self.embedding(ids)
        for block in self.encoder:
            x = block(x, causal=False, rotary=self.rotary, key_padding=key_padding)
        return self.encoder_norm(x)[:, 0]

    def reparameterize(self, h: torch.Tensor, eps: Optional[torch.Tensor] = None) -> LatentState:
        """
        mu = h W_mu, logvar = h W_sigma, z = mu + exp(0.5 * logvar) * eps.

        A missing eps means eps = 0, i.e. z = mu.
        """
        mu = self.w_mu(h)
        logvar = self.w_sigma(h)
        if eps is None:
            eps = torch.zeros_like(mu)
        return LatentState(mu, logvar, mu + torch.exp(0.5 * logvar) * eps, eps)

    def decode_forward(self, prev_ids: torch.Tensor, z: torch.Tensor,
                       key_padding: Optional[torch.Tensor] = None) -> torch.Tensor:
        """
        Next-token logits under causal decoding conditioned on z.

        Args:
            prev_ids: LongTensor[batch, t] (or [t])
            z: Tensor[batch, d_z] (or [d_z])
            key_padding: Bool[batch, t], True at PAD positions

        Returns:
            Tensor[batch, t, vocab]

        Raises:
            ConfigurationError: If z does not have d_z columns
        """
        prev_ids = self._batched(prev_ids)
        if z.shape[-1] != self.config.latent_dz:
            raise ConfigurationError(f"latent has {z.shape[-1]} dims, model expects {self.config.latent_dz}")
        if z.dim() == 1:
            z = z.unsqueeze(0)
        z_pre = self.w_pre(z).unsqueeze(1)
        x = self.embedding(prev_ids)
        for block in self.decoder:
            x = block(x + z_pre, causal=True, rotary=self.rotary, key_padding=key_padding)
        return self.embedding.project(self.decoder_norm(x))

