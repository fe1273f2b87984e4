"""
Composer losses: free-bits KL, reconstruction NLL and their beta-weighted sum.
"""

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .model import Composer, LatentState


@dataclass
class ComposerLoss:
    """Loss terms of one batch (scalar tensors)."""
    recon: torch.Tensor
    kl: torch.Tensor
    total: torch.Tensor


def kl_per_dim(mu: torch.Tensor, logvar: torch.Tensor) -> torch.Tensor:
    """KL(N(mu, exp(logvar)) || N(0, 1)) per latent dimension."""
    return -0.5 * (1.0 + logvar - mu.pow(2) - logvar.exp())


def kl_free_bits(mu: torch.Tensor, logvar: torch.Tensor, free_bits: float) -> torch.Tensor:
    """
    Sum over dimensions of max(free_bits, KL_k), averaged over the batch.

    With free_bits = 0 the plain KL sum is returned unclamped.
    """
    per_dim = kl_per_dim(mu, logvar)
    if free_bits > 0:
        per_dim = torch.clamp(per_dim, min=free_bits)
    total = per_dim.sum(dim=-1)
    return total if total.dim() == 0 else total.mean()


def reconstruction_nll(logits: torch.Tensor, targets: torch.Tensor, pad_id: int = 0) -> torch.Tensor:
    """Token-averaged negative log-likelihood, ignoring PAD targets."""
    return F.cross_entropy(logits.reshape(-1, logits.shape[-1]), targets.reshape(-1), ignore_index=pad_id)


def composer_loss(model: Composer, ids: torch.Tensor, latent: LatentState, beta: float,
                  free_bits: float, pad_id: int = 0) -> ComposerLoss:
    """
    recon + beta * kl under teacher forcing.

    Args:
        model: Composer
        ids: LongTensor[batch, t] including BOS/EOS
        latent: Posterior sample for the batch
        beta: KL weight
        free_bits: Per-dimension KL floor
        pad_id: PAD id

    Returns:
        ComposerLoss
    """
    if ids.dim() == 1:
        ids = ids.unsqueeze(0)
    padding = ids == pad_id
    logits = model.decode_forward(ids[:, :-1], latent.z, padding[:, :-1])
    recon = reconstruction_nll(logits, ids[:, 1:], pad_id)
    kl = kl_free_bits(latent.mu, latent.logvar, free_bits)
    return ComposerLoss(recon, kl, recon + beta * kl)
