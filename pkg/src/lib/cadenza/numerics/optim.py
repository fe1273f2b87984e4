"""
Adam optimization with gradient clipping.
"""

from typing import Optional, Tuple

import torch
import torch.nn as nn


def build_optimizer(module: nn.Module, lr: float = 1e-4,
                    betas: Tuple[float, float] = (0.9, 0.999),
                    eps: float = 1e-8) -> torch.optim.Adam:
    """Adam over every parameter of a module (bias-corrected, no weight decay)."""
    return torch.optim.Adam(module.parameters(), lr=lr, betas=betas, eps=eps)


def adam_step(optimizer: torch.optim.Optimizer, max_grad_norm: Optional[float] = 1.0) -> float:
    """
    Clip, apply one update and clear gradients.

    Args:
        optimizer: Optimizer whose parameters hold fresh gradients
        max_grad_norm: Global norm clip; None disables clipping

    Returns:
        Gradient norm before clipping
    """
    params = [p for group in optimizer.param_groups for p in group["params"] if p.grad is not None]
    if max_grad_norm is not None:
        norm = float(torch.nn.utils.clip_grad_norm_(params, max_grad_norm))
    elif params:
        norm = float(torch.linalg.vector_norm(torch.stack([p.grad.detach().norm() for p in params])))
    else:
        norm = 0.0
    optimizer.step()
    optimizer.zero_grad(set_to_none=True)
    return norm
