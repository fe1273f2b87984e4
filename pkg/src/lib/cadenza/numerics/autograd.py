"""
Reverse-mode differentiation helpers and finite-difference gradient checks.
"""

from typing import Callable, Dict, Sequence

import torch
import torch.nn as nn

from ..core.errors import ConfigurationError


def backward(loss: torch.Tensor) -> None:
    """
    Populate .grad of every parameter reachable from a scalar loss.

    Raises:
        ConfigurationError: If the loss is not a scalar
    """
    if loss.dim() != 0:
        raise ConfigurationError(f"backward needs a scalar loss, got shape {tuple(loss.shape)}")
    loss.backward()


def gradients(module: nn.Module) -> Dict[str, torch.Tensor]:
    """Copy of every parameter gradient by name (zeros where none was computed)."""
    return {
        name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
        for name, p in module.named_parameters()
    }


def gradient_check(fn: Callable[..., torch.Tensor], inputs: Sequence[torch.Tensor],
                   eps: float = 1e-6, rtol: float = 1e-5, atol: float = 1e-8) -> bool:
    """
    Compare analytic gradients with central finite differences.

    Inputs must be float64 tensors with requires_grad set.
    """
    return torch.autograd.gradcheck(fn, tuple(inputs), eps=eps, rtol=rtol, atol=atol,
                                    raise_exception=False)


def module_gradient_check(module: nn.Module, loss_fn: Callable[[nn.Module], torch.Tensor],
                          eps: float = 1e-6, rtol: float = 1e-5, atol: float = 1e-8) -> bool:
    """
    Gradient check of a scalar loss with respect to every module parameter.

    Args:
        module: float64 module in eval mode; its parameters are perturbed in
            place, so loss_fn must read them directly
        loss_fn: Maps the module to a scalar loss
        eps: Finite-difference step
        rtol: Relative tolerance
        atol: Absolute tolerance

    Returns:
        True if every parameter gradient matches
    """
    params = tuple(module.parameters())
    return gradient_check(lambda *_: loss_fn(module), params, eps, rtol, atol)
