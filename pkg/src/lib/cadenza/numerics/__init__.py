"""
Numerics - torch tensors, transformer building blocks and training plumbing.

- rotary: RotaryTable, rope_apply
- attention: MultiHeadSelfAttention, attention
- layers: TransformerBlock, TiedEmbedding, SinusoidalPositions, init_weights
- autograd: backward, gradients, gradient checks
- optim: Adam with clipping
- rng: seeded streams
- checkpoint: versioned checkpoint files
- training: TrainingConfig, batches and the seeded training loop
"""

from torch import Tensor

from .attention import MultiHeadSelfAttention, attention, attention_mask
from .autograd import backward, gradient_check, gradients, module_gradient_check
from .checkpoint import Checkpoint, capture, restore
from .layers import FeedForward, SinusoidalPositions, TiedEmbedding, TransformerBlock, init_weights
from .optim import adam_step, build_optimizer
from .rng import derive_seed, seed_torch, stream, torch_generator
from .rotary import RotaryTable, rope_apply
from .training import TrainingConfig, batch_indices, pad_batch, select, train_loop

__all__ = [
    "Checkpoint",
    "FeedForward",
    "MultiHeadSelfAttention",
    "RotaryTable",
    "SinusoidalPositions",
    "Tensor",
    "TiedEmbedding",
    "TrainingConfig",
    "TransformerBlock",
    "adam_step",
    "attention",
    "attention_mask",
    "backward",
    "batch_indices",
    "build_optimizer",
    "capture",
    "derive_seed",
    "gradient_check",
    "gradients",
    "init_weights",
    "module_gradient_check",
    "pad_batch",
    "restore",
    "rope_apply",
    "seed_torch",
    "select",
    "stream",
    "torch_generator",
    "train_loop",
]
