"""
Seeded random streams.

Every stochastic operation draws from a stream derived from the run seed
and a tuple of keys (purpose, step, item index), so any single draw can be
reproduced without replaying the ones before it.
"""

import zlib
from typing import Union

import numpy as np
import torch

Key = Union[int, str]


def _entropy(seed: int, keys: tuple) -> list:
    words = [int(seed) & 0xFFFFFFFF]
    for key in keys:
        if isinstance(key, str):
            words.append(zlib.crc32(key.encode("utf-8")))
        else:
            words.append(int(key) & 0xFFFFFFFF)
    return words


def stream(seed: int, *keys: Key) -> np.random.Generator:
    """NumPy generator for (seed, keys)."""
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, keys)))


def derive_seed(seed: int, *keys: Key) -> int:
    """63-bit integer seed for (seed, keys)."""
    return int(stream(seed, *keys).integers(0, 2**63 - 1))


def torch_generator(seed: int, *keys: Key) -> torch.Generator:
    """Torch CPU generator for (seed, keys)."""
    generator = torch.Generator()
    generator.manual_seed(derive_seed(seed, *keys))
    return generator


def seed_torch(seed: int, *keys: Key) -> None:
    """Reseed torch's global generator (dropout, init) for (seed, keys)."""
    torch.manual_seed(derive_seed(seed, *keys))
