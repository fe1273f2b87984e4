"""
Seeded train/test split.
"""

from typing import List, Sequence, Tuple, TypeVar

from ..core.errors import ConfigurationError
from ..numerics.rng import stream

T = TypeVar("T")


def split(corpus: Sequence[T], ratio: float, seed: int) -> Tuple[List[T], List[T]]:
    """
    Shuffle with the seed, then cut.

    Args:
        corpus: Items
        ratio: Share of items in the training part, 0-1
        seed: Shuffle seed

    Returns:
        (train, test), disjoint and together the whole corpus
    """
    if not 0.0 <= ratio <= 1.0:
        raise ConfigurationError(f"split ratio must be in [0, 1], got {ratio}")
    order = stream(seed, "split").permutation(len(corpus))
    cut = int(round(ratio * len(corpus)))
    return [corpus[int(i)] for i in order[:cut]], [corpus[int(i)] for i in order[cut:]]
