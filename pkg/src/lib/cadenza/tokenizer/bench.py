"""
Tokenizer benchmark - vocabulary size and mean sequence length per variant.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ..core.errors import CorpusError
from ..core.note_event import Score
from .config import TokenizerConfig
from .pertok import PerTok

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BenchRow:
    """One benchmark table row."""
    name: str
    vocab_size: int
    mean_length: float
    mean_notes: float

    def to_dict(self) -> Dict[str, object]:
        return {"name": self.name, "vocab_size": self.vocab_size,
                "mean_length": self.mean_length, "mean_notes": self.mean_notes}


def bench_variants(base: TokenizerConfig) -> Dict[str, TokenizerConfig]:
    """
    Named variants derived from a base configuration.

    - PerTok: quantized only, velocity kept, no microshift
    - PerTok-p: microshift with one bucket per tick
    - PerTok no-duration: PerTok without Duration tokens
    """
    quantized = base.replace(use_microshift=False, use_velocity=True)
    fine = base.replace(use_velocity=True, use_microshift=True,
                        microshift_buckets=2 * base.max_microshift_ticks + 1)
    return {
        "PerTok": quantized,
        "PerTok-p": fine,
        "PerTok no-duration": quantized.replace(use_duration=False),
    }


def benchmark(corpus: Sequence[Score], configs: Dict[str, TokenizerConfig]) -> List[BenchRow]:
    """
    Encode a corpus with every configuration.

    Args:
        corpus: Scores at the configurations' resolution
        configs: Name -> configuration

    Returns:
        One row per configuration, in the given order

    Raises:
        CorpusError: If the corpus is empty
    """
    if not corpus:
        raise CorpusError("cannot benchmark an empty corpus")
    mean_notes = float(np.mean([len(score) for score in corpus]))
    rows = []
    for name, config in configs.items():
        tokenizer = PerTok(config)
        lengths = [len(tokenizer.encode(score)) for score in corpus]
        row = BenchRow(name, len(tokenizer.vocabulary), float(np.mean(lengths)), mean_notes)
        logger.info("%s: vocab %d, mean length %.2f", name, row.vocab_size, row.mean_length)
        rows.append(row)
    return rows


def format_bench_table(rows: Sequence[BenchRow]) -> str:
    """Tokenizer / Vocab. Size / Seq. Length table."""
    width = max([len("Tokenizer")] + [len(row.name) for row in rows])
    lines = [f"{'Tokenizer':<{width}}  {'Vocab. Size':>11}  {'Seq. Length':>11}"]
    lines.append("-" * len(lines[0]))
    for row in rows:
        lines.append(f"{row.name:<{width}}  {row.vocab_size:>11d}  {row.mean_length:>11.2f}")
    return "\n".join(lines) + "\n"
