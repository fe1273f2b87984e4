"""
PerTok tokenizer.

- TokenizerConfig: grids, buckets, feature flags
- Vocabulary: dense token <-> id tables
- PerTok: encode / decode / strip / mask / canonicalize
- TokenGrammar: per-note token order
- bench: vocabulary size and sequence length per variant
"""

from .bench import BenchRow, bench_variants, benchmark, format_bench_table
from .config import TokenizerConfig
from .grammar import PerformanceSlots, TokenGrammar
from .pertok import PerTok, canonicalize, decode, encode, mask_performance, strip_performance
from .quantize import decompose_timeshift, quantize_onset
from .vocabulary import Vocabulary, build_vocabulary

__all__ = [
    "BenchRow",
    "PerTok",
    "PerformanceSlots",
    "TokenGrammar",
    "TokenizerConfig",
    "Vocabulary",
    "bench_variants",
    "benchmark",
    "build_vocabulary",
    "canonicalize",
    "decode",
    "decompose_timeshift",
    "encode",
    "format_bench_table",
    "mask_performance",
    "quantize_onset",
    "strip_performance",
]
