"""
Corpus tools: file scanning, manifests, segmentation, synthetic styles and
splits.
"""

from .files import load_corpus, read_manifest, scan_directory, write_manifest
from .segment import segment
from .split import split
from .synth import NEUTRAL, STYLE_A, STYLE_B, StyleSpec, synth_corpus, synth_score

__all__ = [
    "NEUTRAL",
    "STYLE_A",
    "STYLE_B",
    "StyleSpec",
    "load_corpus",
    "read_manifest",
    "scan_directory",
    "segment",
    "split",
    "synth_corpus",
    "synth_score",
    "write_manifest",
]
