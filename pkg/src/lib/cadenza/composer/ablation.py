"""
KL ablation: train one composer per preset and score greedy
reconstructions of a corpus against their inputs.
"""

import logging
from typing import Dict, List, Optional, Sequence

from ..core.note_event import Score
from ..core.run_log import RunLog
from ..metrics.report import log_similarity
from ..metrics.similarity import SimilarityReport, corpus_similarity
from ..numerics.checkpoint import Checkpoint
from ..numerics.training import TrainingConfig
from ..tokenizer.pertok import PerTok
from .config import ComposerConfig
from .generate import DecodeMode, vary
from .presets import ABLATION_PRESETS, preset_config
from .train import load_composer, prepare_sequences, train_composer

logger = logging.getLogger(__name__)


def train_presets(scores: Sequence[Score], base: ComposerConfig, training: TrainingConfig,
                  tokenizer: PerTok, seed: int = 0,
                  presets: Optional[Sequence[str]] = None) -> Dict[str, Checkpoint]:
    """One composer per preset, all with the same data and seed."""
    sequences = prepare_sequences(scores, tokenizer, base.max_seq_len)
    checkpoints = {}
    for name in presets or list(ABLATION_PRESETS):
        logger.info("Training preset %s", name)
        checkpoints[name] = train_composer(sequences, preset_config(name, base), training, tokenizer, seed)
    return checkpoints


def reconstructions(checkpoint: Checkpoint, scores: Sequence[Score]) -> List[Score]:
    """Greedy variations of each score with z = mu."""
    model, tokenizer = load_composer(checkpoint)
    return [vary(model, tokenizer, score, DecodeMode.GREEDY) for score in scores]


def ablation_report(checkpoints: Dict[str, Checkpoint], scores: Sequence[Score],
                    run_log: Optional[RunLog] = None) -> Dict[str, SimilarityReport]:
    """
    Similarity of each preset's reconstructions to their inputs.

    Args:
        checkpoints: Preset name -> trained composer
        scores: Inputs to reconstruct
        run_log: Receives one SIMILARITY record per preset

    Returns:
        Preset name -> SimilarityReport, in the given order
    """
    reports = {}
    for name, checkpoint in checkpoints.items():
        reports[name] = corpus_similarity(reconstructions(checkpoint, scores), scores)
        logger.info("%s pitch similarity %.2f (per-file)", name, reports[name].per_file.get("pitch", float("nan")))
    if run_log is not None:
        log_similarity(run_log, reports)
    return reports
