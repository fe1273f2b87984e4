"""
Style fidelity: how close each performer's predictions on an evaluation
corpus come to its own training data versus the other style's data.
"""

import logging
from typing import Dict, List, Optional, Sequence

from ..core.errors import ConfigurationError
from ..core.note_event import Score
from ..core.run_log import RunLog
from ..metrics.expression import ExpressionHistogram, histogram_divergence, pooled_histograms
from ..metrics.report import FidelityRow, log_fidelity
from ..numerics.checkpoint import Checkpoint
from .infill import perform_score
from .train import load_performer

logger = logging.getLogger(__name__)


def predicted_histograms(checkpoint: Checkpoint, scores: Sequence[Score]) -> ExpressionHistogram:
    """Pooled velocity/microtiming counts of a performer's renditions."""
    model, tokenizer = load_performer(checkpoint)
    return pooled_histograms(perform_score(score, model, tokenizer) for score in scores)


def fidelity_report(checkpoints: Dict[str, Checkpoint], datasets: Dict[str, Sequence[Score]],
                    eval_corpus: Sequence[Score], run_log: Optional[RunLog] = None) -> List[FidelityRow]:
    """
    KL(predictions || dataset) against the model's own and the opposite data.

    Args:
        checkpoints: Style name -> performer trained on that style
        datasets: Style name -> training scores, same keys as checkpoints
        eval_corpus: Scores every performer renders
        run_log: Receives one FIDELITY record per row

    Returns:
        Rows (model, "Train") and (model, "Opposite") for each model

    Raises:
        ConfigurationError: Unless exactly two styles with matching keys are given
    """
    if len(checkpoints) != 2 or set(checkpoints) != set(datasets):
        raise ConfigurationError("fidelity needs exactly two styles, each with a checkpoint and a dataset")
    references = {name: pooled_histograms(scores) for name, scores in datasets.items()}
    rows = []
    for name, checkpoint in checkpoints.items():
        predicted = predicted_histograms(checkpoint, eval_corpus)
        (opposite,) = [other for other in datasets if other != name]
        for label, reference in (("Train", references[name]), ("Opposite", references[opposite])):
            row = FidelityRow(name, label,
                              histogram_divergence(predicted.velocity, reference.velocity),
                              histogram_divergence(predicted.microtiming, reference.microtiming))
            logger.info("%s vs %s: velocity KL %.4f, microtiming KL %.4f",
                        name, label, row.velocity.kl, row.microtiming.kl)
            rows.append(row)
    if run_log is not None:
        log_fidelity(run_log, rows)
    return rows
