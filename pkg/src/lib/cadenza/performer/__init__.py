"""
Performer - masked encoder that adds velocity and microtiming to scores.

- model: Performer, performer_loss
- infill: performance slots, apply_performance, perform_score
- train: 100%-masking training, checkpoint loading, mask accuracy
- fidelity: style-fidelity divergence report
"""

from .config import PerformerConfig
from .fidelity import fidelity_report, predicted_histograms
from .infill import FillMode, apply_performance, fill_slots, insert_performance_slots, perform_score
from .model import Performer, performer_loss
from .train import build_performer, load_performer, mask_accuracy, performance_mask, prepare_examples, train_performer

__all__ = [
    "FillMode",
    "Performer",
    "PerformerConfig",
    "apply_performance",
    "build_performer",
    "fidelity_report",
    "fill_slots",
    "insert_performance_slots",
    "load_performer",
    "mask_accuracy",
    "perform_score",
    "performance_mask",
    "performer_loss",
    "predicted_histograms",
    "prepare_examples",
    "train_performer",
]
