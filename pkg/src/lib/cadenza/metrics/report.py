"""
Metric reports: human-readable tables and JSON-line records.
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

from ..core.run_log import RunEventType, RunLog
from .expression import Divergence
from .similarity import SIMILARITY_COLUMNS, SimilarityReport


@dataclass(frozen=True)
class FidelityRow:
    """
    Divergences of one model's predictions against one dataset.

    Attributes:
        model: Model name
        dataset: "Train" (its own data) or "Opposite"
        velocity: Velocity histogram divergence
        microtiming: Microtiming histogram divergence
    """

    model: str
    dataset: str
    velocity: Divergence
    microtiming: Divergence

    def to_dict(self) -> Dict[str, object]:
        return {"model": self.model, "dataset": self.dataset,
                "velocity": self.velocity.to_dict(), "microtiming": self.microtiming.to_dict()}


def _cell(value: Optional[float]) -> str:
    return f"{value:>9.2f}" if value is not None else f"{'-':>9}"


def format_similarity_table(reports: Mapping[str, SimilarityReport]) -> str:
    """
    One row per model and aggregation.

    Columns: Model, Aggregation, Pitch, Onset, Duration, Absolute.
    """
    width = max([len("Model")] + [len(name) for name in reports])
    header = f"{'Model':<{width}}  {'Agg.':<8}" + "".join(f"{c.capitalize():>9}" for c in SIMILARITY_COLUMNS)
    lines = [header, "-" * len(header)]
    for name, report in reports.items():
        for aggregation, values in (("per-file", report.per_file), ("pooled", report.pooled)):
            cells = "".join(_cell(values.get(column)) for column in SIMILARITY_COLUMNS)
            lines.append(f"{name:<{width}}  {aggregation:<8}{cells}")
    return "\n".join(lines) + "\n"


def format_fidelity_table(rows: Sequence[FidelityRow]) -> str:
    """
    Velocity and microtiming divergences, one row per model and dataset.

    Lower values mean the predictions are closer to the dataset.
    """
    width = max([len("Model")] + [len(row.model) for row in rows])
    group = f"{'KL':>9}{'dMean':>9}{'dStd':>9}"
    lines = [f"{'':<{width}}  {'':<9}{'Velocity':^27}{'Microtiming':^27}",
             f"{'Model':<{width}}  {'Dataset':<9}{group}{group}"]
    lines.append("-" * len(lines[1]))
    for row in rows:
        cells = "".join(_cell(v) for d in (row.velocity, row.microtiming)
                        for v in (d.kl, d.mean_delta, d.std_delta))
        lines.append(f"{row.model:<{width}}  {row.dataset:<9}{cells}")
    return "\n".join(lines) + "\n"


def log_similarity(run_log: RunLog, reports: Mapping[str, SimilarityReport]) -> List[Dict[str, object]]:
    """Append one SIMILARITY record per model."""
    return [run_log.log(RunEventType.SIMILARITY, model=name, **report.to_dict()).to_dict()
            for name, report in reports.items()]


def log_fidelity(run_log: RunLog, rows: Sequence[FidelityRow]) -> List[Dict[str, object]]:
    """Append one FIDELITY record per row."""
    return [run_log.log(RunEventType.FIDELITY, **row.to_dict()).to_dict() for row in rows]
