"""
Run log - Machine-readable records of training and evaluation runs.

Records are appended in memory and, when a path is given, streamed to a
JSON-lines file (one object per line) so curves and metric tables can be
consumed by other tools while a run is still in progress.
"""

import json
import logging
import threading
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

logger = logging.getLogger(__name__)


class RunEventType(Enum):
    """Run event types."""
    TRAIN_STEP = "train_step"
    CHECKPOINT = "checkpoint"
    BENCH_ROW = "bench_row"
    SIMILARITY = "similarity"
    FIDELITY = "fidelity"
    CONFIG = "config"


class RunEvent:
    """
    Run Event - One record of a run.

    Holds the event type and a flat mapping of named values.
    """

    def __init__(self, event_type: RunEventType, fields: Dict[str, Any]):
        """
        Initialize run event.

        Args:
            event_type: Type of event
            fields: JSON-serializable values
        """
        self.event_type = event_type
        self.fields = dict(fields)

    def __getitem__(self, key: str) -> Any:
        return self.fields[key]

    def to_dict(self) -> Dict[str, Any]:
        """Convert event to dictionary."""
        return {"event": self.event_type.value, **self.fields}

    def to_json(self) -> str:
        """Convert event to a single JSON line."""
        return json.dumps(self.to_dict(), sort_keys=True)

    def __repr__(self) -> str:
        return f"RunEvent(type={self.event_type.value}, fields={self.fields})"


class RunLog:
    """
    Run Log - Collects run events and mirrors them to a JSON-lines file.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None, append: bool = False):
        """
        Initialize run log.

        Args:
            path: JSON-lines output file; None keeps records in memory only
            append: Continue an existing file instead of truncating it
        """
        self.path = Path(path) if path is not None else None
        self.events: List[RunEvent] = []
        self.callbacks: List[Callable[[RunEvent], None]] = []
        self.lock = threading.Lock()
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if not append:
                self.path.write_text("")

    def log(self, event_type: RunEventType, **fields: Any) -> RunEvent:
        """
        Record an event.

        Args:
            event_type: Type of event
            **fields: Values of the record

        Returns:
            The stored event
        """
        event = RunEvent(event_type, fields)
        with self.lock:
            self.events.append(event)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as handle:
                    handle.write(event.to_json() + "\n")
            for callback in self.callbacks:
                callback(event)
        return event

    def events_of(self, event_type: RunEventType) -> List[RunEvent]:
        """Events of one type, in order."""
        with self.lock:
            return [e for e in self.events if e.event_type == event_type]

    def series(self, event_type: RunEventType, key: str) -> List[Any]:
        """Values of one field across the events of one type."""
        return [e.fields[key] for e in self.events_of(event_type) if key in e.fields]

    def add_callback(self, callback: Callable[[RunEvent], None]) -> None:
        self.callbacks.append(callback)

    @staticmethod
    def read(path: Union[str, Path]) -> List[Dict[str, Any]]:
        """
        Read back a JSON-lines run log.

        Args:
            path: File written by a RunLog

        Returns:
            Records as dictionaries
        """
        records = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(json.loads(line))
        return records
