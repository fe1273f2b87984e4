"""
Cadenza error hierarchy.

Every failure raised by the library derives from CadenzaError. Errors that
describe bad input data or configuration also derive from ValueError so
callers that only know the standard library can still catch them.
"""

from typing import Any, Optional


class CadenzaError(Exception):
    """Base class for all Cadenza errors."""


class ConfigurationError(CadenzaError, ValueError):
    """Invalid tokenizer, model or run configuration."""


class MidiParseError(CadenzaError, ValueError):
    """
    Malformed Standard MIDI File.

    Attributes:
        offset: Byte offset in the input where the problem was detected
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.reason = message
        self.offset = offset


class EncodeError(CadenzaError, ValueError):
    """A Score cannot be encoded with the given tokenizer configuration."""

    def __init__(self, message: str, note_index: Optional[int] = None, note: Any = None):
        detail = message
        if note_index is not None:
            detail = f"{message} (note #{note_index}: {note})"
        super().__init__(detail)
        self.note_index = note_index
        self.note = note


class DecodeError(CadenzaError, ValueError):
    """A token sequence violates the PerTok grammar or the vocabulary."""

    def __init__(self, message: str, token_index: Optional[int] = None):
        detail = message if token_index is None else f"{message} (token #{token_index})"
        super().__init__(detail)
        self.token_index = token_index


class SequenceLengthError(CadenzaError, ValueError):
    """Sequence longer than a model's maximum length."""


class CheckpointError(CadenzaError, ValueError):
    """Unreadable checkpoint, or checkpoint incompatible with a vocabulary."""


class SimilarityUndefinedError(CadenzaError, ValueError):
    """Similarity requested over an empty or all-zero vector."""


class CorpusError(CadenzaError, ValueError):
    """Empty or missing corpus."""
