"""
Core data structures shared by every Cadenza module.

- NoteEvent, Score: tick-accurate note content
- TokenKind, Token: PerTok vocabulary elements
- Error hierarchy rooted at CadenzaError
- RunLog: JSON-lines run records
- ConfigModel: validated config base
"""

from .config_model import ConfigModel
from .errors import (
    CadenzaError,
    CheckpointError,
    ConfigurationError,
    CorpusError,
    DecodeError,
    EncodeError,
    MidiParseError,
    SequenceLengthError,
    SimilarityUndefinedError,
)
from .note_event import NoteEvent, Score
from .run_log import RunEvent, RunEventType, RunLog
from .token import BOS, EOS, MASK, PAD, Token, TokenKind, TokenSequence

__all__ = [
    "BOS",
    "CadenzaError",
    "CheckpointError",
    "ConfigModel",
    "ConfigurationError",
    "CorpusError",
    "DecodeError",
    "EOS",
    "EncodeError",
    "MASK",
    "MidiParseError",
    "NoteEvent",
    "PAD",
    "RunEvent",
    "RunEventType",
    "RunLog",
    "Score",
    "SequenceLengthError",
    "SimilarityUndefinedError",
    "Token",
    "TokenKind",
    "TokenSequence",
]
