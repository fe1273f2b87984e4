"""
Cadenza - PerTok tokenization with composition and performance models.

Symbolic music is encoded as score tokens (TimeShift, Pitch, Duration) and
performance tokens (Velocity, MicroShift). A transformer VAE composes
score-token variations; a masked encoder fills in the performance tokens.
"""

from .core import CadenzaError, NoteEvent, Score, Token, TokenKind
from .io import load_midi, parse_midi, save_midi, write_midi
from .tokenizer import PerTok, TokenizerConfig

__version__ = "0.1.0"

__all__ = [
    "CadenzaError",
    "NoteEvent",
    "PerTok",
    "Score",
    "Token",
    "TokenKind",
    "TokenizerConfig",
    "__version__",
    "load_midi",
    "parse_midi",
    "save_midi",
    "write_midi",
]
