"""
File formats: Standard MIDI Files and token text.
"""

from .midi_file import load_midi, parse_midi, save_midi, write_midi
from .token_text import format_tokens, format_vocabulary, parse_tokens, read_tokens, write_tokens

__all__ = [
    "format_tokens",
    "format_vocabulary",
    "load_midi",
    "parse_midi",
    "parse_tokens",
    "read_tokens",
    "save_midi",
    "write_midi",
    "write_tokens",
]
