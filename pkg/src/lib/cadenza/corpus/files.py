"""
Corpus files: directory scanning, loading and split manifests.

A manifest is a tab-separated text file with one `path<TAB>split` line per
item, recording which file went to which split.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

from ..core.errors import CorpusError, MidiParseError
from ..core.note_event import Score
from ..io.midi_file import load_midi

logger = logging.getLogger(__name__)

MIDI_SUFFIXES = (".mid", ".midi")

ManifestEntry = Tuple[str, str]


def scan_directory(root: Union[str, Path]) -> List[Path]:
    """
    All MIDI files below a directory, sorted by path.

    Raises:
        CorpusError: If the directory does not exist
    """
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"corpus directory not found: {root}")
    paths = sorted(p for p in root.rglob("*") if p.is_file() and p.suffix.lower() in MIDI_SUFFIXES)
    logger.debug("Found %d MIDI files under %s", len(paths), root)
    return paths


def load_corpus(paths: Iterable[Union[str, Path]]) -> Dict[Path, Score]:
    """
    Parse MIDI files, skipping the ones that fail to parse.

    Returns:
        path -> Score, in input order
    """
    scores: Dict[Path, Score] = {}
    for path in paths:
        path = Path(path)
        try:
            scores[path] = load_midi(path)
        except MidiParseError as exc:
            logger.warning("Skipping %s: %s", path, exc)
    return scores


def write_manifest(path: Union[str, Path], entries: Iterable[ManifestEntry]) -> Path:
    """Write `path<TAB>split` lines."""
    path = Path(path)
    lines = []
    for item, split in entries:
        if "\t" in item or "\n" in item:
            raise CorpusError(f"manifest paths cannot contain tabs or newlines: {item!r}")
        lines.append(f"{item}\t{split}\n")
    path.write_text("".join(lines), encoding="utf-8")
    return path


def read_manifest(path: Union[str, Path]) -> List[ManifestEntry]:
    """
    Read a manifest.

    Raises:
        CorpusError: If the file is missing or a line is not `path<TAB>split`
    """
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"manifest not found: {path}")
    entries = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not all(fields):
            raise CorpusError(f"{path}:{number}: expected 'path<TAB>split'")
        entries.append((fields[0], fields[1]))
    return entries
