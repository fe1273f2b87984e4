"""
Standard MIDI File codec.

Parses format 0/1 files into a Score (the first track that contains notes)
and writes a Score back as a format 0 file. Only note content, the time
signature and track length are modelled; tempo, controllers, pitch bend and
SysEx are skipped.

Chunk framing is checked here so that errors carry a byte offset; the events
inside each MTrk chunk are decoded and encoded by mido.
"""

import io
import logging
import struct
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import mido
from mido.midifiles.meta import KeySignatureError
from mido.midifiles.midifiles import read_track

from ..core.errors import ConfigurationError, MidiParseError
from ..core.note_event import NoteEvent, Score

logger = logging.getLogger(__name__)

HEADER_CHUNK = b"MThd"
TRACK_CHUNK = b"MTrk"

# Failures mido raises while decoding a malformed track body
TRACK_DECODE_ERRORS = (OSError, EOFError, ValueError, KeyError, IndexError, TypeError, KeySignatureError)


class _TrackContent:
    """Notes, end tick and time signature recovered from one MTrk chunk."""

    def __init__(self):
        self.notes: List[NoteEvent] = []
        self.end_tick = 0
        self.time_signature: Optional[Tuple[int, int]] = None


def _decode_track(chunk: bytes, offset: int) -> mido.MidiTrack:
    try:
        return read_track(io.BytesIO(chunk))
    except TRACK_DECODE_ERRORS as e:
        raise MidiParseError(f"malformed track: {e}", offset) from e


def _collect_notes(track: mido.MidiTrack) -> _TrackContent:
    content = _TrackContent()
    tick = 0
    open_notes: Dict[int, Tuple[int, int]] = {}

    def close(pitch: int, at_tick: int) -> None:
        onset, velocity = open_notes.pop(pitch)
        if at_tick > onset:
            content.notes.append(NoteEvent(pitch, onset, at_tick - onset, velocity))

    for message in track:
        tick += message.time
        if message.type == "end_of_track":
            break
        if message.type == "time_signature":
            if content.time_signature is None and message.numerator > 0 and message.denominator <= 64:
                content.time_signature = (message.numerator, message.denominator)
            else:
                logger.debug("Ignoring time signature %d/%d", message.numerator, message.denominator)
        elif message.type == "note_on" and message.velocity > 0:
            if message.note in open_notes:
                close(message.note, tick)
            open_notes[message.note] = (tick, message.velocity)
        elif message.type in ("note_on", "note_off"):
            if message.note in open_notes:
                close(message.note, tick)

    content.end_tick = tick
    for pitch in sorted(open_notes):
        close(pitch, tick)
    return content


def parse_midi(data: Union[bytes, bytearray, memoryview]) -> Score:
    """
    Parse a Standard MIDI File.

    Args:
        data: Raw file bytes (format 0 or 1)

    Returns:
        Score holding the notes of the first track that contains any

    Raises:
        MidiParseError: On malformed chunks, or a malformed track body
            (reported at the offset of that track's data)
    """
    data = bytes(data)
    if len(data) < 14:
        raise MidiParseError("file shorter than a header chunk", 0)
    if data[:4] != HEADER_CHUNK:
        raise MidiParseError("missing MThd header chunk", 0)
    header_length = struct.unpack_from(">I", data, 4)[0]
    if header_length < 6:
        raise MidiParseError(f"header chunk length {header_length} is shorter than 6", 4)
    if 8 + header_length > len(data):
        raise MidiParseError("header chunk length exceeds file size", 4)
    file_format, track_count, division = struct.unpack_from(">HHH", data, 8)
    if file_format not in (0, 1):
        raise MidiParseError(f"unsupported MIDI format {file_format}", 8)
    if division & 0x8000:
        raise MidiParseError("SMPTE time division is not supported", 12)
    if division == 0:
        raise MidiParseError("ticks per quarter must be positive", 12)

    tracks: List[_TrackContent] = []
    pos = 8 + header_length
    while pos < len(data):
        if len(data) - pos < 8:
            raise MidiParseError("truncated chunk header", pos)
        chunk_id = data[pos:pos + 4]
        chunk_length = struct.unpack_from(">I", data, pos + 4)[0]
        body = pos + 8
        if body + chunk_length > len(data):
            raise MidiParseError(f"chunk length {chunk_length} exceeds file size", pos + 4)
        if chunk_id == TRACK_CHUNK:
            track = _decode_track(data[pos:body + chunk_length], body)
            tracks.append(_collect_notes(track))
        else:
            logger.debug("Skipping unknown chunk %r at offset %d", chunk_id, pos)
        pos = body + chunk_length

    if len(tracks) != track_count:
        logger.debug("Header announces %d tracks, found %d", track_count, len(tracks))

    time_signature = next((t.time_signature for t in tracks if t.time_signature), (4, 4))
    chosen = next((t for t in tracks if t.notes), tracks[0] if tracks else None)
    if chosen is None:
        return Score(division, (), 0, time_signature)
    return Score.from_notes(division, chosen.notes, chosen.end_tick, time_signature)


def _score_track(score: Score) -> mido.MidiTrack:
    # (tick, note-offs before note-ons, pitch, message)
    events: List[Tuple[int, int, int, mido.Message]] = []
    for note in score.notes:
        events.append((note.onset_ticks, 1, note.pitch,
                       mido.Message("note_on", note=note.pitch, velocity=note.velocity)))
        events.append((note.end_ticks, 0, note.pitch, mido.Message("note_off", note=note.pitch, velocity=0)))
    events.sort(key=lambda e: e[:3])

    numerator, denominator = score.time_signature
    track = mido.MidiTrack()
    track.append(mido.MetaMessage("time_signature", numerator=numerator, denominator=denominator,
                                  clocks_per_click=24, notated_32nd_notes_per_beat=8, time=0))
    last_tick = 0
    for tick, _, _, message in events:
        track.append(message.copy(time=tick - last_tick))
        last_tick = tick
    track.append(mido.MetaMessage("end_of_track", time=max(0, score.length_ticks - last_tick)))
    return track


def write_midi(score: Score) -> bytes:
    """
    Serialize a Score as a format 0 Standard MIDI File.

    Same-tick events are ordered note-offs first, then note-ons by pitch.

    Args:
        score: Valid Score

    Returns:
        File bytes; parse_midi of them returns an equal Score
    """
    if score.ticks_per_quarter >= 0x8000:
        raise ConfigurationError(f"ticks_per_quarter {score.ticks_per_quarter} does not fit a MIDI header")
    midi = mido.MidiFile(type=0, ticks_per_beat=score.ticks_per_quarter)
    midi.tracks.append(_score_track(score))
    buffer = io.BytesIO()
    midi.save(file=buffer)
    return buffer.getvalue()


def load_midi(path: Union[str, Path]) -> Score:
    """Parse a MIDI file from disk."""
    return parse_midi(Path(path).read_bytes())


def save_midi(score: Score, path: Union[str, Path]) -> Path:
    """Write a Score to disk as a format 0 MIDI file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(write_midi(score))
    return path
