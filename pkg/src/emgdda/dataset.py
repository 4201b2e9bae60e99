"""Data model and JSON-lines session files.

A session file holds one or more sessions. Each session starts with a header
record and is followed by one segment record per 45 s window::

    {"kind": "header", "participant_id": "p01", "session_id": "s0", "task": "WM",
     "sample_rate_hz": 1000, "difficulty_track": [1, 1, 1, 1, 1]}
    {"kind": "segment", "window_index": 0, "channels": [[...], ... 8 lists],
     "valence": 0.4, "arousal": -0.2, "score_events": ["correct", "incorrect"]}

``valence``/``arousal`` may be ``null`` for unlabeled windows.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbiguousLabel, ParseError, SchemaError

WINDOW_SECONDS = 45
N_CHANNELS = 8
DEFAULT_SAMPLE_RATE = 1000
MIN_DIFFICULTY = 1
MAX_DIFFICULTY = 10


class Task(str, Enum):
    WM = "WM"
    EM = "EM"


class Quadrant(IntEnum):
    """Four-class affect label. Integer order is the canonical tie-break order."""

    ENERGETIC_POSITIVE = 0
    CALM_POSITIVE = 1
    ENERGETIC_NEGATIVE = 2
    CALM_NEGATIVE = 3

    @property
    def code(self) -> str:
        return _QUADRANT_CODES[self]

    @property
    def positive_valence(self) -> bool:
        return self in (Quadrant.ENERGETIC_POSITIVE, Quadrant.CALM_POSITIVE)

    @property
    def high_arousal(self) -> bool:
        return self in (Quadrant.ENERGETIC_POSITIVE, Quadrant.ENERGETIC_NEGATIVE)

    @classmethod
    def from_signs(cls, positive_valence: bool, high_arousal: bool) -> "Quadrant":
        if positive_valence:
            return cls.ENERGETIC_POSITIVE if high_arousal else cls.CALM_POSITIVE
        return cls.ENERGETIC_NEGATIVE if high_arousal else cls.CALM_NEGATIVE

    @classmethod
    def from_code(cls, code: str) -> "Quadrant":
        for q, c in _QUADRANT_CODES.items():
            if c == code or q.name == code:
                return q
        raise ValueError(f"unknown quadrant {code!r}")


_QUADRANT_CODES = {
    Quadrant.ENERGETIC_POSITIVE: "EP",
    Quadrant.CALM_POSITIVE: "CP",
    Quadrant.ENERGETIC_NEGATIVE: "EN",
    Quadrant.CALM_NEGATIVE: "CN",
}


class Site(Enum):
    """Electrode sites; member order is the channel index.

    The insert's real electrode map is unpublished, so this is a modelling
    convention: two electrodes per muscle group, left before right.
    """

    EYE_LEFT = "EyeLeft"
    EYE_RIGHT = "EyeRight"
    MOUTH_LEFT = "MouthLeft"
    MOUTH_RIGHT = "MouthRight"
    BROW_LEFT = "BrowLeft"
    BROW_RIGHT = "BrowRight"
    CORRUGATOR_LEFT = "CorrugatorLeft"
    CORRUGATOR_RIGHT = "CorrugatorRight"

    @property
    def index(self) -> int:
        return CHANNEL_SITES.index(self)

    @property
    def group(self) -> str:
        return self.name.split("_")[0].lower()


CHANNEL_SITES: tuple[Site, ...] = tuple(Site)


def channel_site(index: int) -> Site:
    if not 0 <= index < N_CHANNELS:
        raise ValueError(f"channel index {index} outside 0..{N_CHANNELS - 1}")
    return CHANNEL_SITES[index]


class ScoreEvent(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


@dataclass(frozen=True)
class AffectLabel:
    valence: float
    arousal: float

    def __post_init__(self):
        for name in ("valence", "arousal"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and -1.0 <= v <= 1.0):
                raise SchemaError(f"{name}={v!r} outside [-1, 1]")


def truncate_label(label: AffectLabel) -> Quadrant:
    """Map a continuous (valence, arousal) label onto its quadrant by sign.

    Labels sitting on either axis are rejected as ambiguous instead of being
    assigned a side.
    """
    if label.valence == 0 or label.arousal == 0:
        raise AmbiguousLabel(f"label {label} lies on an axis")
    return Quadrant.from_signs(label.valence > 0, label.arousal > 0)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EmgSegment:
    """One 45 s, 8-channel EMG window."""

    participant_id: str
    session_id: str
    task: Task
    window_index: int
    sample_rate_hz: int
    channels: np.ndarray
    label: AffectLabel | None = None

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        if not isinstance(self.window_index, (int, np.integer)) or self.window_index < 0:
            raise SchemaError(f"window_index must be a non-negative integer, got {self.window_index!r}")
        if not isinstance(self.sample_rate_hz, (int, np.integer)) or self.sample_rate_hz <= 0:
            raise SchemaError(f"sample_rate_hz must be a positive integer, got {self.sample_rate_hz!r}")
        ch = np.array(self.channels, dtype=float)
        if ch.ndim != 2 or ch.shape[0] != N_CHANNELS:
            raise SchemaError(f"expected {N_CHANNELS} channels, got shape {ch.shape}")
        expected = self.sample_rate_hz * WINDOW_SECONDS
        if ch.shape[1] != expected:
            raise SchemaError(
                f"channel length {ch.shape[1]} != sample_rate_hz * {WINDOW_SECONDS} = {expected}"
            )
        if not np.all(np.isfinite(ch)):
            raise SchemaError("non-finite samples in channels")
        object.__setattr__(self, "channels", _readonly(ch))

    @property
    def quadrant(self) -> Quadrant | None:
        """Truncated label, or None when unlabeled or ambiguous."""
        if self.label is None:
            return None
        try:
            return truncate_label(self.label)
        except AmbiguousLabel:
            return None

    def __eq__(self, other):
        if not isinstance(other, EmgSegment):
            return NotImplemented
        return (
            self.participant_id == other.participant_id
            and self.session_id == other.session_id
            and self.task == other.task
            and self.window_index == other.window_index
            and self.sample_rate_hz == other.sample_rate_hz
            and self.label == other.label
            and np.array_equal(self.channels, other.channels)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SessionLog:
    participant_id: str
    session_id: str
    task: Task
    sample_rate_hz: int
    difficulty_track: tuple[int, ...]
    segments: tuple[EmgSegment, ...]
    score_events: tuple[tuple[ScoreEvent, ...], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        object.__setattr__(self, "difficulty_track", tuple(int(d) for d in self.difficulty_track))
        object.__setattr__(self, "segments", tuple(self.segments))
        events = self.score_events or tuple(() for _ in self.segments)
        object.__setattr__(
            self, "score_events", tuple(tuple(ScoreEvent(e) for e in w) for w in events)
        )
        n = len(self.segments)
        if len(self.difficulty_track) != n:
            raise SchemaError(f"difficulty_track has {len(self.difficulty_track)} entries for {n} windows")
        if len(self.score_events) != n:
            raise SchemaError(f"score_events has {len(self.score_events)} entries for {n} windows")
        for d in self.difficulty_track:
            if not MIN_DIFFICULTY <= d <= MAX_DIFFICULTY:
                raise SchemaError(f"difficulty {d} outside [{MIN_DIFFICULTY}, {MAX_DIFFICULTY}]")
        for i, seg in enumerate(self.segments):
            if seg.window_index != i:
                raise SchemaError(f"window_index {seg.window_index} at position {i}; indices must be contiguous from 0")
            if (seg.participant_id, seg.session_id, seg.task, seg.sample_rate_hz) != (
                self.participant_id, self.session_id, self.task, self.sample_rate_hz
            ):
                raise SchemaError(f"segment {i} does not belong to session {self.session_id!r}")

    @property
    def n_windows(self) -> int:
        return len(self.segments)

    def __eq__(self, other):
        if not isinstance(other, SessionLog):
            return NotImplemented
        return (
            self.participant_id == other.participant_id
            and self.session_id == other.session_id
            and self.task == other.task
            and self.sample_rate_hz == other.sample_rate_hz
            and self.difficulty_track == other.difficulty_track
            and self.score_events == other.score_events
            and self.segments == other.segments
        )

    __hash__ = None


# --- file format -----------------------------------------------------------

_HEADER_KEYS = ("participant_id", "session_id", "task", "sample_rate_hz", "difficulty_track")
_SEGMENT_KEYS = ("window_index", "channels")


def _header_record(s: SessionLog) -> dict:
    return {
        "kind": "header",
        "participant_id": s.participant_id,
        "session_id": s.session_id,
        "task": s.task.value,
        "sample_rate_hz": s.sample_rate_hz,
        "difficulty_track": list(s.difficulty_track),
    }


def _segment_record(seg: EmgSegment, events: Sequence[ScoreEvent]) -> dict:
    return {
        "kind": "segment",
        "window_index": seg.window_index,
        "channels": seg.channels.tolist(),
        "valence": None if seg.label is None else seg.label.valence,
        "arousal": None if seg.label is None else seg.label.arousal,
        "score_events": [e.value for e in events],
    }


def save_sessions(sessions: Iterable[SessionLog], path) -> None:
    """Write sessions to a JSON-lines file (UTF-8, LF endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sessions:
            fh.write(json.dumps(_header_record(s)) + "\n")
            for seg, events in zip(s.segments, s.score_events):
                fh.write(json.dumps(_segment_record(seg, events)) + "\n")


def _finish(header: dict, records: list, header_line: int) -> SessionLog:
    segments, events = [], []
    for lineno, rec in records:
        valence, arousal = rec.get("valence"), rec.get("arousal")
        if (valence is None) != (arousal is None):
            raise SchemaError("valence and arousal must both be null or both be set", lineno)
        try:
            label = None if valence is None else AffectLabel(valence, arousal)
            segments.append(
                EmgSegment(
                    participant_id=header["participant_id"],
                    session_id=header["session_id"],
                    task=header["task"],
                    window_index=rec["window_index"],
                    sample_rate_hz=header["sample_rate_hz"],
                    channels=rec["channels"],
                    label=label,
                )
            )
            events.append(tuple(ScoreEvent(e) for e in rec.get("score_events", [])))
        except SchemaError as exc:
            raise SchemaError(str(exc), lineno) from None
        except ValueError as exc:
            raise SchemaError(str(exc), lineno) from None
    try:
        return SessionLog(
            participant_id=header["participant_id"],
            session_id=header["session_id"],
            task=header["task"],
            sample_rate_hz=header["sample_rate_hz"],
            difficulty_track=header["difficulty_track"],
            segments=segments,
            score_events=events,
        )
    except ValueError as exc:
        raise SchemaError(str(exc), header_line) from None


def load_sessions(path) -> list[SessionLog]:
    """Read and validate every session in a JSON-lines file, in file order."""
    sessions = []
    header, header_line, records = None, 0, []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(rec, dict):
                raise ParseError("record is not a JSON object", lineno)
            kind = rec.get("kind")
            if kind == "header":
                missing = [k for k in _HEADER_KEYS if k not in rec]
                if missing:
                    raise ParseError(f"header missing keys {missing}", lineno)
                if rec["task"] not in ("WM", "EM"):
                    raise SchemaError(f"unknown task {rec['task']!r}", lineno)
                if header is not None:
                    sessions.append(_finish(header, records, header_line))
                header, header_line, records = rec, lineno, []
            elif kind == "segment":
                if header is None:
                    raise ParseError("segment record before any header", lineno)
                missing = [k for k in _SEGMENT_KEYS if k not in rec]
                if missing:
                    raise ParseError(f"segment missing keys {missing}", lineno)
                records.append((lineno, rec))
            else:
                raise ParseError(f"unknown record kind {kind!r}", lineno)
    if header is not None:
        sessions.append(_finish(header, records, header_line))
    return sessions


def load_corpus(path) -> list[SessionLog]:
    """Load a single session file, or every ``*.jsonl`` file of a directory in name order."""
    path = Path(path)
    if path.is_dir():
        sessions = []
        for f in sorted(path.glob("*.jsonl")):
            sessions.extend(load_sessions(f))
        return sessions
    return load_sessions(path)


def dataset_summary(sessions: Iterable[SessionLog]) -> dict[str, dict[str, int]]:
    """Per-participant quadrant counts plus the number of ambiguous labels.

    Unlabeled windows are not counted.
    """
    table: dict[str, dict[str, int]] = {}
    for s in sessions:
        row = table.setdefault(s.participant_id, {**{q.code: 0 for q in Quadrant}, "ambiguous": 0})
        for seg in s.segments:
            if seg.label is None:
                continue
            try:
                row[truncate_label(seg.label).code] += 1
            except AmbiguousLabel:
                row["ambiguous"] += 1
    return table
