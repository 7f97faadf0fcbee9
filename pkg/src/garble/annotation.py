"""Collection of human transcriptions, mirroring the study protocol.

Each annotator is bound to exactly one obfuscation condition and receives a
fixed-size random sample of its audio files (34 by default). Submissions are
stored verbatim, append-only; normalization happens later, at analysis time.
Resubmission is allowed and the latest text wins on export.
"""

from __future__ import annotations

import datetime as _dt
import json
import logging
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateAnnotatorError,
    NoRecordsError,
    NotAssignedError,
    UnknownAnnotatorError,
    UnknownConditionError,
)

log = logging.getLogger(__name__)

ASSIGNMENT_SIZE = 34


def escape_text(text: str) -> str:
    return (
        text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_text(text: str) -> str:
    out = []
    it = iter(text)
    for ch in it:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(it, "")
        out.append({"t": "\t", "n": "\n", "r": "\r", "\\": "\\"}.get(nxt, nxt))
    return "".join(out)


def _utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass
class AnnotationSession:
    annotator_id: str
    condition_label: str
    assigned_audio_ids: list[str]
    completed: dict[str, str] = field(default_factory=dict)
    created_at: str = field(default_factory=_utc_now)


@dataclass(frozen=True)
class AnnotationRecord:
    annotator_id: str
    audio_id: str
    condition_label: str
    raw_text: str
    submitted_at: str

    def to_line(self) -> str:
        return "\t".join([
            self.annotator_id, self.audio_id, self.condition_label,
            escape_text(self.raw_text), self.submitted_at,
        ])

    @classmethod
    def from_line(cls, line: str) -> "AnnotationRecord":
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValueError(f"expected 5 tab-separated fields, got {len(parts)}")
        return cls(parts[0], parts[1], parts[2], unescape_text(parts[3]), parts[4])


class AnnotationStore:
    """Sessions plus an append-only record log, both persisted as flat files.

    Writes are serialized through one lock; each persisted line is
    self-contained, so a crash loses at most the in-flight record.
    """

    def __init__(self, conditions_dir: str | Path, records_path: str | Path, seed: int = 0):
        self.conditions_dir = Path(conditions_dir)
        self.records_path = Path(records_path)
        self.sessions_path = self.records_path.with_name(self.records_path.name + ".sessions")
        self.seed = seed
        self._lock = threading.Lock()
        self.sessions: dict[str, AnnotationSession] = {}
        self.records: list[AnnotationRecord] = []
        self._load()

    # --- persistence ---

    def _load(self) -> None:
        if self.sessions_path.exists():
            for line in self.sessions_path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                data = json.loads(line)
                session = AnnotationSession(
                    annotator_id=data["annotator_id"],
                    condition_label=data["condition_label"],
                    assigned_audio_ids=list(data["assigned_audio_ids"]),
                    created_at=data.get("created_at", ""),
                )
                self.sessions[session.annotator_id] = session
        if self.records_path.exists():
            for lineno, line in enumerate(
                    self.records_path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    record = AnnotationRecord.from_line(line)
                except ValueError:
                    # torn write from a crash: drop the line, keep the rest
                    log.warning("%s:%d: skipping malformed record line",
                                self.records_path, lineno)
                    continue
                self.records.append(record)
                session = self.sessions.get(record.annotator_id)
                if session is not None:
                    session.completed[record.audio_id] = record.raw_text

    def _append_line(self, path: Path, line: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    # --- condition catalog ---

    def conditions(self) -> list[str]:
        return sorted(p.name for p in self.conditions_dir.iterdir() if p.is_dir())

    def condition_audio_ids(self, condition: str) -> list[str]:
        return sorted(p.stem for p in (self.conditions_dir / condition).glob("*.wav"))

    def audio_path(self, annotator_id: str, audio_id: str) -> Path:
        session = self._session(annotator_id)
        return self.conditions_dir / session.condition_label / f"{audio_id}.wav"

    # --- protocol operations ---

    def create_session(self, annotator_id: str, condition: str,
                       seed: int | None = None) -> AnnotationSession:
        """Assign a seeded random sample of the condition (whole condition if small).

        The draw is fully determined by (condition, seed, annotator ordinal),
        the ordinal being how many sessions existed before this one.
        """
        with self._lock:
            if annotator_id in self.sessions:
                raise DuplicateAnnotatorError(f"annotator {annotator_id!r} already has a session")
            if condition not in self.conditions():
                raise UnknownConditionError(f"no generated condition named {condition!r}")
            audio_ids = self.condition_audio_ids(condition)
            if not audio_ids:
                raise UnknownConditionError(f"condition {condition!r} has no audio files")
            ordinal = len(self.sessions)
            rng = random.Random(f"{self.seed if seed is None else seed}:{condition}:{ordinal}")
            count = min(ASSIGNMENT_SIZE, len(audio_ids))
            assigned = rng.sample(audio_ids, count)
            session = AnnotationSession(annotator_id, condition, assigned)
            self.sessions[annotator_id] = session
            self._append_line(self.sessions_path, json.dumps({
                "annotator_id": annotator_id,
                "condition_label": condition,
                "assigned_audio_ids": assigned,
                "created_at": session.created_at,
            }))
            return session

    def _session(self, annotator_id: str) -> AnnotationSession:
        session = self.sessions.get(annotator_id)
        if session is None:
            raise UnknownAnnotatorError(f"no session for annotator {annotator_id!r}")
        return session

    def next_item(self, annotator_id: str) -> str | None:
        """First assigned audio id without a submission, or None when done."""
        session = self._session(annotator_id)
        for audio_id in session.assigned_audio_ids:
            if audio_id not in session.completed:
                return audio_id
        return None

    def submit(self, annotator_id: str, audio_id: str, raw_text: str) -> None:
        """Store one transcription verbatim; resubmission replaces on export."""
        with self._lock:
            session = self._session(annotator_id)
            if audio_id not in session.assigned_audio_ids:
                raise NotAssignedError(
                    f"audio {audio_id!r} is not assigned to annotator {annotator_id!r}"
                )
            record = AnnotationRecord(
                annotator_id, audio_id, session.condition_label, raw_text, _utc_now(),
            )
            self._append_line(self.records_path, record.to_line())
            self.records.append(record)
            session.completed[audio_id] = raw_text

    def progress(self, annotator_id: str) -> tuple[int, int]:
        session = self._session(annotator_id)
        return len(session.completed), len(session.assigned_audio_ids)

    def latest_records(self) -> list[AnnotationRecord]:
        """Deduplicated records, latest submission winning per (annotator, audio)."""
        latest: dict[tuple[str, str], AnnotationRecord] = {}
        for record in self.records:
            latest[(record.annotator_id, record.audio_id)] = record
        return list(latest.values())

    def export_records(self, out_dir: str | Path) -> Path:
        """Write the latest-wins record set as a tab-separated file; returns its path."""
        records = self.latest_records()
        if not records:
            raise NoRecordsError("no annotation records to export")
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        out_path = out_dir / "human_records.tsv"
        out_path.write_text(
            "".join(record.to_line() + "\n" for record in records), encoding="utf-8",
        )
        return out_path

    def export_text(self) -> str:
        """The latest-wins record dump as newline-delimited text."""
        records = self.latest_records()
        if not records:
            raise NoRecordsError("no annotation records to export")
        return "".join(record.to_line() + "\n" for record in records)
