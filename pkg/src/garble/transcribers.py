"""Uniform access to transcription sources.

External speech-to-text engines are driven as subprocesses through a command
template and deliver their transcript on standard output; a deterministic
mock (reference echo with seeded word dropout) exists to exercise the
harness without any engine installed.
"""

from __future__ import annotations

import enum
import random
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    CommandFailedError,
    DescriptorInvalidError,
    EmptyReferenceError,
    MissingFixtureError,
    TranscriberTimeoutError,
)
from .metrics import Provenance, Transcript, normalize_text


class TranscriberKind(enum.Enum):
    EXTERNAL_COMMAND = "external-command"
    MOCK = "mock"


@dataclass(frozen=True)
class TranscriberDescriptor:
    """One transcription engine: how to invoke it and how long to wait.

    command_template must contain the `{input}` placeholder exactly once
    (external commands only). Mocks carry a word-dropout rate instead.
    """

    name: str
    kind: TranscriberKind
    command_template: str = ""
    timeout_s: float = 60.0
    dropout: float = 0.0

    def __post_init__(self):
        if not self.name:
            raise DescriptorInvalidError("transcriber needs a name")
        if self.timeout_s <= 0:
            raise DescriptorInvalidError(f"timeout_s must be positive, got {self.timeout_s}")
        if self.kind is TranscriberKind.EXTERNAL_COMMAND:
            if self.command_template.count("{input}") != 1:
                raise DescriptorInvalidError(
                    f"{self.name}: command template must contain {{input}} exactly once"
                )
        if not (0.0 <= self.dropout <= 1.0):
            raise DescriptorInvalidError(f"{self.name}: dropout must be in [0, 1]")


def parse_descriptor(path: str | Path) -> TranscriberDescriptor:
    """Read a flat key=value descriptor file (name, kind, command, timeout_s)."""
    fields: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DescriptorInvalidError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()

    kind_label = fields.get("kind", "").lower()
    try:
        kind = TranscriberKind(kind_label)
    except ValueError:
        raise DescriptorInvalidError(
            f"{path}: kind must be 'external-command' or 'mock', got {kind_label!r}"
        ) from None
    return TranscriberDescriptor(
        name=fields.get("name", ""),
        kind=kind,
        command_template=fields.get("command", ""),
        timeout_s=float(fields.get("timeout_s", "60")),
        dropout=float(fields.get("dropout", "0")),
    )


def _mock_transcribe(desc: TranscriberDescriptor, stem: str,
                     fixtures: dict[str, str], seed: int) -> str:
    if stem not in fixtures:
        raise MissingFixtureError(f"{desc.name}: no fixture for audio {stem!r}")
    text = fixtures[stem]
    if desc.dropout == 0.0:
        return text
    rng = random.Random(f"{seed}:{desc.name}:{stem}")
    kept = [w for w in text.split() if rng.random() >= desc.dropout]
    return " ".join(kept)


def transcribe(desc: TranscriberDescriptor, audio_path: str | Path,
               fixtures: dict[str, str] | None = None, seed: int = 0) -> str:
    """Run one transcriber on one audio file; returns the raw transcript text.

    External commands get `{input}` replaced by the audio path and their
    standard output captured. Mocks look up the file stem in `fixtures`
    (reference texts) and apply seeded word dropout.
    """
    audio_path = Path(audio_path)
    if desc.kind is TranscriberKind.MOCK:
        return _mock_transcribe(desc, audio_path.stem, fixtures or {}, seed)

    argv = [arg.replace("{input}", str(audio_path)) for arg in shlex.split(desc.command_template)]
    try:
        proc = subprocess.run(
            argv, capture_output=True, text=True, timeout=desc.timeout_s, check=False,
        )
    except subprocess.TimeoutExpired:
        raise TranscriberTimeoutError(
            f"{desc.name}: timed out after {desc.timeout_s}s on {audio_path.name}"
        ) from None
    except OSError as exc:
        raise CommandFailedError(f"{desc.name}: {exc}") from exc
    if proc.returncode != 0:
        raise CommandFailedError(
            f"{desc.name}: exit {proc.returncode} on {audio_path.name}",
            returncode=proc.returncode,
            stderr=proc.stderr,
        )
    return proc.stdout


def load_reference(path: str | Path) -> Transcript:
    """Load a reference transcript file into a normalized Transcript.

    Sample-indexed transcripts (two leading non-negative integers, as in
    the TIMIT corpus .TXT files) have the indices stripped; requiring BOTH
    leading tokens to be integers avoids clipping sentences that merely
    start with a number.
    """
    path = Path(path)
    raw = path.read_text(encoding="utf-8")
    tokens = raw.split()
    if len(tokens) >= 2 and tokens[0].isdigit() and tokens[1].isdigit():
        raw = " ".join(tokens[2:])
    transcript = normalize_text(raw, Provenance.REFERENCE, audio_id=path.stem)
    if len(transcript.words) == 0:
        raise EmptyReferenceError(f"{path}: no words after normalization")
    return transcript
