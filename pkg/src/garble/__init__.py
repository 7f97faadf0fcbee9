"""Speech obfuscation workbench.

Generates reverse-overlay obfuscated audio, measures distortion and
transcription damage (relative dB, WER, cosine similarity, spectral
analysis), drives external speech-to-text engines in a batch harness, and
collects human transcriptions through an annotation service.
"""

from .audio_io import AudioBuffer, duration_seconds, read_wav, write_wav
from .attack import AttackKind, AttackSpec, apply_gain_db, generate_attack, overlay, reverse
from .metrics import (
    Provenance,
    Transcript,
    WerBreakdown,
    cosine_similarity,
    db_relative,
    mean_std,
    normalize_text,
    wer,
    word_edit_distance,
)

__all__ = [
    "AudioBuffer",
    "AttackKind",
    "AttackSpec",
    "Provenance",
    "Transcript",
    "WerBreakdown",
    "apply_gain_db",
    "cosine_similarity",
    "db_relative",
    "duration_seconds",
    "generate_attack",
    "mean_std",
    "normalize_text",
    "overlay",
    "read_wav",
    "reverse",
    "wer",
    "word_edit_distance",
    "write_wav",
]

__version__ = "0.1.0"
