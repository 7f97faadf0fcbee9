"""Quantitative instruments: word error rate, relative dB, cosine similarity.

WER comes from a full Wagner-Fisher dynamic-programming table with a
backtrace that decomposes the distance into substitutions, deletions and
insertions. dB is a mean-square power ratio in log10. Cosine similarity is
computed on raw waveforms, zero-padding the shorter one.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

import numpy as np

from .audio_io import AudioBuffer
from .errors import EmptyInputError, EmptyReferenceError, SilentSignalError


class Provenance(enum.Enum):
    REFERENCE = "reference"
    MACHINE = "machine"
    HUMAN = "human"


_NON_WORD = re.compile(r"[^a-z0-9' ]")


@dataclass(frozen=True)
class Transcript:
    """A normalized word sequence with its origin."""

    words: tuple[str, ...]
    provenance: Provenance = Provenance.REFERENCE
    audio_id: str = ""

    def __len__(self) -> int:
        return len(self.words)


def normalize_text(raw: str, provenance: Provenance = Provenance.REFERENCE,
                   audio_id: str = "") -> Transcript:
    """Lowercase, strip everything outside [a-z0-9' ], collapse whitespace.

    Apostrophes survive because contractions are lexical in English ASR
    output; all other punctuation (and newlines) becomes a word boundary.
    Idempotent.
    """
    cleaned = _NON_WORD.sub(" ", raw.lower().replace("\n", " ").replace("\t", " "))
    return Transcript(tuple(cleaned.split()), provenance, audio_id)


@dataclass(frozen=True)
class WerBreakdown:
    """Edit counts from aligning a hypothesis against a reference.

    wer = (S + D + I) / N by construction; it is not clamped and exceeds
    1.0 when insertions dominate.
    """

    substitutions: int
    deletions: int
    insertions: int
    ref_len: int

    @property
    def distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def wer(self) -> float:
        if self.ref_len == 0:
            raise EmptyReferenceError("WER undefined for an empty reference")
        return self.distance / self.ref_len


def word_edit_distance(ref: Transcript, hyp: Transcript) -> WerBreakdown:
    """Wagner-Fisher word-level edit distance with S/D/I decomposition.

    Unit costs. Backtrace ties are broken preferring substitution over
    deletion over insertion, so the decomposition is deterministic (the
    total distance is unaffected by the tie rule).
    """
    a, b = ref.words, hyp.words
    n, m = len(a), len(b)
    dist = np.zeros((n + 1, m + 1), dtype=np.int64)
    dist[:, 0] = np.arange(n + 1)
    dist[0, :] = np.arange(m + 1)
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub_cost = 0 if a[i - 1] == b[j - 1] else 1
            dist[i, j] = min(
                dist[i - 1, j - 1] + sub_cost,
                dist[i - 1, j] + 1,
                dist[i, j - 1] + 1,
            )

    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dist[i, j] == dist[i - 1, j - 1] + (a[i - 1] != b[j - 1]):
            if a[i - 1] != b[j - 1]:
                subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and dist[i, j] == dist[i - 1, j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return WerBreakdown(subs, dels, ins, n)


def wer(ref: Transcript, hyp: Transcript) -> WerBreakdown:
    """Word error rate breakdown; the reference must be non-empty."""
    if len(ref.words) == 0:
        raise EmptyReferenceError(f"empty reference for {ref.audio_id or 'transcript'}")
    return word_edit_distance(ref, hyp)


def _mean_square(samples: np.ndarray) -> float:
    return float(np.mean(np.square(samples))) if len(samples) else 0.0


def db_relative(x1: AudioBuffer, x: AudioBuffer) -> float:
    """Loudness of x1 relative to x: 10 * log10(msq(x1) / msq(x)).

    Each mean square is taken over the buffer's own length. Raises
    SilentSignalError if either signal has zero power.
    """
    p1, p0 = _mean_square(x1.samples), _mean_square(x.samples)
    if p1 == 0.0 or p0 == 0.0:
        raise SilentSignalError("relative dB undefined for silent signals")
    return 10.0 * np.log10(p1 / p0)


def cosine_similarity(a: AudioBuffer, b: AudioBuffer) -> float:
    """Cosine of the angle between the two waveforms, in [-1, 1].

    The shorter buffer is zero-padded to the longer. Raises
    SilentSignalError on zero-norm inputs.
    """
    va, vb = a.samples, b.samples
    if len(va) < len(vb):
        va = np.concatenate([va, np.zeros(len(vb) - len(va))])
    elif len(vb) < len(va):
        vb = np.concatenate([vb, np.zeros(len(va) - len(vb))])
    norm_a, norm_b = np.linalg.norm(va), np.linalg.norm(vb)
    if norm_a == 0.0 or norm_b == 0.0:
        raise SilentSignalError("cosine similarity undefined for silent signals")
    return float(np.dot(va, vb) / (norm_a * norm_b))


def mean_std(values) -> tuple[float, float]:
    """Arithmetic mean and population standard deviation (divide by n)."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        raise EmptyInputError("mean/std of an empty sequence")
    return float(arr.mean()), float(arr.std())
