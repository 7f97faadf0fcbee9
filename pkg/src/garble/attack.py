"""Construction of obfuscated waveforms by gain-adjusted overlay.

The core recipe: reverse the source, attenuate it by a dB offset p, and mix
it back onto the original. Precomputed perturbation files (e.g. externally
generated baseline attacks) can be overlaid the same way.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer, read_wav
from .errors import RateMismatchError


class AttackKind(enum.Enum):
    REVERSE_OVERLAY = "reverse-overlay"
    PRECOMPUTED_OVERLAY = "precomputed-overlay"


@dataclass(frozen=True)
class AttackSpec:
    """A perturbation recipe: what to overlay and how quiet to make it.

    gain_offset_db is the p in the attenuated perturbation family: the
    overlay sits p dB below the full-strength perturbation. Must lie in
    [-60, 0]; the experiments use {0, -5, -10, -15, -20}.
    """

    kind: AttackKind
    gain_offset_db: float = 0.0
    overlay_path: Path | None = None

    def __post_init__(self):
        if not (-60.0 <= self.gain_offset_db <= 0.0):
            raise ValueError(f"gain_offset_db must be in [-60, 0], got {self.gain_offset_db}")
        if self.kind is AttackKind.PRECOMPUTED_OVERLAY and self.overlay_path is None:
            raise ValueError("precomputed overlay requires overlay_path")
        if self.kind is AttackKind.REVERSE_OVERLAY and self.overlay_path is not None:
            raise ValueError("overlay_path only applies to precomputed overlays")


def reverse(x: AudioBuffer) -> AudioBuffer:
    """Time-reverse the waveform. Length, rate and power are unchanged."""
    return AudioBuffer(x.samples[::-1], x.sample_rate_hz, x.source_id)


def apply_gain_db(x: AudioBuffer, p: float) -> AudioBuffer:
    """Scale every amplitude by 10^(p/20), so mean-square power moves by p dB.

    No clamping here; values may transiently exceed 1.0 for p > 0. Clamping
    happens once, when overlaying.
    """
    if not np.isfinite(p):
        raise ValueError(f"gain must be finite, got {p}")
    factor = 10.0 ** (p / 20.0)
    return AudioBuffer(x.samples * factor, x.sample_rate_hz, x.source_id)


def overlay(x: AudioBuffer, d: AudioBuffer) -> AudioBuffer:
    """Mix d onto x: elementwise sum clamped to [-1, 1].

    d is zero-padded or truncated to the length of x; the result always has
    x's length. Raises RateMismatchError when sample rates differ.
    """
    if x.sample_rate_hz != d.sample_rate_hz:
        raise RateMismatchError(
            f"cannot overlay {d.sample_rate_hz} Hz onto {x.sample_rate_hz} Hz"
        )
    other = d.samples
    if len(other) < len(x.samples):
        other = np.concatenate([other, np.zeros(len(x.samples) - len(other))])
    elif len(other) > len(x.samples):
        other = other[: len(x.samples)]
    mixed = np.clip(x.samples + other, -1.0, 1.0)
    return AudioBuffer(mixed, x.sample_rate_hz, x.source_id)


def generate_attack(x: AudioBuffer, spec: AttackSpec) -> AudioBuffer:
    """Produce the obfuscated waveform for x under the given spec.

    Reverse-overlay: overlay(x, gain(reverse(x), p)).
    Precomputed: overlay(x, gain(read_wav(overlay_path), p)).
    """
    if len(x.samples) == 0:
        raise ValueError("cannot attack an empty buffer")
    if spec.kind is AttackKind.REVERSE_OVERLAY:
        perturbation = reverse(x)
    else:
        perturbation = read_wav(spec.overlay_path)
    return overlay(x, apply_gain_db(perturbation, spec.gain_offset_db))
