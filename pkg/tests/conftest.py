"""Shared test helpers: synthetic signals and corpus construction."""

from pathlib import Path

import numpy as np
import pytest

from garble.audio_io import AudioBuffer, write_wav

RATE = 16000

SENTENCES = [
    "she had your dark suit in greasy wash water all year",
    "don't ask me to carry an oily rag like that",
    "the small boy put the worm on the hook",
    "a big goat idly ambled through the farmyard",
    "the bungalow was pleasantly situated near the shore",
]


def band_limited_noise(seed: int, n: int = RATE, rate: int = RATE,
                       lo_hz: float = 100.0, hi_hz: float = 3500.0,
                       peak: float = 0.4) -> AudioBuffer:
    """Seeded noise restricted to a speech-like frequency band."""
    rng = np.random.default_rng(seed)
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1.0 / rate)
    spectrum[(freqs < lo_hz) | (freqs > hi_hz)] = 0.0
    samples = np.fft.irfft(spectrum, n)
    samples *= peak / np.max(np.abs(samples))
    return AudioBuffer(samples, rate, source_id=f"noise{seed}")


def make_corpus(dir_path: Path, count: int = 5, seconds: float = 0.5) -> Path:
    """Write `count` (wav, txt) pairs of band-limited noise with fixed sentences."""
    dir_path.mkdir(parents=True, exist_ok=True)
    n = int(RATE * seconds)
    for i in range(count):
        stem = f"utt{i:02d}"
        write_wav(band_limited_noise(1000 + i, n=n), dir_path / f"{stem}.wav")
        (dir_path / f"{stem}.txt").write_text(SENTENCES[i % len(SENTENCES)] + "\n")
    return dir_path


@pytest.fixture
def corpus_dir(tmp_path):
    return make_corpus(tmp_path / "corpus")


def write_descriptor(path: Path, name: str, kind: str, command: str = "",
                     timeout_s: float = 30.0, dropout: float = 0.0) -> Path:
    lines = [f"name={name}", f"kind={kind}", f"timeout_s={timeout_s}"]
    if command:
        lines.append(f"command={command}")
    if dropout:
        lines.append(f"dropout={dropout}")
    path.write_text("\n".join(lines) + "\n")
    return path
