"""Bit-exact reading and writing of mono 16-bit PCM WAV files.

The in-memory representation is AudioBuffer: float64 samples nominally in
[-1.0, 1.0] plus a sample rate. Reading divides raw int16 by 32768; writing
quantizes by round(s * 32768) clamped to the int16 range, so a
write -> read -> write cycle reproduces the data chunk byte for byte.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MalformedHeaderError, UnsupportedFormatError

_INT16_SCALE = 32768.0


@dataclass(frozen=True)
class AudioBuffer:
    """Mono PCM waveform with its sample rate.

    samples: 1-D float64 array, amplitudes nominally in [-1, 1] (intermediate
    processing may exceed the range; file I/O clamps).
    """

    samples: np.ndarray
    sample_rate_hz: int
    source_id: str = ""

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        if samples.ndim != 1:
            raise UnsupportedFormatError("AudioBuffer is mono: expected a 1-D sample array")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)


def duration_seconds(buf: AudioBuffer) -> float:
    """Length of the buffer in seconds."""
    return len(buf.samples) / buf.sample_rate_hz


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a RIFF/WAVE file containing 16-bit PCM mono audio.

    Unknown chunks are skipped. Raises MalformedHeaderError if the RIFF
    layout is broken, UnsupportedFormatError for anything other than
    PCM16 mono (the caller must pre-convert such files).
    """
    path = Path(path)
    raw = path.read_bytes()

    if len(raw) < 12 or raw[0:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise MalformedHeaderError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise MalformedHeaderError(f"{path}: fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise MalformedHeaderError(f"{path}: data chunk truncated")
            data = body
        # chunks are word-aligned; odd sizes carry a pad byte
        pos += 8 + chunk_size + (chunk_size & 1)

    if fmt is None or data is None:
        raise MalformedHeaderError(f"{path}: missing fmt or data chunk")

    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1 or bits != 16:
        raise UnsupportedFormatError(
            f"{path}: only PCM16 is supported (format={audio_format}, bits={bits})"
        )
    if channels != 1:
        raise UnsupportedFormatError(f"{path}: expected mono, got {channels} channels")
    if rate <= 0:
        raise MalformedHeaderError(f"{path}: non-positive sample rate")

    ints = np.frombuffer(data[: len(data) - (len(data) % 2)], dtype="<i2")
    samples = ints.astype(np.float64) / _INT16_SCALE
    return AudioBuffer(samples=samples, sample_rate_hz=rate, source_id=path.stem)


def quantize_int16(samples: np.ndarray) -> np.ndarray:
    """Map float amplitudes to int16: round(s * 32768), clamped at full scale."""
    scaled = np.rint(np.asarray(samples, dtype=np.float64) * _INT16_SCALE)
    return np.clip(scaled, -32768, 32767).astype("<i2")


def write_wav(buf: AudioBuffer, path: str | Path) -> None:
    """Write an AudioBuffer as RIFF/WAVE PCM16 mono little-endian.

    Emits exactly a 16-byte fmt chunk and a data chunk, nothing else.
    """
    if len(buf.samples) == 0:
        raise ValueError("refusing to write an empty buffer")
    payload = quantize_int16(buf.samples).tobytes()
    rate = buf.sample_rate_hz
    block_align = 2  # mono * 16 bits
    header = b"".join([
        b"RIFF",
        struct.pack("<I", 4 + 8 + 16 + 8 + len(payload)),
        b"WAVE",
        b"fmt ",
        struct.pack("<IHHIIHH", 16, 1, 1, rate, rate * block_align, block_align, 16),
        b"data",
        struct.pack("<I", len(payload)),
    ])
    Path(path).write_bytes(header + payload)
