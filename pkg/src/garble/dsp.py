"""Signal-analysis kernels: FFT, STFT, mel spectrogram, MFCC, matrix export.

The FFT is an iterative radix-2 implementation (forward, unnormalized),
verifiable against a naive DFT. Framing defaults mirror the dominant
speech-processing choices: 25 ms frames, 10 ms hop, Hann window, 40 mel
bands, 13 cepstral coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio_io import AudioBuffer
from .errors import NotPowerOfTwoError, SignalTooShortError

FRAME_SECONDS = 0.025
HOP_SECONDS = 0.010
NUM_MEL_BANDS = 40
NUM_MFCC = 13
LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Complex FFT bins; bin_hz is the frequency step (rate / n), 0 if unknown."""

    bins: np.ndarray
    bin_hz: float = 0.0

    def __len__(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class Spectrogram:
    """Non-negative band energies, one row per analysis frame."""

    frames: np.ndarray  # [num_frames, num_bands]
    frame_hop_s: float
    band_centers_hz: np.ndarray


@dataclass(frozen=True)
class MfccFrame:
    """Exactly 13 cepstral coefficients for one frame."""

    coeffs: np.ndarray

    def __post_init__(self):
        if len(self.coeffs) != NUM_MFCC:
            raise ValueError(f"expected {NUM_MFCC} coefficients, got {len(self.coeffs)}")


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _next_power_of_two(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _fft_rows(values: np.ndarray) -> np.ndarray:
    """Radix-2 decimation-in-time FFT along the last axis (power-of-two length)."""
    n = values.shape[-1]
    out = np.ascontiguousarray(values, dtype=np.complex128)[..., _bit_reverse_indices(n)]
    out = np.ascontiguousarray(out)
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = out.reshape(-1, size)
        upper = blocks[:, :half].copy()
        lower = blocks[:, half:] * twiddle
        blocks[:, :half] = upper + lower
        blocks[:, half:] = upper - lower
        size *= 2
    return out


def fft(signal, sample_rate_hz: float = 0.0) -> Spectrum:
    """Forward unnormalized DFT: X[k] = sum_t x[t] * exp(-2*pi*i*k*t/n).

    The signal length must be a power of two; zero-pad before calling.
    """
    values = np.asarray(signal, dtype=np.complex128)
    n = len(values)
    if not _is_power_of_two(n):
        raise NotPowerOfTwoError(f"FFT length must be a power of two, got {n}")
    bin_hz = sample_rate_hz / n if sample_rate_hz else 0.0
    return Spectrum(bins=_fft_rows(values), bin_hz=bin_hz)


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window of the given length."""
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(length) / length))


def _frame_signal(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    if len(samples) < frame_len:
        raise SignalTooShortError(
            f"signal of {len(samples)} samples is shorter than one {frame_len}-sample frame"
        )
    num_frames = 1 + (len(samples) - frame_len) // hop
    offsets = np.arange(num_frames) * hop
    return samples[offsets[:, None] + np.arange(frame_len)]


def stft(buf: AudioBuffer, frame_len: int, hop: int) -> list[Spectrum]:
    """Hann-windowed hopped FFTs; trailing partial frames are dropped.

    Frames are zero-padded to the next power of two before transforming.
    """
    frames = _frame_signal(buf.samples, frame_len, hop)
    n_fft = _next_power_of_two(frame_len)
    padded = np.zeros((frames.shape[0], n_fft))
    padded[:, :frame_len] = frames * hann_window(frame_len)
    spectra = _fft_rows(padded)
    bin_hz = buf.sample_rate_hz / n_fft
    return [Spectrum(bins=row, bin_hz=bin_hz) for row in spectra]


def hz_to_mel(f: float) -> float:
    """Perceptual frequency warp: mel = 2595 * log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + f / 700.0)


def mel_to_hz(mel: float) -> float:
    """Inverse of hz_to_mel."""
    return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)


def mel_filterbank(num_bands: int, n_fft: int, sample_rate_hz: int) -> tuple[np.ndarray, np.ndarray]:
    """Triangular mel filters spanning 0 Hz to Nyquist.

    Returns (weights [num_bands, n_fft//2 + 1], band center frequencies).
    """
    nyquist = sample_rate_hz / 2.0
    mel_points = np.linspace(hz_to_mel(0.0), hz_to_mel(nyquist), num_bands + 2)
    hz_points = np.array([mel_to_hz(m) for m in mel_points])
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate_hz / n_fft)

    weights = np.zeros((num_bands, len(bin_freqs)))
    for m in range(num_bands):
        lo, center, hi = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (bin_freqs - lo) / (center - lo)
        falling = (hi - bin_freqs) / (hi - center)
        weights[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return weights, hz_points[1:-1]


def mel_spectrogram(buf: AudioBuffer, num_bands: int = NUM_MEL_BANDS) -> Spectrogram:
    """Mel-band energies of per-frame power spectra. All cells >= 0."""
    rate = buf.sample_rate_hz
    frame_len = max(2, round(rate * FRAME_SECONDS))
    hop = max(1, round(rate * HOP_SECONDS))
    n_fft = _next_power_of_two(frame_len)

    frames = _frame_signal(buf.samples, frame_len, hop)
    padded = np.zeros((frames.shape[0], n_fft))
    padded[:, :frame_len] = frames * hann_window(frame_len)
    spectra = _fft_rows(padded)
    power = np.abs(spectra[:, : n_fft // 2 + 1]) ** 2

    weights, centers = mel_filterbank(num_bands, n_fft, rate)
    energies = power @ weights.T
    return Spectrogram(frames=energies, frame_hop_s=hop / rate, band_centers_hz=centers)


def mel_to_cepstra(mel_energies: np.ndarray) -> np.ndarray:
    """DCT-II (orthonormal) of floored log mel energies, coefficients 0-12.

    mel_energies: [num_frames, num_bands]. Returns [num_frames, 13].
    """
    log_energies = np.log(np.maximum(mel_energies, LOG_FLOOR))
    num_bands = log_energies.shape[1]
    k = np.arange(NUM_MFCC)[:, None]
    m = np.arange(num_bands)[None, :]
    basis = np.cos(np.pi * k * (2 * m + 1) / (2 * num_bands))
    scale = np.full(NUM_MFCC, np.sqrt(2.0 / num_bands))
    scale[0] = np.sqrt(1.0 / num_bands)
    return log_energies @ basis.T * scale


def mfcc(buf: AudioBuffer) -> list[MfccFrame]:
    """Cepstral coefficients per analysis frame (13 each)."""
    coeffs = mel_to_cepstra(mel_spectrogram(buf).frames)
    return [MfccFrame(coeffs=row) for row in coeffs]


def write_matrix(matrix: np.ndarray, base_path: str | Path) -> tuple[Path, Path]:
    """Write any 2-D matrix as CSV plus a min-max normalized 8-bit PGM.

    base_path gets .csv and .pgm suffixes. A constant matrix maps to all
    zeros in the PGM. Returns the two paths written.
    """
    base = Path(base_path)
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = base.with_suffix(".csv")
    pgm_path = base.with_suffix(".pgm")

    np.savetxt(csv_path, matrix, fmt="%.10g", delimiter=",")

    lo, hi = float(matrix.min()), float(matrix.max())
    if hi > lo:
        pixels = np.rint((matrix - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        pixels = np.zeros(matrix.shape, dtype=np.uint8)
    height, width = pixels.shape
    with open(pgm_path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
    return csv_path, pgm_path


def export_matrix(spec: Spectrogram, base_path: str | Path) -> tuple[Path, Path]:
    """Write a spectrogram's band-energy matrix as CSV and PGM files."""
    return write_matrix(spec.frames, base_path)
