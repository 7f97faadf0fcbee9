"""Matplotlib rendering of analysis artifacts to image files.

Every figure lands next to the corresponding delimited output: spectrogram
and FFT-overlay panels from the analyze path, WER and similarity summaries
from the experiment report path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .audio_io import AudioBuffer
from .dsp import LOG_FLOOR, Spectrogram, _next_power_of_two, fft


def render_spectrogram(spec: Spectrogram, path: str | Path, title: str = "") -> Path:
    """Log-energy heat map, time along x, mel band along y."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    log_energy = np.log10(np.maximum(spec.frames, LOG_FLOOR))
    extent = [0.0, spec.frames.shape[0] * spec.frame_hop_s, 0, spec.frames.shape[1]]
    im = ax.imshow(log_energy.T, origin="lower", aspect="auto", extent=extent,
                   cmap="magma")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("mel band")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="log10 energy")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_fft_overlay(labeled: list[tuple[str, AudioBuffer]], path: str | Path,
                       title: str = "") -> Path:
    """One-sided FFT magnitudes of several signals on shared axes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    for label, buf in labeled:
        n = _next_power_of_two(len(buf.samples))
        padded = np.zeros(n)
        padded[: len(buf.samples)] = buf.samples
        spectrum = fft(padded, sample_rate_hz=buf.sample_rate_hz)
        half = n // 2 + 1
        freqs = np.arange(half) * spectrum.bin_hz
        ax.plot(freqs, np.abs(spectrum.bins[:half]), linewidth=0.6, alpha=0.8, label=label)
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("|X(f)|")
    if title:
        ax.set_title(title)
    if len(labeled) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_wer_summary(report, path: str | Path) -> Path:
    """Grouped bars of mean WER per condition, one group color per transcriber."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    conditions = report.condition_order
    transcribers = report.transcriber_order
    fig, ax = plt.subplots(figsize=(max(6, 1.1 * len(conditions)), 3.6))
    x = np.arange(len(conditions))
    width = 0.8 / max(1, len(transcribers))
    for t_idx, name in enumerate(transcribers):
        means = []
        stds = []
        for condition in conditions:
            agg = report.aggregates.get((condition, name))
            means.append(agg[0] if agg else np.nan)
            stds.append(agg[1] if agg else 0.0)
        offset = (t_idx - (len(transcribers) - 1) / 2) * width
        ax.bar(x + offset, means, width, yerr=stds, capsize=2, label=name)
    ax.set_xticks(x, conditions, rotation=30, ha="right")
    ax.set_ylabel("mean WER")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_similarity_trend(report, path: str | Path) -> Path:
    """Mean cosine similarity vs clean audio for each attack condition."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    conditions = [c for c in report.condition_order if c in report.similarity]
    means = [report.similarity[c][0] for c in conditions]
    stds = [report.similarity[c][1] for c in conditions]
    fig, ax = plt.subplots(figsize=(max(5, 0.9 * len(conditions)), 3.2))
    ax.errorbar(range(len(conditions)), means, yerr=stds, marker="o", capsize=3)
    ax.set_xticks(range(len(conditions)), conditions, rotation=30, ha="right")
    ax.set_ylabel("cosine similarity vs clean")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
