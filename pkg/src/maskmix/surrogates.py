"""Synthetic stand-ins for the recorded corpus.

Desk-scale runs need deterministic audio with the right gross spectral
shapes: ventilation-like noise concentrated in the low frequencies
(optionally with a tonal component) and broadband water-like noise with a
slow amplitude flutter. Nothing here aims at realism beyond that.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .audio import AudioBuffer, save_wav

DEFAULT_SR = 44100
DEFAULT_DURATION_S = 10.0

#: Demo corpus ids: two ventilation-style sources, five water-style positives.
VENTILATION_IDS = ("ventil1", "ventil2")
WATER_IDS = ("fountain", "rain", "stream", "waterfall", "waves")


def _shaped_noise(rng: np.random.Generator, n: int, sr: int, shape_fn) -> np.ndarray:
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / sr)
    spectrum *= shape_fn(freqs)
    out = np.fft.irfft(spectrum, n=n)
    peak = np.max(np.abs(out))
    return out / peak * 0.5 if peak > 0 else out


def ventilation_noise(
    seed: int,
    duration_s: float = DEFAULT_DURATION_S,
    sample_rate: int = DEFAULT_SR,
    tone_hz: float | None = None,
) -> AudioBuffer:
    """Low-frequency weighted noise, optionally with a steady tonal whine."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))

    def shape(f):
        return 1.0 / np.sqrt(1.0 + (f / 300.0) ** 2) + 0.02

    out = _shaped_noise(rng, n, sample_rate, shape)
    if tone_hz is not None:
        t = np.arange(n) / sample_rate
        out = out + 0.08 * np.sin(2.0 * np.pi * tone_hz * t)
        out = out / np.max(np.abs(out)) * 0.5
    return AudioBuffer(out, sample_rate, label=f"ventilation(seed={seed})")


def water_noise(
    kind: str,
    seed: int,
    duration_s: float = DEFAULT_DURATION_S,
    sample_rate: int = DEFAULT_SR,
) -> AudioBuffer:
    """Broadband noise with per-kind spectral tilt and a slow flutter."""
    if kind not in WATER_IDS:
        raise ValueError(f"unknown water kind {kind!r}; choose from {WATER_IDS}")
    idx = WATER_IDS.index(kind)
    # offset keeps every stream independent of the ventilation seeds
    rng = np.random.default_rng(seed + 1000 * (idx + 1))
    n = int(round(duration_s * sample_rate))
    # per-kind emphasis: center frequency and tilt spread the five kinds out
    center = 1500.0 * (1.6**idx)
    tilt = 0.3 + 0.15 * idx

    def shape(f):
        hp = f / np.sqrt(f**2 + 200.0**2)  # thin out the lows
        bump = np.exp(-0.5 * ((np.log1p(f) - np.log1p(center)) / 1.4) ** 2)
        return hp * (0.25 + bump) * (1.0 + f / 22050.0) ** (-tilt)

    out = _shaped_noise(rng, n, sample_rate, shape)
    # slow amplitude flutter, 1..3 Hz, water-like burbling envelope
    t = np.arange(n) / sample_rate
    flutter = 1.0 + 0.25 * np.sin(2.0 * np.pi * (1.0 + 0.5 * idx) * t + idx)
    out = out * flutter
    out = out / np.max(np.abs(out)) * 0.5
    return AudioBuffer(out, sample_rate, label=f"water({kind})")


def make_demo_corpus(
    out_dir,
    seed: int = 1234,
    duration_s: float = DEFAULT_DURATION_S,
    sample_rate: int = DEFAULT_SR,
) -> dict[str, Path]:
    """Write the seven-file demo corpus and return id -> path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    buffers = {
        "ventil1": ventilation_noise(seed, duration_s, sample_rate),
        "ventil2": ventilation_noise(seed + 1, duration_s, sample_rate, tone_hz=430.0),
    }
    for kind in WATER_IDS:
        buffers[kind] = water_noise(kind, seed, duration_s, sample_rate)
    for name, buf in buffers.items():
        paths[name] = save_wav(buf, out_dir / f"{name}.wav", "float32")
    return paths
