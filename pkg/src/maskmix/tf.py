"""Short-time Fourier transform with exact-length least-squares inversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .audio import AudioBuffer


class ColaViolationError(ValueError):
    """Raised when the window/hop pair cannot cover every sample."""


@dataclass(frozen=True)
class StftParams:
    """Analysis parameters. Defaults suit 44.1 kHz ambience material."""

    window_length: int = 2048
    hop: int = 512
    window: str = "hann"

    def __post_init__(self) -> None:
        if self.window_length < 2:
            raise ValueError("window_length must be at least 2")
        if not 0 < self.hop <= self.window_length:
            raise ValueError("hop must satisfy 0 < hop <= window_length")

    @property
    def n_bins(self) -> int:
        return self.window_length // 2 + 1

    def window_array(self) -> np.ndarray:
        return np.asarray(
            get_window(self.window, self.window_length, fftbins=True),
            dtype=np.float64,
        )

    def to_dict(self) -> dict:
        return {
            "window_length": self.window_length,
            "hop": self.hop,
            "window": self.window,
        }


@dataclass
class Spectrogram:
    """Complex time-frequency matrix [n_bins x n_frames] plus its context."""

    bins: np.ndarray
    params: StftParams
    sample_rate: int
    source_length: int

    def __post_init__(self) -> None:
        self.bins = np.asarray(self.bins)
        if self.bins.ndim != 2 or self.bins.shape[0] != self.params.n_bins:
            raise ValueError(
                f"expected {self.params.n_bins} frequency bins, got shape {self.bins.shape}"
            )
        if not np.all(np.isfinite(self.bins)):
            raise ValueError("spectrogram entries must be finite")

    @property
    def n_frames(self) -> int:
        return self.bins.shape[1]

    def bin_frequencies(self) -> np.ndarray:
        return np.fft.rfftfreq(self.params.window_length, d=1.0 / self.sample_rate)


def stft(buf: AudioBuffer, params: StftParams = StftParams()) -> Spectrogram:
    """Centered STFT with symmetric zero-padding at the edges."""
    x = buf.samples
    w = params.window_length
    if x.size < w:
        raise ValueError(f"buffer of {x.size} samples is shorter than one window ({w})")
    pad = w // 2
    padded = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    n_frames = 1 + (padded.size - w) // params.hop
    starts = params.hop * np.arange(n_frames)
    frames = padded[starts[:, None] + np.arange(w)[None, :]]
    frames *= params.window_array()[None, :]
    bins = np.fft.rfft(frames, axis=1).T
    return Spectrogram(bins, params, buf.sample_rate, x.size)


def istft(spec: Spectrogram) -> AudioBuffer:
    """Invert a spectrogram back to the recorded source length.

    Windowed overlap-add normalized by the summed squared window, which
    reconstructs unmodified spectrograms exactly and gives the
    least-squares signal for modified ones.
    """
    params = spec.params
    w = params.window_length
    hop = params.hop
    pad = w // 2
    window = params.window_array()
    frames = np.fft.irfft(spec.bins, n=w, axis=0)
    total = max(pad * 2 + spec.source_length, (spec.n_frames - 1) * hop + w)
    out = np.zeros(total)
    norm = np.zeros(total)
    wsq = window * window
    for k in range(spec.n_frames):
        start = k * hop
        out[start : start + w] += window * frames[:, k]
        norm[start : start + w] += wsq
    core = slice(pad, pad + spec.source_length)
    coverage = norm[core]
    peak = float(coverage.max(initial=0.0))
    if peak <= 0.0 or float(coverage.min()) < 1e-10 * peak:
        raise ColaViolationError(
            f"window {params.window!r} length {w} with hop {hop} leaves "
            "uncovered samples; use hop <= window_length/2"
        )
    return AudioBuffer(out[core] / coverage, spec.sample_rate)


def magnitude(spec: Spectrogram) -> np.ndarray:
    return np.abs(spec.bins)


def phase(spec: Spectrogram) -> np.ndarray:
    return np.angle(spec.bins)


def from_polar(
    mag: np.ndarray,
    angle: np.ndarray,
    params: StftParams,
    sample_rate: int,
    source_length: int,
    signed: bool = False,
) -> Spectrogram:
    """Assemble a spectrogram from magnitude and phase planes.

    Negative magnitudes are rejected unless ``signed`` is set, in which
    case the sign folds into a pi phase shift. The signed plane is
    non-physical and exists only to audition the subtractive
    magnitude rule that can go negative (concealer method 1).
    """
    mag = np.asarray(mag, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    if mag.shape != angle.shape:
        raise ValueError(f"shape mismatch: magnitude {mag.shape} vs phase {angle.shape}")
    if not signed and mag.size and float(mag.min()) < 0.0:
        raise ValueError("negative magnitude entries (use signed=True to fold into phase)")
    bins = mag * np.exp(1j * angle)
    return Spectrogram(bins, params, sample_rate, source_length)
