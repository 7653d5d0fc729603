"""Mono audio buffers: WAV I/O, A-weighted level measurement, gain, mixing.

All levels are A-weighted equivalent levels. Digital levels are referenced
to full scale (dBFS(A)); a single calibration offset per run maps them to
acoustic dB(A). The default anchor places 65 dB(A) at -25 dBFS(A), so any
relative level arithmetic is independent of the anchor choice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.io import wavfile

#: Acoustic level corresponding to 0 dBFS(A): 65 dB(A) target == -25 dBFS(A).
DEFAULT_CAL_OFFSET_DB = 90.0

#: Sentinel level for all-zero buffers.
SILENCE_LEVEL_DB = float("-inf")

#: Peak ceiling enforced when exporting 16-bit PCM (-1 dBFS safety margin).
INT16_PEAK_CEILING = 10.0 ** (-1.0 / 20.0)


@dataclass
class AudioBuffer:
    """Mono PCM signal with linear full-scale +-1.0 sample amplitudes."""

    samples: np.ndarray
    sample_rate: int
    label: str = ""

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer samples must be one-dimensional")
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("AudioBuffer samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be a positive integer")
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate

    def is_silent(self) -> bool:
        return bool(np.all(self.samples == 0.0))


# IEC 61672 analog A-weighting pole frequencies (Hz).
_F1 = 20.598997
_F2 = 107.65265
_F3 = 737.86223
_F4 = 12194.217


def _a_response_raw(freq_hz: np.ndarray) -> np.ndarray:
    f2 = np.square(np.asarray(freq_hz, dtype=np.float64))
    num = (_F4**2) * f2 * f2
    den = (f2 + _F1**2) * np.sqrt((f2 + _F2**2) * (f2 + _F3**2)) * (f2 + _F4**2)
    return np.where(f2 > 0.0, num / den, 0.0)


# Normalize so the weighting is exactly 0 dB at 1 kHz.
_A1000 = float(_a_response_raw(np.asarray(1000.0)))


def a_weighting_amplitude(freq_hz) -> np.ndarray:
    """Linear-amplitude A-weighting response, 1.0 at 1 kHz, 0.0 at DC."""
    return _a_response_raw(np.asarray(freq_hz, dtype=np.float64)) / _A1000


def a_weighting_db(freq_hz) -> np.ndarray:
    """A-weighting response in dB (e.g. about -19.1 dB at 100 Hz)."""
    amp = a_weighting_amplitude(freq_hz)
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(amp)


def a_weight(buf: AudioBuffer) -> AudioBuffer:
    """Apply the IEC 61672 A-weighting curve to a signal.

    Realized as zero-phase multiplication of the signal spectrum by the
    analytic response, which matches the curve exactly at every bin and
    keeps the operation strictly linear. Output has the same length and
    sample rate as the input.
    """
    if buf.sample_rate < 8000:
        raise ValueError(
            f"sample rate {buf.sample_rate} Hz too low to apply A-weighting"
        )
    if buf.samples.size == 0:
        raise ValueError("cannot weight an empty buffer")
    n = buf.samples.size
    spectrum = np.fft.rfft(buf.samples)
    freqs = np.fft.rfftfreq(n, d=1.0 / buf.sample_rate)
    weighted = np.fft.irfft(spectrum * a_weighting_amplitude(freqs), n=n)
    return AudioBuffer(weighted, buf.sample_rate, label=buf.label)


def leq_dba(buf: AudioBuffer, cal_offset_db: float = DEFAULT_CAL_OFFSET_DB) -> float:
    """A-weighted equivalent level of a buffer in dB(A).

    Computed as 10*log10(mean(a_weight(buf)^2)) plus the calibration
    offset. An all-zero buffer yields the ``-inf`` sentinel.
    """
    if buf.samples.size == 0:
        raise ValueError("cannot measure an empty buffer")
    if buf.is_silent():
        return SILENCE_LEVEL_DB
    weighted = a_weight(buf).samples
    mean_square = float(np.mean(np.square(weighted)))
    if mean_square <= 0.0:
        return SILENCE_LEVEL_DB
    return 10.0 * math.log10(mean_square) + cal_offset_db


def gain(buf: AudioBuffer, factor: float) -> AudioBuffer:
    """Scale a buffer by a linear gain factor."""
    if not math.isfinite(factor):
        raise ValueError("gain factor must be finite")
    return AudioBuffer(buf.samples * factor, buf.sample_rate, label=buf.label)


def normalize_to_level(
    buf: AudioBuffer,
    target_dba: float,
    cal_offset_db: float = DEFAULT_CAL_OFFSET_DB,
) -> AudioBuffer:
    """Apply the scalar gain that brings the buffer to ``target_dba``."""
    current = leq_dba(buf, cal_offset_db)
    if current == SILENCE_LEVEL_DB:
        raise ValueError("cannot normalize an all-zero buffer")
    factor = 10.0 ** ((target_dba - current) / 20.0)
    return gain(buf, factor)


def mix(a: AudioBuffer, b: AudioBuffer) -> AudioBuffer:
    """Sample-wise sum of two buffers.

    Length mismatch truncates to the shorter signal. The sum may exceed
    +-1.0; headroom is only enforced at 16-bit export.
    """
    if a.sample_rate != b.sample_rate:
        raise ValueError(
            f"sample-rate mismatch: {a.sample_rate} vs {b.sample_rate}"
        )
    n = min(a.samples.size, b.samples.size)
    label = a.label or b.label
    return AudioBuffer(a.samples[:n] + b.samples[:n], a.sample_rate, label=label)


def load_wav(path) -> AudioBuffer:
    """Load a PCM WAV file as a mono float buffer scaled to +-1.0.

    Accepts 1- or 2-channel files with 16/24-bit integer, 32-bit float,
    or 8-bit unsigned samples; stereo is downmixed by channel mean.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    try:
        rate, data = wavfile.read(str(path))
    except ValueError as exc:
        raise ValueError(f"unsupported or corrupt WAV file {path}: {exc}") from exc
    if data.size == 0:
        raise ValueError(f"zero-length audio in {path}")
    if data.ndim == 2 and data.shape[1] > 2:
        raise ValueError(f"{path}: only mono or stereo files are supported")
    samples = _to_float(data)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return AudioBuffer(samples, int(rate), label=path.stem)


def _to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.float32 or data.dtype == np.float64:
        return data.astype(np.float64)
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype == np.int32:
        # scipy stores 24-bit PCM left-justified in int32
        return data.astype(np.float64) / 2147483648.0
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    raise ValueError(f"unsupported WAV sample format {data.dtype}")


def save_wav(buf: AudioBuffer, path, sample_format: str = "float32") -> Path:
    """Write a buffer to disk as 32-bit float (lossless) or 16-bit PCM.

    16-bit export enforces a -1 dBFS peak ceiling and raises if the
    signal would clip it.
    """
    path = Path(path)
    if sample_format == "float32":
        data = buf.samples.astype(np.float32)
    elif sample_format == "int16":
        peak = float(np.max(np.abs(buf.samples))) if buf.samples.size else 0.0
        if peak > INT16_PEAK_CEILING:
            raise ValueError(
                f"peak {peak:.4f} exceeds the -1 dBFS ceiling for 16-bit export"
            )
        data = np.round(buf.samples * 32767.0).astype(np.int16)
    else:
        raise ValueError(f"unknown sample format {sample_format!r}")
    path.parent.mkdir(parents=True, exist_ok=True)
    wavfile.write(str(path), buf.sample_rate, data)
    return path
