"""Construction of masker and concealer signals and their mixtures.

A mixture "dresses up" an unwanted noise source by adding a signal built
from a commonly accepted positive sound. The masker approach adds the
(gain-scaled) positive itself; the concealer approaches add a signal whose
spectrogram magnitude complements the source, with phase taken from the
positive.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import audio, tf
from .audio import AudioBuffer
from .tf import StftParams


class Approach(str, Enum):
    MASKER = "masker"
    # magnitude = positive - source (signed, auditioning only)
    CONCEALER_1 = "concealer_1"
    # magnitude = |positive - source|
    CONCEALER_2 = "concealer_2"
    # magnitude = max(positive - source, 0); the production variant
    CONCEALER_3 = "concealer_3"

    @property
    def is_concealer(self) -> bool:
        return self is not Approach.MASKER


#: Variant used for experiment generation unless configured otherwise.
DEFAULT_APPROACH = Approach.CONCEALER_3


def concealer_magnitude(
    variant: Approach, source_mag: np.ndarray, positive_mag: np.ndarray
) -> np.ndarray:
    """Magnitude plane of the concealer from the source and positive planes.

    Comparison happens on linear magnitude. Method 1 returns a signed
    plane; methods 2 and 3 are non-negative.
    """
    variant = Approach(variant)
    m_s = np.asarray(source_mag, dtype=np.float64)
    m_p = np.asarray(positive_mag, dtype=np.float64)
    if m_s.shape != m_p.shape:
        raise ValueError(f"shape mismatch: source {m_s.shape} vs positive {m_p.shape}")
    if (m_s.size and float(m_s.min()) < 0.0) or (m_p.size and float(m_p.min()) < 0.0):
        raise ValueError("magnitude planes must be elementwise non-negative")
    if variant is Approach.CONCEALER_1:
        return m_p - m_s
    if variant is Approach.CONCEALER_2:
        return np.where(m_p >= m_s, _excess_magnitude(m_s, m_p), m_s - m_p)
    if variant is Approach.CONCEALER_3:
        return _excess_magnitude(m_s, m_p)
    raise ValueError("the masker approach has no concealer magnitude rule")


def _excess_magnitude(m_s: np.ndarray, m_p: np.ndarray) -> np.ndarray:
    """max(m_p - m_s, 0), compensated so that m_s + result reconstructs
    max(m_s, m_p) bitwise; the naive difference can be one ulp off when
    the operands span binades."""
    excess = np.maximum(m_p - m_s, 0.0)
    target = np.maximum(m_s, m_p)
    for _ in range(4):
        got = m_s + excess
        if np.array_equal(got, target):
            return excess
        excess = np.where(got > target, np.nextafter(excess, -np.inf), excess)
        excess = np.where(got < target, np.nextafter(excess, np.inf), excess)
        excess = np.maximum(excess, 0.0)
    return excess


def build_concealer(
    source: AudioBuffer,
    positive: AudioBuffer,
    variant: Approach = DEFAULT_APPROACH,
    params: StftParams = StftParams(),
) -> AudioBuffer:
    """Build the concealer signal for a source/positive pair.

    The magnitude comes from the chosen subtraction rule on the two
    spectrogram magnitudes; the phase is fixed to the positive's phase;
    the result is inverted back to the time domain.
    """
    variant = Approach(variant)
    if variant is Approach.MASKER:
        raise ValueError("build_concealer is undefined for the masker approach")
    if source.sample_rate != positive.sample_rate:
        raise ValueError(
            f"sample-rate mismatch: {source.sample_rate} vs {positive.sample_rate}"
        )
    if positive.is_silent():
        raise ValueError("positive sound is all zeros")
    n = min(len(source), len(positive))
    src = AudioBuffer(source.samples[:n], source.sample_rate, label=source.label)
    pos = AudioBuffer(positive.samples[:n], positive.sample_rate, label=positive.label)
    spec_s = tf.stft(src, params)
    spec_p = tf.stft(pos, params)
    m_c = concealer_magnitude(variant, tf.magnitude(spec_s), tf.magnitude(spec_p))
    spec_c = tf.from_polar(
        m_c,
        tf.phase(spec_p),
        params,
        src.sample_rate,
        n,
        signed=variant is Approach.CONCEALER_1,
    )
    out = tf.istft(spec_c)
    out.label = f"concealer({source.label},{positive.label})"
    return out


def build_mixture(source: AudioBuffer, added: AudioBuffer) -> AudioBuffer:
    """Time-domain sum of the source and the added (masking) signal."""
    return audio.mix(source, added)


def render_mixture(
    source: AudioBuffer,
    positive: AudioBuffer,
    approach: Approach,
    positive_gain: float,
    params: StftParams = StftParams(),
) -> AudioBuffer:
    """Full mixture for an approach at a given linear positive gain.

    The gain is applied to the positive before concealer construction:
    the concealer magnitude depends nonlinearly on the positive level, so
    it is rebuilt per gain.
    """
    approach = Approach(approach)
    scaled = audio.gain(positive, positive_gain)
    if approach is Approach.MASKER:
        return build_mixture(source, scaled)
    return build_mixture(source, build_concealer(source, scaled, approach, params))
