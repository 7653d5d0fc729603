"""Gain search for mixtures hitting a target A-weighted level, plus MSNR.

The mixture level factor is the difference between the mixture level and
the (normalized) source level. For each factor value the positive-sound
gain is found with an exhaustive lattice search: mixtures are built and
measured per candidate gain, and the lowest in-tolerance gain wins, which
minimizes the added energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import audio, tf
from .audio import DEFAULT_CAL_OFFSET_DB, AudioBuffer
from .concealer import Approach, concealer_magnitude, render_mixture
from .tf import StftParams


@dataclass(frozen=True)
class LevelTarget:
    """Target mixture level: source level plus a non-negative increment."""

    source_level_dba: float = 65.0
    delta_laeq_db: float = 0.0
    tolerance_db: float = 0.1

    def __post_init__(self) -> None:
        if self.delta_laeq_db < 0.0:
            raise ValueError("delta_laeq_db must be non-negative")
        if self.tolerance_db <= 0.0:
            raise ValueError("tolerance_db must be positive")

    @property
    def target_level_dba(self) -> float:
        return self.source_level_dba + self.delta_laeq_db


@dataclass(frozen=True)
class GainGrid:
    """Search lattice over the positive gain, in dB relative to the gain
    that matches the positive's level to the source level.

    The default step of 0.05 dB is half the default 0.1 dB tolerance:
    with a mixture-level slope of at most ~1 dB/dB this guarantees a
    lattice point inside any tolerance window the curve passes through.
    """

    min_gain_db: float = -60.0
    max_gain_db: float = 10.0
    step_db: float = 0.05

    def __post_init__(self) -> None:
        if self.min_gain_db >= self.max_gain_db:
            raise ValueError("min_gain_db must be below max_gain_db")
        if self.step_db <= 0.0:
            raise ValueError("step_db must be positive")

    def offsets_db(self) -> np.ndarray:
        n = int(math.floor((self.max_gain_db - self.min_gain_db) / self.step_db + 1e-9))
        return self.min_gain_db + self.step_db * np.arange(n + 1)


class UnsatisfiableGainError(Exception):
    """No lattice gain puts the mixture inside the tolerance window."""

    def __init__(
        self,
        target_level_dba: float,
        best_gain: float,
        best_level_dba: float,
    ) -> None:
        self.target_level_dba = target_level_dba
        self.best_gain = best_gain
        self.best_level_dba = best_level_dba
        self.residual_db = best_level_dba - target_level_dba
        super().__init__(
            f"no grid gain reaches {target_level_dba:.2f} dB(A); best candidate "
            f"gain {best_gain:.6g} achieves {best_level_dba:.3f} dB(A) "
            f"(residual {self.residual_db:+.3f} dB)"
        )


@dataclass(frozen=True)
class GainSolution:
    """Solved positive gain for one grid cell."""

    gain: float
    grid_offset_db: float
    positive_level_dba: float
    achieved_level_dba: float
    target_level_dba: float
    evaluations: int


class MixtureLevelEvaluator:
    """Measures the mixture level as a function of the positive gain.

    Transforms that do not depend on the gain are cached: the A-weighted
    source for the masker path, and the source/positive spectrogram
    planes for the concealer path (the STFT is linear, so scaling the
    positive scales its magnitude plane and leaves its phase untouched).
    Every level returned comes from an actually constructed mixture.
    """

    def __init__(
        self,
        source: AudioBuffer,
        positive: AudioBuffer,
        approach: Approach,
        params: StftParams = StftParams(),
        cal_offset_db: float = DEFAULT_CAL_OFFSET_DB,
    ) -> None:
        if source.sample_rate != positive.sample_rate:
            raise ValueError("sample-rate mismatch between source and positive")
        if positive.is_silent():
            raise ValueError("positive sound is all zeros")
        if source.is_silent():
            raise ValueError("source is all zeros")
        self.approach = Approach(approach)
        self.params = params
        self.cal_offset_db = cal_offset_db
        n = min(len(source), len(positive))
        self._n = n
        self._rate = source.sample_rate
        src = AudioBuffer(source.samples[:n], self._rate)
        pos = AudioBuffer(positive.samples[:n], self._rate)
        self.source_level_dba = audio.leq_dba(src, cal_offset_db)
        self.positive_ref_level_dba = audio.leq_dba(pos, cal_offset_db)
        self._weights = audio.a_weighting_amplitude(
            np.fft.rfftfreq(n, d=1.0 / self._rate)
        )
        self._source_weighted = audio.a_weight(src).samples
        if self.approach is Approach.MASKER:
            self._positive_weighted = audio.a_weight(pos).samples
        else:
            spec_s = tf.stft(src, params)
            spec_p = tf.stft(pos, params)
            self._mag_s = tf.magnitude(spec_s)
            self._mag_p = tf.magnitude(spec_p)
            with np.errstate(invalid="ignore", divide="ignore"):
                unit = np.where(self._mag_p > 0.0, spec_p.bins / self._mag_p, 1.0)
            self._phase_unit = unit

    def mixture_level_at_gain(self, positive_gain: float) -> float:
        """Build the mixture at this gain and return its level in dB(A)."""
        if self.approach is Approach.MASKER:
            mixed = self._source_weighted + positive_gain * self._positive_weighted
            mean_square = float(np.mean(np.square(mixed)))
        else:
            added = self._concealer_at_gain(positive_gain)
            spectrum = np.fft.rfft(added.samples) * self._weights
            mixed = self._source_weighted + np.fft.irfft(spectrum, n=self._n)
            mean_square = float(np.mean(np.square(mixed)))
        if mean_square <= 0.0:
            return audio.SILENCE_LEVEL_DB
        return 10.0 * math.log10(mean_square) + self.cal_offset_db

    def _concealer_at_gain(self, positive_gain: float) -> AudioBuffer:
        m_c = concealer_magnitude(
            self.approach, self._mag_s, positive_gain * self._mag_p
        )
        spec = tf.Spectrogram(m_c * self._phase_unit, self.params, self._rate, self._n)
        return tf.istft(spec)


def solve_positive_gain(
    source: AudioBuffer,
    positive: AudioBuffer,
    approach: Approach,
    target: LevelTarget,
    grid: GainGrid = GainGrid(),
    params: StftParams = StftParams(),
    cal_offset_db: float = DEFAULT_CAL_OFFSET_DB,
    exhaustive: bool = False,
    evaluator: MixtureLevelEvaluator | None = None,
) -> GainSolution:
    """Find the lowest lattice gain whose mixture hits the target window.

    The lattice is expressed in dB relative to the gain matching the
    positive to the source level. The mixture level is non-decreasing in
    the gain, so the ascending first hit can be located by bisecting the
    lattice; ``exhaustive=True`` forces the plain ascending scan instead
    (same result, used for cross-checking). The achieved level of the
    winning gain is re-measured through the public mixture-rendering
    path before it is returned.
    """
    if evaluator is None:
        evaluator = MixtureLevelEvaluator(
            source, positive, approach, params, cal_offset_db
        )
    if abs(evaluator.source_level_dba - target.source_level_dba) > 1e-3:
        raise ValueError(
            f"source measures {evaluator.source_level_dba:.3f} dB(A); normalize it "
            f"to {target.source_level_dba:.3f} dB(A) before solving"
        )
    match_gain = 10.0 ** (
        (target.source_level_dba - evaluator.positive_ref_level_dba) / 20.0
    )
    offsets = grid.offsets_db()
    gains = match_gain * 10.0 ** (offsets / 20.0)
    lower = target.target_level_dba - target.tolerance_db
    upper = target.target_level_dba + target.tolerance_db

    levels: dict[int, float] = {}

    def level_at(i: int) -> float:
        if i not in levels:
            levels[i] = evaluator.mixture_level_at_gain(float(gains[i]))
        return levels[i]

    last = len(gains) - 1
    if exhaustive:
        hit = None
        for i in range(len(gains)):
            if lower <= level_at(i) <= upper:
                hit = i
                break
    else:
        hit = _first_index_at_or_above(level_at, last, lower)
        if hit is not None and level_at(hit) > upper:
            hit = None
    if hit is None:
        best = min(levels, key=lambda i: abs(levels[i] - target.target_level_dba))
        raise UnsatisfiableGainError(
            target.target_level_dba, float(gains[best]), levels[best]
        )

    chosen = float(gains[hit])
    mixture = render_mixture(source, positive, approach, chosen, params)
    achieved = audio.leq_dba(mixture, cal_offset_db)
    # guard against representation noise between the cached and public paths
    if abs(achieved - target.target_level_dba) > target.tolerance_db + 1e-6:
        raise UnsatisfiableGainError(target.target_level_dba, chosen, achieved)
    positive_level = evaluator.positive_ref_level_dba + 20.0 * math.log10(chosen)
    return GainSolution(
        gain=chosen,
        grid_offset_db=float(offsets[hit]),
        positive_level_dba=positive_level,
        achieved_level_dba=achieved,
        target_level_dba=target.target_level_dba,
        evaluations=len(levels),
    )


def _first_index_at_or_above(level_at, last: int, threshold: float) -> int | None:
    """Smallest lattice index whose level reaches ``threshold``.

    Relies on the mixture level being non-decreasing in the gain; a
    galloping probe brackets the crossing and a bisection pins it.
    """
    if level_at(0) >= threshold:
        return 0
    if level_at(last) < threshold:
        return None
    lo = 0  # below threshold
    step = 1
    hi = None
    while True:
        probe = min(lo + step, last)
        if level_at(probe) >= threshold:
            hi = probe
            break
        lo = probe
        step *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if level_at(mid) >= threshold:
            hi = mid
        else:
            lo = mid
    return hi


def msnr_db(
    added: AudioBuffer,
    source: AudioBuffer,
    cal_offset_db: float = DEFAULT_CAL_OFFSET_DB,
) -> float:
    """Masking-sound-to-noise ratio: added-signal level minus source level.

    Positive when the added signal is louder than the noise source.
    """
    added_level = audio.leq_dba(added, cal_offset_db)
    source_level = audio.leq_dba(source, cal_offset_db)
    if added_level == audio.SILENCE_LEVEL_DB or source_level == audio.SILENCE_LEVEL_DB:
        raise ValueError("MSNR is undefined for silent signals")
    return added_level - source_level


def level_curve(
    source: AudioBuffer,
    positive: AudioBuffer,
    approach: Approach,
    grid: GainGrid = GainGrid(),
    params: StftParams = StftParams(),
    cal_offset_db: float = DEFAULT_CAL_OFFSET_DB,
) -> list[tuple[float, float]]:
    """(positive level, mixture level) pairs over the whole lattice."""
    evaluator = MixtureLevelEvaluator(source, positive, approach, params, cal_offset_db)
    match_gain = 10.0 ** ((evaluator.source_level_dba - evaluator.positive_ref_level_dba) / 20.0)
    points = []
    for offset in grid.offsets_db():
        g = match_gain * 10.0 ** (offset / 20.0)
        positive_level = evaluator.positive_ref_level_dba + 20.0 * math.log10(g)
        points.append((positive_level, evaluator.mixture_level_at_gain(g)))
    return points


def write_level_curve_csv(points, path) -> None:
    """Dump a level curve as CSV (positive_level_db, mixture_level_db)."""
    import csv
    from pathlib import Path

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["positive_level_db", "mixture_level_db"])
        for positive_level, mixture_level in points:
            writer.writerow([f"{positive_level:.6f}", f"{mixture_level:.6f}"])
