"""Score aggregation, significance tests, trends, and spectral features."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import tf
from .audio import AudioBuffer
from .tf import StftParams


def aggregate(rows: list[dict], group_by: list[str]) -> list[dict]:
    """Mean, standard error and count of ``score`` per factor group.

    Row order does not matter; single-row groups report no SE.
    """
    if not rows:
        raise ValueError("no rows to aggregate")
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        key = tuple(str(row[k]) for k in group_by)
        groups.setdefault(key, []).append(float(row["score"]))
    out = []
    for key in sorted(groups):
        values = groups[key]
        n = len(values)
        # fsum keeps the result independent of row order
        mean = math.fsum(values) / n
        if n > 1:
            sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
            se = sd / math.sqrt(n)
        else:
            se = None
        entry = dict(zip(group_by, key))
        entry.update({"mean": mean, "se": se, "n": n})
        out.append(entry)
    return out


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p: float


def welch_t_test(a, b) -> WelchResult:
    """Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two observations")
    var_a = float(a.var(ddof=1))
    var_b = float(b.var(ddof=1))
    if var_a == 0.0 and var_b == 0.0:
        if float(a.mean()) == float(b.mean()):
            return WelchResult(0.0, float(a.size + b.size - 2), 1.0)
        raise ValueError("both samples are degenerate (zero variance)")
    sa = var_a / a.size
    sb = var_b / b.size
    t = (float(a.mean()) - float(b.mean())) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (a.size - 1) + sb**2 / (b.size - 1))
    p = 2.0 * float(stats.t.sf(abs(t), df))
    return WelchResult(t, df, p)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(points) -> LinearFit:
    """Ordinary least squares over (x, y) pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.all(x == x[0]):
        raise ValueError("all x values identical; slope undefined")
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LinearFit(float(slope), float(intercept), r2)


@dataclass(frozen=True)
class SpectralFeatures:
    entropy: float
    centroid_hz: float
    bandwidth_hz: float
    contrast_db: float
    flatness: float


_MAG_FLOOR = 1e-30


def spectral_features(
    buf: AudioBuffer,
    params: StftParams = StftParams(),
    contrast_bands: int = 6,
    contrast_fmin_hz: float = 200.0,
) -> SpectralFeatures:
    """Summary features of the mean magnitude spectrum over STFT frames.

    flatness: geometric over arithmetic mean of the magnitudes, 1 only
    for a flat spectrum; centroid/bandwidth: magnitude-weighted mean
    frequency and spread; contrast: mean peak-minus-valley in dB over
    octave-spaced sub-bands; entropy: Shannon entropy of the normalized
    mean power spectrum, scaled to [0, 1] by the log bin count.
    """
    if buf.is_silent():
        raise ValueError("spectral features are undefined for silence")
    spec = tf.stft(buf, params)
    mags = tf.magnitude(spec)
    mags = _interior_frames(mags, params, len(buf))
    mean_mag = mags.mean(axis=1)
    mean_power = np.square(mags).mean(axis=1)
    freqs = spec.bin_frequencies()

    total = float(mean_mag.sum())
    centroid = float((freqs * mean_mag).sum() / total)
    bandwidth = float(np.sqrt(((freqs - centroid) ** 2 * mean_mag).sum() / total))

    log_mean = float(np.mean(np.log(np.maximum(mean_mag, _MAG_FLOOR))))
    flatness = min(math.exp(log_mean) / float(mean_mag.mean()), 1.0)

    contrasts = []
    for k in range(contrast_bands):
        lo = contrast_fmin_hz * 2.0**k
        hi = contrast_fmin_hz * 2.0 ** (k + 1)
        band = mean_mag[(freqs >= lo) & (freqs < hi)]
        if band.size < 2:
            continue
        peak = float(band.max())
        valley = max(float(band.min()), _MAG_FLOOR)
        contrasts.append(20.0 * math.log10(max(peak, _MAG_FLOOR) / valley))
    contrast = float(np.mean(contrasts)) if contrasts else 0.0

    p = mean_power / float(mean_power.sum())
    nonzero = p[p > 0.0]
    entropy = float(-(nonzero * np.log(nonzero)).sum() / math.log(p.size))

    return SpectralFeatures(entropy, centroid, bandwidth, contrast, flatness)


def _interior_frames(mags: np.ndarray, params: StftParams, n_samples: int) -> np.ndarray:
    """Drop frames that overlap the centered zero padding; they measure
    the padding, not the sound. Short signals keep everything."""
    pad = params.window_length // 2
    starts = params.hop * np.arange(mags.shape[1])
    inside = (starts >= pad) & (starts + params.window_length <= pad + n_samples)
    return mags[:, inside] if inside.any() else mags


def export_csv(rows: list[dict], path, columns: list[str] | None = None) -> Path:
    """Write dict rows to CSV with a stable column order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt_cell(row.get(k)) for k in columns})
    return path


def _fmt_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.8g}"
    return value


def load_score_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
