import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SR, noise, sine
from maskmix.audio import AudioBuffer
from maskmix.tf import (
    ColaViolationError,
    Spectrogram,
    StftParams,
    from_polar,
    istft,
    magnitude,
    phase,
    stft,
)


def rel_rms(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((a - b) ** 2)) / (np.sqrt(np.mean(b**2)) + 1e-300))


class TestParams:
    def test_defaults(self):
        p = StftParams()
        assert (p.window_length, p.hop, p.window) == (2048, 512, "hann")
        assert p.n_bins == 1025

    def test_hop_bounds(self):
        with pytest.raises(ValueError):
            StftParams(hop=0)
        with pytest.raises(ValueError):
            StftParams(window_length=256, hop=512)


class TestRoundTrip:
    def test_noise_round_trip(self):
        buf = noise(0, duration_s=0.7)
        out = istft(stft(buf))
        assert len(out) == len(buf)
        assert rel_rms(out.samples, buf.samples) < 1e-6

    def test_awkward_length(self):
        buf = AudioBuffer(np.random.default_rng(1).standard_normal(2048 + 517), SR)
        out = istft(stft(buf))
        assert rel_rms(out.samples, buf.samples) < 1e-6

    @settings(max_examples=25, deadline=None)
    @given(
        n_extra=st.integers(min_value=0, max_value=3000),
        window_length=st.sampled_from([256, 512, 1024]),
        hop_divisor=st.sampled_from([2, 4, 8]),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_round_trip_property(self, n_extra, window_length, hop_divisor, seed):
        params = StftParams(window_length, window_length // hop_divisor)
        samples = np.random.default_rng(seed).standard_normal(window_length + n_extra)
        buf = AudioBuffer(samples, SR)
        out = istft(stft(buf, params))
        assert rel_rms(out.samples, buf.samples) < 1e-6


class TestStft:
    def test_zeros(self):
        spec = stft(AudioBuffer(np.zeros(8192), SR))
        assert np.all(spec.bins == 0.0)

    def test_too_short(self):
        with pytest.raises(ValueError):
            stft(AudioBuffer(np.zeros(100), SR))

    def test_impulse_at_frame_center_is_flat(self):
        params = StftParams()
        x = np.zeros(8192)
        # original index 2*hop sits at the center of frame 2 after padding
        x[2 * params.hop] = 1.0
        spec = stft(AudioBuffer(x, SR), params)
        mags = np.abs(spec.bins[:, 2])
        center_weight = params.window_array()[params.window_length // 2]
        assert np.allclose(mags, center_weight, atol=1e-12)

    def test_sine_peak_bin(self):
        spec = stft(sine(1000.0))
        mean_mag = np.abs(spec.bins).mean(axis=1)
        assert int(np.argmax(mean_mag)) == 46  # round(1000 * 2048 / 44100)

    def test_parseval_per_frame(self):
        # full-spectrum energy of each frame equals W times the windowed
        # frame energy; dual-route check against independent framing
        params = StftParams(512, 128)
        buf = noise(3, duration_s=0.2)
        spec = stft(buf, params)
        w = params.window_array()
        pad = params.window_length // 2
        padded = np.concatenate([np.zeros(pad), buf.samples, np.zeros(pad)])
        full = np.abs(spec.bins[0]) ** 2 + np.abs(spec.bins[-1]) ** 2
        full = full + 2 * (np.abs(spec.bins[1:-1]) ** 2).sum(axis=0)
        for k in range(spec.n_frames):
            frame = padded[k * params.hop : k * params.hop + params.window_length] * w
            assert full[k] == pytest.approx(
                params.window_length * float(np.sum(frame**2)), rel=1e-6, abs=1e-12
            )


class TestIstft:
    def test_zero_spectrogram(self):
        params = StftParams()
        spec = Spectrogram(np.zeros((params.n_bins, 10), dtype=complex), params, SR, 4000)
        assert np.all(istft(spec).samples == 0.0)

    def test_halved_magnitude_halves_signal(self):
        buf = noise(4, duration_s=0.3)
        spec = stft(buf)
        half = from_polar(magnitude(spec) * 0.5, phase(spec), spec.params, SR, len(buf))
        out = istft(half)
        assert rel_rms(out.samples, buf.samples * 0.5) < 1e-3

    def test_cola_violation(self):
        params = StftParams(window_length=512, hop=512, window="hann")
        buf = noise(5, duration_s=0.1)
        spec = stft(buf, params)
        with pytest.raises(ColaViolationError):
            istft(spec)


class TestPolar:
    def test_identity(self):
        spec = stft(noise(6, duration_s=0.2))
        rebuilt = from_polar(
            magnitude(spec), phase(spec), spec.params, SR, spec.source_length
        )
        assert np.max(np.abs(rebuilt.bins - spec.bins)) < 1e-12

    def test_real_positive_bins_have_zero_phase(self):
        params = StftParams(256, 64)
        bins = np.full((params.n_bins, 3), 2.0, dtype=complex)
        spec = Spectrogram(bins, params, SR, 256)
        assert np.all(phase(spec) == 0.0)

    def test_unit_magnitude_pi_phase(self):
        params = StftParams(256, 64)
        mag = np.zeros((params.n_bins, 2))
        ang = np.zeros((params.n_bins, 2))
        mag[10, 1] = 1.0
        ang[10, 1] = np.pi
        spec = from_polar(mag, ang, params, SR, 256)
        assert spec.bins[10, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_negative_magnitude_rejected(self):
        params = StftParams(256, 64)
        mag = np.full((params.n_bins, 2), -1.0)
        with pytest.raises(ValueError, match="negative magnitude"):
            from_polar(mag, np.zeros_like(mag), params, SR, 256)

    def test_signed_variant_folds_sign(self):
        params = StftParams(256, 64)
        mag = np.full((params.n_bins, 2), -1.0)
        spec = from_polar(mag, np.zeros_like(mag), params, SR, 256, signed=True)
        assert np.allclose(spec.bins.real, -1.0)

    def test_shape_mismatch(self):
        params = StftParams(256, 64)
        with pytest.raises(ValueError, match="shape"):
            from_polar(
                np.zeros((params.n_bins, 2)), np.zeros((params.n_bins, 3)), params, SR, 256
            )
