import math

import numpy as np
import pytest
from scipy.io import wavfile

from conftest import SR, noise, sine
from maskmix import audio
from maskmix.audio import (
    AudioBuffer,
    a_weight,
    a_weighting_db,
    gain,
    leq_dba,
    load_wav,
    mix,
    normalize_to_level,
    save_wav,
)


class TestAudioBuffer:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            AudioBuffer(np.array([0.0, np.nan]), SR)

    def test_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            AudioBuffer(np.zeros(4), 0)

    def test_rejects_2d(self):
        with pytest.raises(ValueError):
            AudioBuffer(np.zeros((4, 2)), SR)


class TestLoadSave:
    def test_ten_second_file_sample_count(self, tmp_path):
        buf = noise(0, duration_s=10.0)
        path = save_wav(buf, tmp_path / "ten.wav", "int16")
        loaded = load_wav(path)
        assert len(loaded) == 441_000
        assert loaded.sample_rate == SR

    def test_silent_file(self, tmp_path):
        path = save_wav(AudioBuffer(np.zeros(1000), SR), tmp_path / "silent.wav")
        loaded = load_wav(path)
        assert np.all(loaded.samples == 0.0)

    def test_stereo_opposite_channels_cancel(self, tmp_path):
        rng = np.random.default_rng(1)
        left = (rng.standard_normal(500) * 8000).astype(np.int16)
        stereo = np.stack([left, -left], axis=1)
        wavfile.write(str(tmp_path / "st.wav"), SR, stereo)
        loaded = load_wav(tmp_path / "st.wav")
        assert np.allclose(loaded.samples, 0.0, atol=1.0 / 32768)

    def test_stereo_downmix_is_channel_mean(self, tmp_path):
        left = np.full(100, 8000, dtype=np.int16)
        right = np.full(100, 16000, dtype=np.int16)
        wavfile.write(str(tmp_path / "st.wav"), SR, np.stack([left, right], axis=1))
        loaded = load_wav(tmp_path / "st.wav")
        assert np.allclose(loaded.samples, 12000 / 32768.0)

    def test_float32_round_trip_bit_exact(self, tmp_path):
        buf = noise(2, duration_s=0.1)
        path = save_wav(buf, tmp_path / "f32.wav", "float32")
        once = load_wav(path)
        assert np.array_equal(once.samples, buf.samples.astype(np.float32).astype(np.float64))
        path2 = save_wav(once, tmp_path / "f32b.wav", "float32")
        twice = load_wav(path2)
        assert np.array_equal(once.samples, twice.samples)

    def test_24bit_pcm(self, tmp_path):
        # hand-build a minimal 24-bit PCM file: values at +-half scale
        import struct

        frames = [0x400000, -0x400000, 0, 0x7FFFFF]
        data = b"".join(struct.pack("<i", v << 8)[1:] for v in frames)
        header = (
            b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
            + b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, SR, SR * 3, 3, 24)
            + b"data" + struct.pack("<I", len(data))
        )
        (tmp_path / "p24.wav").write_bytes(header + data)
        loaded = load_wav(tmp_path / "p24.wav")
        assert loaded.samples == pytest.approx([0.5, -0.5, 0.0, 0x7FFFFF / 0x800000], abs=1e-6)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_wav(tmp_path / "nope.wav")

    def test_corrupt_file(self, tmp_path):
        (tmp_path / "bad.wav").write_bytes(b"not a wav at all")
        with pytest.raises(ValueError):
            load_wav(tmp_path / "bad.wav")

    def test_int16_peak_safety(self, tmp_path):
        loud = AudioBuffer(np.full(100, 0.95), SR)
        with pytest.raises(ValueError, match="-1 dBFS"):
            save_wav(loud, tmp_path / "loud.wav", "int16")


class TestAWeighting:
    def test_curve_anchor_at_1khz(self):
        assert a_weighting_db(1000.0) == 0.0

    def test_curve_at_100hz_matches_analytic_table(self):
        assert a_weighting_db(100.0) == pytest.approx(-19.1, abs=0.1)

    def test_1khz_sine_rms_unchanged(self):
        buf = sine(1000.0)
        out = a_weight(buf)
        ratio_db = 20 * math.log10(
            np.sqrt(np.mean(out.samples**2)) / np.sqrt(np.mean(buf.samples**2))
        )
        assert abs(ratio_db) < 0.2

    def test_100hz_sine_attenuated(self):
        buf = sine(100.0)
        out = a_weight(buf)
        ratio_db = 20 * math.log10(
            np.sqrt(np.mean(out.samples**2)) / np.sqrt(np.mean(buf.samples**2))
        )
        assert ratio_db == pytest.approx(-19.1, abs=0.5)

    def test_zeros_stay_zero(self):
        out = a_weight(AudioBuffer(np.zeros(4096), SR))
        assert np.all(out.samples == 0.0)

    def test_linearity(self):
        x = noise(3, duration_s=0.2)
        y = noise(4, duration_s=0.2)
        both = a_weight(AudioBuffer(x.samples + y.samples, SR))
        separate = a_weight(x).samples + a_weight(y).samples
        assert np.max(np.abs(both.samples - separate)) < 1e-9

    def test_rate_too_low(self):
        with pytest.raises(ValueError):
            a_weight(AudioBuffer(np.zeros(8000), 4000))

    def test_tolerance_across_band(self):
        # digital realization vs analytic curve, 50 Hz - 16 kHz at 44.1 kHz
        for freq in (50, 100, 315, 1000, 4000, 8000, 12500, 16000):
            buf = sine(freq, duration_s=0.5)
            out = a_weight(buf)
            measured = 20 * math.log10(
                np.sqrt(np.mean(out.samples**2)) / np.sqrt(np.mean(buf.samples**2))
            )
            assert measured == pytest.approx(float(a_weighting_db(freq)), abs=0.5)


class TestLeq:
    def test_full_scale_1khz_sine(self):
        assert leq_dba(sine(1000.0), cal_offset_db=0.0) == pytest.approx(-3.01, abs=0.25)

    def test_gain_shifts_level(self):
        buf = noise(5)
        factor = 10 ** (6.02 / 20)
        assert leq_dba(gain(buf, factor)) - leq_dba(buf) == pytest.approx(6.02, abs=0.01)

    def test_gain_linearity_various(self):
        buf = noise(6)
        base = leq_dba(buf)
        for g in (0.01, 0.5, 2.0, 37.5):
            assert leq_dba(gain(buf, g)) - base == pytest.approx(
                20 * math.log10(g), abs=0.01
            )

    def test_zero_buffer_sentinel(self):
        assert leq_dba(AudioBuffer(np.zeros(1000), SR)) == float("-inf")

    def test_calibration_offset_applies(self):
        buf = noise(7)
        assert leq_dba(buf, cal_offset_db=90.0) == pytest.approx(
            leq_dba(buf, cal_offset_db=0.0) + 90.0, abs=1e-9
        )


class TestNormalize:
    def test_fixed_point(self):
        buf = noise(8)
        current = leq_dba(buf)
        out = normalize_to_level(buf, current)
        assert np.allclose(out.samples, buf.samples, rtol=1e-12)

    def test_plus_six_db_gain_factor(self):
        buf = noise(9)
        base = leq_dba(buf)
        out = normalize_to_level(buf, base + 6.02)
        factor = out.samples[100] / buf.samples[100]
        assert factor == pytest.approx(1.995, abs=0.005)

    def test_round_trip_measurement(self):
        buf = gain(noise(10), 0.001)
        out = normalize_to_level(buf, 65.0)
        assert leq_dba(out) == pytest.approx(65.0, abs=0.01)

    def test_silence_rejected(self):
        with pytest.raises(ValueError):
            normalize_to_level(AudioBuffer(np.zeros(100), SR), 65.0)


class TestMix:
    def test_additive_identity(self):
        x = noise(11)
        out = mix(x, AudioBuffer(np.zeros(len(x)), SR))
        assert np.array_equal(out.samples, x.samples)

    def test_inverse(self):
        x = noise(12)
        out = mix(x, gain(x, -1.0))
        assert np.all(out.samples == 0.0)

    def test_coherent_sum_plus_6db(self):
        x = sine(440.0, amp=0.25)
        doubled = mix(x, x)
        assert leq_dba(doubled) - leq_dba(x) == pytest.approx(6.02, abs=0.01)

    def test_commutative_associative(self):
        a, b, c = noise(13), noise(14), noise(15)
        ab = mix(a, b)
        ba = mix(b, a)
        assert np.max(np.abs(ab.samples - ba.samples)) < 1e-12
        left = mix(mix(a, b), c)
        right = mix(a, mix(b, c))
        assert np.max(np.abs(left.samples - right.samples)) < 1e-12

    def test_truncates_to_shorter(self):
        long = noise(16, duration_s=1.0)
        short = noise(17, duration_s=0.5)
        out = mix(long, short)
        assert len(out) == len(short)

    def test_rate_mismatch(self):
        with pytest.raises(ValueError):
            mix(noise(18), AudioBuffer(np.zeros(100), 48000))

    def test_no_clipping_applied(self):
        x = AudioBuffer(np.full(64, 0.8), SR)
        out = mix(x, x)
        assert np.max(out.samples) == pytest.approx(1.6)
