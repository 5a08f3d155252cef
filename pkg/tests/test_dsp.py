import numpy as np
import pytest

from audioera import (
    ConfigurationError,
    a_weight_gain,
    a_weighted_rms,
    hz_to_mel,
    mel_filterbank,
    mfcc,
    rms_series,
    stft_power,
)
from audioera.dsp import frame_signal, hann_window

from conftest import SR, clip_of, tone


# ---------------------------------------------------------------------------
# stft_power
# ---------------------------------------------------------------------------

def test_stft_shape_10s_defaults(sine_440_10s):
    spec = stft_power(sine_440_10s)
    assert spec.values.shape == (1025, 431)  # 1 + floor(220500 / 512), 2048/2 + 1
    assert spec.bin_freqs[1] == pytest.approx(SR / 2048)


def test_stft_zero_clip_is_zero():
    spec = stft_power(clip_of(np.zeros(SR)))
    assert np.all(spec.values == 0.0)


def test_stft_empty_clip_rejected():
    with pytest.raises(ValueError):
        stft_power(clip_of(np.array([])))


def test_stft_matches_brute_force_windowed_dft_and_concentrates():
    # oracle: explicit windowed DFT of one interior frame
    f_bin64 = 64 * SR / 2048
    clip = clip_of(tone(f_bin64, 1.0))
    spec = stft_power(clip)
    frames = frame_signal(clip.samples, 2048, 512)
    window = hann_window(2048)
    n = np.arange(2048)
    t = 10  # interior frame
    k = np.arange(1025)
    dft = (window * frames[t]) @ np.exp(-2j * np.pi * np.outer(n, k) / 2048)
    oracle_power = np.abs(dft) ** 2
    scale = oracle_power.max()
    assert np.allclose(spec.values[:, t], oracle_power, rtol=1e-6, atol=1e-6 * scale)

    # >= 95% of interior frames' total power in bins 63..65
    interior = spec.values[:, 3:-3]
    share = interior[63:66].sum(axis=0) / interior.sum(axis=0)
    assert np.all(share >= 0.95)


def test_stft_parseval_against_windowed_frame_energy():
    rng = np.random.default_rng(11)
    clip = clip_of(rng.uniform(-0.8, 0.8, size=SR))
    spec = stft_power(clip)
    frames = frame_signal(clip.samples, 2048, 512)
    window = hann_window(2048)
    doubling = np.full(1025, 2.0)
    doubling[0] = doubling[-1] = 1.0
    spectral = doubling @ spec.values
    time_domain = 2048.0 * np.sum((frames * window) ** 2, axis=1)
    assert np.allclose(spectral, time_domain, rtol=1e-6)


# ---------------------------------------------------------------------------
# mel filterbank
# ---------------------------------------------------------------------------

def test_mel_closed_form_values():
    assert hz_to_mel(700.0) == pytest.approx(2595.0 * np.log10(2.0))
    assert hz_to_mel(700.0) == pytest.approx(781.17, abs=0.01)
    assert hz_to_mel(0.0) == 0.0


def test_mel_filterbank_shape_and_positivity():
    bank = mel_filterbank(n_mels=128, sample_rate=SR, n_fft=2048)
    assert bank.shape == (128, 1025)
    assert np.all(bank >= 0.0)
    assert np.all(bank.sum(axis=1) > 0.0)


def test_mel_filterbank_contiguous_support():
    bank = mel_filterbank(n_mels=128, sample_rate=SR, n_fft=2048)
    for row in bank:
        nz = np.nonzero(row)[0]
        assert len(nz) == nz[-1] - nz[0] + 1


def test_mel_filterbank_peaks_monotone():
    bank = mel_filterbank(n_mels=128, sample_rate=SR, n_fft=2048)
    peaks = bank.argmax(axis=1)
    assert np.all(np.diff(peaks) > 0)


def test_mel_filterbank_too_fine_rejected():
    with pytest.raises(ConfigurationError):
        mel_filterbank(n_mels=600, sample_rate=SR, n_fft=256)


# ---------------------------------------------------------------------------
# mfcc
# ---------------------------------------------------------------------------

def test_mfcc_zero_clip_constant_frames():
    series = mfcc(clip_of(np.zeros(SR)))
    # constant -100 dB mel vector: orthonormal DCT c0 = -100 * sqrt(128)
    assert np.allclose(series.values[0], -100.0 * np.sqrt(128.0))
    assert np.allclose(series.values[1:], 0.0)
    assert np.all(series.values[:, 0] == series.values[:, -1])


def test_mfcc_shape_10s(sine_440_10s):
    series = mfcc(sine_440_10s)
    assert series.values.shape == (13, 431)


def test_mfcc_gain_shift_moves_only_c0():
    rng = np.random.default_rng(5)
    x = rng.uniform(-0.4, 0.4, size=2 * SR)
    base = mfcc(clip_of(x)).values
    doubled = mfcc(clip_of(2.0 * x)).values
    assert np.allclose(base[1:], doubled[1:], atol=1e-6)
    shift = doubled[0] - base[0]
    expected = 10.0 * np.log10(4.0) * np.sqrt(128.0)
    assert np.allclose(shift, expected, atol=1e-3)


# ---------------------------------------------------------------------------
# A-weighting
# ---------------------------------------------------------------------------

def test_a_weight_reference_values():
    assert abs(a_weight_gain(1000.0)) <= 0.01
    assert a_weight_gain(100.0) == pytest.approx(-19.1, abs=0.1)
    assert a_weight_gain(8000.0) == pytest.approx(-1.1, abs=0.1)


def test_a_weight_domain_error():
    with pytest.raises(ValueError):
        a_weight_gain(0.0)
    with pytest.raises(ValueError):
        a_weight_gain(-100.0)


def test_a_weight_strictly_increasing_20_to_2500():
    f = np.linspace(20.0, 2500.0, 2000)
    gains = a_weight_gain(f)
    assert np.all(np.diff(gains) > 0.0)
    assert np.all(np.isfinite(gains))


def test_a_weighted_rms_1khz_sine():
    clip = clip_of(tone(1000.0, 1.0, amplitude=0.5))
    series = a_weighted_rms(clip)
    interior = series.values[0, 3:-3]
    assert np.all(np.abs(interior - 0.5 / np.sqrt(2.0)) / (0.5 / np.sqrt(2.0)) < 0.02)


def test_a_weighted_rms_silence():
    assert np.all(a_weighted_rms(clip_of(np.zeros(SR))).values == 0.0)


def test_a_weighted_rms_100_vs_1000():
    v100 = np.median(a_weighted_rms(clip_of(tone(100.0, 1.0))).values[0, 3:-3])
    v1000 = np.median(a_weighted_rms(clip_of(tone(1000.0, 1.0))).values[0, 3:-3])
    expected = 10.0 ** (-19.1 / 20.0)
    assert v100 / v1000 == pytest.approx(expected, rel=0.05)


# ---------------------------------------------------------------------------
# rms_series
# ---------------------------------------------------------------------------

def test_rms_constant_clip():
    series = rms_series(clip_of(np.full(SR, -0.25)))
    assert np.allclose(series.values[0, 3:-3], 0.25)
    assert np.all(series.values[0] <= 0.25 + 1e-12)


def test_rms_sine_interior():
    series = rms_series(clip_of(tone(440.0, 1.0)))
    interior = series.values[0, 3:-3]
    assert np.all(np.abs(interior - np.sqrt(0.5)) / np.sqrt(0.5) < 0.01)


def test_rms_silence():
    assert np.all(rms_series(clip_of(np.zeros(SR))).values == 0.0)


def test_frame_times_convention(sine_440_10s):
    series = rms_series(sine_440_10s)
    assert series.frame_times[0] == 0.0
    assert series.frame_times[1] == pytest.approx(512 / SR)


def test_nonstandard_rms_frame_length_works():
    # the loudness frame length is configurable (even odd ball values)
    clip = clip_of(tone(500.0, 1.0))
    series = a_weighted_rms(clip, frame_length=20248, hop=512)
    assert series.values.shape[1] == 1 + SR // 512
