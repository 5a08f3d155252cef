"""Spectral kernels: STFT power, mel filterbank, MFCCs, A-weighting, RMS.

All framewise operations share one convention: the signal is reflect-padded
by half a frame at both ends (window-center convention), frames advance by
``hop`` samples, and a clip of n samples yields exactly 1 + floor(n / hop)
frames. Frame i is centered on sample i * hop, so frame times are
i * hop / sample_rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

from .audio_io import AudioClip
from .errors import ConfigurationError

LOG_POWER_FLOOR = 1e-10


@dataclass(frozen=True)
class FrameSeries:
    """A (K, T) matrix of framewise values plus its framing parameters."""

    values: np.ndarray
    hop: int
    frame_length: int
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]

    @property
    def frame_times(self) -> np.ndarray:
        """Window-center times in seconds, t_i = i * hop / sample_rate."""
        return np.arange(self.n_frames) * (self.hop / self.sample_rate)


@dataclass(frozen=True)
class PowerSpectrogram(FrameSeries):
    """FrameSeries of non-negative bin powers, K = frame_length // 2 + 1."""

    bin_freqs: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.bin_freqs is None:
            k = self.values.shape[0]
            freqs = np.arange(k) * (self.sample_rate / self.frame_length)
            object.__setattr__(self, "bin_freqs", freqs)


def _check_framing(clip: AudioClip, frame_length: int, hop: int) -> None:
    if len(clip.samples) == 0:
        raise ValueError("cannot frame an empty clip")
    if frame_length < 1 or hop < 1:
        raise ValueError("frame_length and hop must be positive")
    if hop > frame_length:
        raise ValueError("hop must not exceed frame_length")


def frame_signal(samples: np.ndarray, frame_length: int, hop: int) -> np.ndarray:
    """Center-padded framing: returns (T, frame_length) with T = 1 + n // hop."""
    x = np.asarray(samples, dtype=np.float64)
    pad_left = frame_length // 2
    pad_right = frame_length - pad_left
    padded = np.pad(x, (pad_left, pad_right), mode="reflect")
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_length)[::hop]
    return frames[: 1 + len(x) // hop]


def hann_window(frame_length: int) -> np.ndarray:
    """Periodic Hann window (DFT-even), w_n = 0.5 (1 - cos(2 pi n / N))."""
    n = np.arange(frame_length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / frame_length)


def stft_power(clip: AudioClip, frame_length: int = 2048, hop: int = 512) -> PowerSpectrogram:
    """Power spectrogram |X_k|^2 of Hann-windowed, center-padded frames."""
    _check_framing(clip, frame_length, hop)
    frames = frame_signal(clip.samples, frame_length, hop)
    spectrum = np.fft.rfft(frames * hann_window(frame_length), axis=1)
    power = (spectrum.real**2 + spectrum.imag**2).T
    return PowerSpectrogram(
        values=power, hop=hop, frame_length=frame_length, sample_rate=clip.sample_rate
    )


def hz_to_mel(f):
    """mel(f) = 2595 log10(1 + f / 700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    n_mels: int = 128,
    sample_rate: int = 22050,
    n_fft: int = 2048,
    f_lo: float = 0.0,
    f_hi: float | None = None,
) -> np.ndarray:
    """Triangular mel filters as an (n_mels, n_fft//2 + 1) weight matrix.

    Peaks are equally spaced on the mel scale; each filter is area-normalized
    by 2 / (f_upper - f_lower) so broad high-frequency triangles do not
    dominate the band energies.
    """
    if f_hi is None:
        f_hi = sample_rate / 2.0
    if n_mels < 2:
        raise ConfigurationError("n_mels must be at least 2")
    if not (0.0 <= f_lo < f_hi <= sample_rate / 2.0):
        raise ConfigurationError("need 0 <= f_lo < f_hi <= sample_rate / 2")

    edges = mel_to_hz(np.linspace(hz_to_mel(f_lo), hz_to_mel(f_hi), n_mels + 2))
    bin_freqs = np.arange(n_fft // 2 + 1) * (sample_rate / n_fft)

    lower = edges[:-2, None]
    center = edges[1:-1, None]
    upper = edges[2:, None]
    rising = (bin_freqs - lower) / (center - lower)
    falling = (upper - bin_freqs) / (upper - center)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    weights *= 2.0 / (upper - lower)

    if (weights.sum(axis=1) == 0.0).any():
        raise ConfigurationError(
            f"n_mels={n_mels} too large for FFT resolution n_fft={n_fft}: "
            "some filters span less than one bin"
        )
    return weights


def mfcc(
    clip: AudioClip,
    n_mfcc: int = 13,
    n_mels: int = 128,
    frame_length: int = 2048,
    hop: int = 512,
) -> FrameSeries:
    """Mel-frequency cepstral coefficients, (n_mfcc, T), c0 included.

    Pipeline: power spectrogram -> mel band powers -> 10 log10(max(., 1e-10))
    -> orthonormal DCT-II along the mel axis, keeping coefficients 0..n_mfcc-1.
    """
    spec = stft_power(clip, frame_length=frame_length, hop=hop)
    bank = mel_filterbank(n_mels=n_mels, sample_rate=clip.sample_rate, n_fft=frame_length)
    mel_power = bank @ spec.values
    log_mel = 10.0 * np.log10(np.maximum(mel_power, LOG_POWER_FLOOR))
    coeffs = dct(log_mel, type=2, axis=0, norm="ortho")[:n_mfcc]
    return FrameSeries(
        values=np.ascontiguousarray(coeffs),
        hop=hop,
        frame_length=frame_length,
        sample_rate=clip.sample_rate,
    )


def a_weight_gain(f):
    """A-weighting curve in dB at frequency f (Hz), scalar or array.

    R_A(f) = 12194^2 f^4 / [(f^2 + 20.6^2) sqrt((f^2 + 107.7^2)(f^2 + 737.9^2))
             (f^2 + 12194^2)], A(f) = 20 log10(R_A(f)) + 2.00. A(1000) = 0 dB
    within a hundredth.
    """
    farr = np.asarray(f, dtype=np.float64)
    if (farr <= 0.0).any():
        raise ValueError("a_weight_gain requires f > 0")
    f2 = farr * farr
    ra = (12194.0**2 * f2 * f2) / (
        (f2 + 20.6**2)
        * np.sqrt((f2 + 107.7**2) * (f2 + 737.9**2))
        * (f2 + 12194.0**2)
    )
    out = 20.0 * np.log10(ra) + 2.00
    return float(out) if np.isscalar(f) else out


def _spectral_rms(spec: PowerSpectrogram, bin_gains: np.ndarray) -> FrameSeries:
    # Parseval: sum_k c_k |X_k|^2 == N * sum((w x)^2), so dividing by
    # N * sum(w^2) recovers the mean square of the windowed frame.
    n = spec.frame_length
    k = spec.values.shape[0]
    doubling = np.full(k, 2.0)
    doubling[0] = 1.0
    if n % 2 == 0:
        doubling[-1] = 1.0
    window_norm = n * np.sum(hann_window(n) ** 2)
    power = (doubling * bin_gains**2) @ spec.values / window_norm
    return FrameSeries(
        values=np.sqrt(np.maximum(power, 0.0))[None, :],
        hop=spec.hop,
        frame_length=spec.frame_length,
        sample_rate=spec.sample_rate,
    )


def a_weighted_rms(clip: AudioClip, frame_length: int = 2048, hop: int = 512) -> FrameSeries:
    """Framewise A-weighted RMS (1, T): spectral RMS with per-bin A-gains.

    The DC bin's gain is defined as 0. With all gains forced to one this
    reduces to the plain frame RMS (see ``rms_series`` for the time-domain
    equivalent).
    """
    spec = stft_power(clip, frame_length=frame_length, hop=hop)
    gains = np.zeros(spec.values.shape[0])
    gains[1:] = 10.0 ** (a_weight_gain(spec.bin_freqs[1:]) / 20.0)
    return _spectral_rms(spec, gains)


def rms_series(clip: AudioClip, frame_length: int = 2048, hop: int = 512) -> FrameSeries:
    """Time-domain framewise RMS (1, T) with center padding."""
    _check_framing(clip, frame_length, hop)
    frames = frame_signal(clip.samples, frame_length, hop)
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    return FrameSeries(
        values=rms[None, :], hop=hop, frame_length=frame_length, sample_rate=clip.sample_rate
    )
