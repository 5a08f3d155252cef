import numpy as np
import pytest

from audioera import AudioClip

SR = 22050


def tone(freq, duration_s, sr=SR, amplitude=1.0, phase=0.0):
    t = np.arange(int(round(duration_s * sr))) / sr
    return amplitude * np.sin(2.0 * np.pi * freq * t + phase)


def clip_of(samples, sr=SR):
    return AudioClip(samples=np.asarray(samples, dtype=np.float64), sample_rate=sr)


@pytest.fixture(scope="session")
def sine_440_10s():
    return clip_of(tone(440.0, 10.0, amplitude=0.5))


@pytest.fixture(scope="session")
def silence_10s():
    return clip_of(np.zeros(10 * SR))
