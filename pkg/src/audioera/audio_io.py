"""Audio decoding and canonicalization.

Every analysis in this package runs on a canonical clip: mono, 22050 Hz,
float64 samples in [-1, 1]. This module gets arbitrary RIFF/WAVE input into
that shape: ``decode_wav`` -> ``mixdown`` -> ``resample``, or ``load_clip``
for the whole pipeline.

Supported encodings: PCM 16-bit, PCM 24-bit, IEEE float-32. Anything else is
rejected with a clear error; transcode externally first.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import DecodeError

CANONICAL_RATE = 22050

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3


@dataclass(frozen=True)
class RawAudio:
    """Decoded audio at its native rate: ``samples`` is (channels, n) float64."""

    samples: np.ndarray
    sample_rate: int

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class AudioClip:
    """Canonical mono clip: 1-D float64 ``samples`` in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


def decode_wav(data: bytes) -> RawAudio:
    """Decode a RIFF/WAVE byte string.

    Integer PCM is mapped to [-1, 1] by dividing by 2^(bits-1); float-32
    samples pass through unscaled. Channel count and native rate are
    preserved.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise DecodeError("not a RIFF/WAVE stream")

    fmt = None
    pcm_bytes = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id, chunk_size = struct.unpack_from("<4sI", data, offset)
        body = offset + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body + 16 > len(data):
                raise DecodeError(f"truncated fmt chunk at byte {offset}")
            fmt = struct.unpack_from("<HHIIHH", data, body)
        elif chunk_id == b"data":
            end = body + chunk_size
            if end > len(data):
                raise DecodeError(
                    f"truncated data chunk: need {end} bytes, file ends at {len(data)}"
                )
            pcm_bytes = data[body:end]
        offset = body + chunk_size + (chunk_size & 1)

    if fmt is None:
        raise DecodeError("missing fmt chunk")
    if pcm_bytes is None:
        raise DecodeError("missing data chunk")

    tag, n_channels, sample_rate, _byte_rate, _block_align, bits = fmt
    if n_channels < 1:
        raise DecodeError("fmt chunk declares zero channels")

    if tag == _FMT_PCM and bits == 16:
        flat = np.frombuffer(pcm_bytes[: len(pcm_bytes) // 2 * 2], dtype="<i2")
        samples = flat.astype(np.float64) / 32768.0
    elif tag == _FMT_PCM and bits == 24:
        usable = len(pcm_bytes) // 3 * 3
        b = np.frombuffer(pcm_bytes[:usable], dtype=np.uint8).reshape(-1, 3)
        raw = (
            b[:, 0].astype(np.int32)
            | (b[:, 1].astype(np.int32) << 8)
            | (b[:, 2].astype(np.int32) << 16)
        )
        raw = (raw ^ 0x800000) - 0x800000  # sign-extend 24 -> 32 bits
        samples = raw.astype(np.float64) / 8388608.0
    elif tag == _FMT_IEEE_FLOAT and bits == 32:
        flat = np.frombuffer(pcm_bytes[: len(pcm_bytes) // 4 * 4], dtype="<f4")
        samples = flat.astype(np.float64)
    else:
        raise DecodeError(f"unsupported encoding {tag} ({bits}-bit)")

    n_frames = len(samples) // n_channels
    planar = samples[: n_frames * n_channels].reshape(n_frames, n_channels).T
    return RawAudio(samples=np.ascontiguousarray(planar), sample_rate=int(sample_rate))


def encode_wav(samples: np.ndarray, sample_rate: int, encoding: str = "pcm16") -> bytes:
    """Encode samples ((channels, n) or 1-D mono) as a WAV byte string.

    ``encoding`` is "pcm16" or "float32". No dithering is applied.
    """
    arr = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    interleaved = arr.T.reshape(-1)
    if encoding == "pcm16":
        ints = np.clip(np.round(interleaved * 32768.0), -32768, 32767).astype("<i2")
        payload = ints.tobytes()
        tag, bits = _FMT_PCM, 16
    elif encoding == "float32":
        payload = interleaved.astype("<f4").tobytes()
        tag, bits = _FMT_IEEE_FLOAT, 32
    else:
        raise ValueError(f"unknown encoding {encoding!r}")

    n_channels = arr.shape[0]
    block_align = n_channels * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(payload),
        b"WAVE",
        b"fmt ",
        16,
        tag,
        n_channels,
        sample_rate,
        sample_rate * block_align,
        block_align,
        bits,
        b"data",
        len(payload),
    )
    return header + payload


def mixdown(raw: RawAudio) -> RawAudio:
    """Average all channels into one. Mono input is returned unchanged."""
    if raw.n_channels == 0:
        raise ValueError("cannot mix down audio with zero channels")
    if raw.n_channels == 1:
        return raw
    mono = raw.samples.mean(axis=0, keepdims=True)
    return RawAudio(samples=mono, sample_rate=raw.sample_rate)


@lru_cache(maxsize=16)
def _resample_filter(up: int, down: int, taps_per_phase: int = 64, beta: float = 8.6) -> np.ndarray:
    # Low-pass at the tighter of the two Nyquists, expressed in the
    # up-sampled domain; resample_poly applies the gain factor itself.
    m = max(up, down)
    half = taps_per_phase * m // 2
    return signal.firwin(2 * half + 1, 1.0 / m, window=("kaiser", beta), fs=2.0)


def resample(raw: RawAudio, target_rate: int = CANONICAL_RATE) -> AudioClip:
    """Band-limited polyphase resampling of a mono signal to ``target_rate``.

    Kaiser-windowed sinc, 64 taps per phase. Output length is
    round(n * target / native) and samples are clamped to [-1, 1].
    """
    if raw.n_channels != 1:
        raise ValueError("resample expects mono input; call mixdown first")
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    x = raw.samples[0]
    if raw.sample_rate == target_rate:
        return AudioClip(samples=np.clip(x, -1.0, 1.0), sample_rate=target_rate)

    g = np.gcd(raw.sample_rate, target_rate)
    up, down = target_rate // g, raw.sample_rate // g
    # hand resample_poly a copy: some scipy versions scale the window in place
    y = signal.resample_poly(x, up, down, window=_resample_filter(up, down).copy())
    n_out = int(round(len(x) * target_rate / raw.sample_rate))
    if len(y) < n_out:
        y = np.pad(y, (0, n_out - len(y)))
    return AudioClip(samples=np.clip(y[:n_out], -1.0, 1.0), sample_rate=target_rate)


def load_clip(path: str | Path, target_rate: int = CANONICAL_RATE) -> AudioClip:
    """Decode a WAV file and return the canonical mono clip."""
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
    try:
        return resample(mixdown(decode_wav(data)), target_rate)
    except DecodeError as exc:
        raise DecodeError(f"{path}: {exc}") from exc
