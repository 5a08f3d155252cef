"""Per-clip feature vectors and loudness-peak metrics.

Each clip yields up to three fixed-size summary vectors:

* pitch    (12)  - stats of the voiced-only f0 subsequence and its deltas
* loudness (12)  - stats of the A-weighted RMS trajectory and its deltas
* timbre   (156) - stats of 13 MFCCs and their deltas

"Stats" means (mean, std, min, max) over frames, std with the population
convention, concatenated block-major: all base rows, then all first-delta
rows, then all second-delta rows. A clip whose pitch track has no voiced
frames gets no pitch vector at all (never a zero fill).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .audio_io import AudioClip
from .dsp import FrameSeries, a_weighted_rms, mfcc
from .pitch import DEFAULT_FMAX, DEFAULT_FMIN, F0Track, pyin_track

KIND_DIMS = {"pitch": 12, "loudness": 12, "timbre": 156}
KINDS = tuple(sorted(KIND_DIMS))

ClipRef = tuple  # (label, source, sample_id)


@dataclass(frozen=True)
class FeatureVector:
    kind: str
    values: np.ndarray
    clip_ref: Optional[ClipRef] = None

    def __post_init__(self):
        if self.kind not in KIND_DIMS:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if len(self.values) != KIND_DIMS[self.kind]:
            raise ValueError(
                f"{self.kind} vector must have {KIND_DIMS[self.kind]} values, "
                f"got {len(self.values)}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.kind} vector contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PeakMetrics:
    """Loudness-peak summary: when the peak happens and how much it sticks out."""

    peak_time_s: float
    relative_magnitude: float


@dataclass(frozen=True)
class ExtractionConfig:
    sample_rate: int = 22050
    frame_length: int = 2048
    hop: int = 512
    n_mels: int = 128
    n_mfcc: int = 13
    rms_frame_length: int = 2048
    fmin: float = DEFAULT_FMIN
    fmax: float = DEFAULT_FMAX
    # "voiced_only": deltas on the concatenated voiced subsequence (default);
    # "interpolate": deltas on a gap-interpolated track, stats on voiced frames.
    pitch_deltas: str = "voiced_only"


def delta(series: np.ndarray, radius: int = 4) -> np.ndarray:
    """Regression slope over a +-radius frame window (width 9 by default).

    d_t = sum_n n (x_{t+n} - x_{t-n}) / (2 sum_n n^2); indices outside the
    series replicate the edge frame. Apply twice for the second-order delta.
    """
    x = np.atleast_2d(np.asarray(series, dtype=np.float64))
    if x.shape[1] < 1:
        raise ValueError("delta requires at least one frame")
    padded = np.pad(x, ((0, 0), (radius, radius)), mode="edge")
    width = x.shape[1]
    num = np.zeros_like(x)
    for n in range(1, radius + 1):
        num += n * (padded[:, radius + n : radius + n + width] - padded[:, radius - n : radius - n + width])
    denom = 2.0 * sum(n * n for n in range(1, radius + 1))
    out = num / denom
    return out if np.asarray(series).ndim > 1 else out[0]


def summarize_stats(base: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """(mean, std, min, max) per row for each of the three blocks, length 12K.

    std divides by T (population convention). Order: for each block in
    (base, d1, d2), for each row top to bottom, the four stats in the order
    above.
    """
    blocks = [np.atleast_2d(np.asarray(b, dtype=np.float64)) for b in (base, d1, d2)]
    shape = blocks[0].shape
    if any(b.shape != shape for b in blocks):
        raise ValueError("base, d1 and d2 must share one shape")
    if shape[1] < 1:
        raise ValueError("cannot summarize an empty series; filter empty tracks first")
    parts = []
    for b in blocks:
        stats = np.stack([b.mean(axis=1), b.std(axis=1), b.min(axis=1), b.max(axis=1)], axis=1)
        parts.append(stats.ravel())
    return np.concatenate(parts)


def _summarize_with_deltas(base: np.ndarray) -> np.ndarray:
    d1 = delta(base)
    return summarize_stats(base, d1, delta(d1))


def _pitch_vector(track: F0Track, mode: str, clip_ref) -> Optional[FeatureVector]:
    if not track.voiced.any():
        return None
    if mode == "voiced_only":
        voiced = track.voiced_f0()[None, :]
        values = _summarize_with_deltas(voiced)
    elif mode == "interpolate":
        idx = np.arange(track.n_frames)
        vidx = idx[track.voiced]
        filled = np.interp(idx, vidx, track.f0_hz[track.voiced])[None, :]
        d1 = delta(filled)
        d2 = delta(d1)
        sel = track.voiced
        values = summarize_stats(filled[:, sel], d1[:, sel], d2[:, sel])
    else:
        raise ValueError(f"unknown pitch_deltas mode {mode!r}")
    return FeatureVector(kind="pitch", values=values, clip_ref=clip_ref)


def assemble_feature_vectors(
    clip: AudioClip,
    config: ExtractionConfig = ExtractionConfig(),
    clip_ref: Optional[ClipRef] = None,
) -> dict[str, FeatureVector]:
    """Extract the per-clip vectors; the "pitch" key is absent for unpitched clips."""
    mfccs = mfcc(
        clip,
        n_mfcc=config.n_mfcc,
        n_mels=config.n_mels,
        frame_length=config.frame_length,
        hop=config.hop,
    )
    loud = a_weighted_rms(clip, frame_length=config.rms_frame_length, hop=config.hop)
    out = {
        "loudness": FeatureVector(
            kind="loudness", values=_summarize_with_deltas(loud.values), clip_ref=clip_ref
        ),
        "timbre": FeatureVector(
            kind="timbre", values=_summarize_with_deltas(mfccs.values), clip_ref=clip_ref
        ),
    }
    track = pyin_track(
        clip,
        fmin=config.fmin,
        fmax=config.fmax,
        frame_length=config.frame_length,
        hop=config.hop,
    )
    pitch = _pitch_vector(track, config.pitch_deltas, clip_ref)
    if pitch is not None:
        out["pitch"] = pitch
    return out


def loudness_peak_metrics(rms: FrameSeries) -> PeakMetrics:
    """Peak position and peak/mean ratio of a 1-row RMS series.

    Ties break to the earliest frame; an all-silent series is defined as
    (peak_time 0, relative magnitude 1).
    """
    values = np.asarray(rms.values)[0]
    if len(values) < 1:
        raise ValueError("empty RMS series")
    if values.max() == values.min():
        # constant (or all-silent) series: peak equals mean by definition
        return PeakMetrics(peak_time_s=0.0, relative_magnitude=1.0)
    mean = float(values.mean())
    peak_idx = int(np.argmax(values))
    return PeakMetrics(
        peak_time_s=float(rms.frame_times[peak_idx]),
        relative_magnitude=float(values[peak_idx]) / mean,
    )
