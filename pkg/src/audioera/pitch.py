"""Fundamental-frequency tracking with voicing decisions.

Candidate generation follows YIN: a cumulative-mean-normalized difference
function (CMND) per frame, whose troughs mark period candidates. Candidates
are weighted by a probabilistic threshold scheme (Beta-distributed prior over
100 absolute thresholds; each threshold's mass goes to the first trough below
it, thresholds with no trough send a small fraction to the global minimum).
A banded Viterbi pass over log-spaced pitch states plus one unvoiced state
turns the per-frame candidates into a smooth track.

The decode is fully deterministic: identical samples give a bitwise
identical track.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .audio_io import AudioClip
from .dsp import frame_signal

DEFAULT_FMIN = 65.4  # C2
DEFAULT_FMAX = 2093.0  # C7


@dataclass(frozen=True)
class F0Track:
    """Per-frame pitch estimates. ``f0_hz`` is NaN wherever ``voiced`` is False."""

    f0_hz: np.ndarray
    voiced: np.ndarray
    voiced_prob: np.ndarray
    hop: int
    frame_length: int
    sample_rate: int

    @property
    def n_frames(self) -> int:
        return len(self.f0_hz)

    @property
    def frame_times(self) -> np.ndarray:
        return np.arange(self.n_frames) * (self.hop / self.sample_rate)

    @property
    def voiced_fraction(self) -> float:
        return float(np.mean(self.voiced)) if self.n_frames else 0.0

    def voiced_f0(self) -> np.ndarray:
        """The f0 subsequence over voiced frames only (gaps closed)."""
        return self.f0_hz[self.voiced]


def cmnd(frame: np.ndarray, tau_max: int) -> np.ndarray:
    """Cumulative-mean-normalized difference function of one frame.

    Returns an array indexed by lag: out[tau] = d'(tau) for tau in
    1..tau_max, with out[0] = 1 by convention. d(tau) sums squared
    differences over a fixed window of len(frame) - tau_max samples;
    d'(tau) = d(tau) * tau / sum_{s<=tau} d(s), defined as 1 where the
    running sum is zero.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if len(frame) < 2 * tau_max:
        raise ValueError(f"frame of {len(frame)} samples too short for tau_max={tau_max}")
    return _cmnd_frames(frame[None, :], tau_max)[0]


# A running difference sum below this fraction of the raw frame energy is
# indistinguishable from float rounding noise (garbage sits near eps^2
# relative) and triggers the degenerate d' = 1 rule.
_CMND_ZERO_TOL = 1e-24


def _cmnd_frames(frames: np.ndarray, tau_max: int) -> np.ndarray:
    """Batched CMND over (T, L) frames; returns (T, tau_max + 1)."""
    n_frames, length = frames.shape
    window = length - tau_max
    raw_energy = np.sum(frames[:, :window] ** 2, axis=1)
    # The difference function is invariant to an additive constant; removing
    # the frame mean costs nothing mathematically and reduces the FFT
    # cancellation noise on near-constant frames.
    frames = frames - frames.mean(axis=1, keepdims=True)
    # d(tau) = E0 + E(tau) - 2 r(tau) with r computed via FFT correlation.
    nfft = 1 << int(2 * length - 1).bit_length()
    spec_full = np.fft.rfft(frames, n=nfft, axis=1)
    spec_head = np.fft.rfft(frames[:, :window], n=nfft, axis=1)
    corr = np.fft.irfft(np.conj(spec_head) * spec_full, n=nfft, axis=1)[:, : tau_max + 1]

    squares = frames * frames
    csum = np.cumsum(squares, axis=1)
    energy_head = csum[:, window - 1]
    lags = np.arange(tau_max + 1)
    energy_lagged = csum[:, lags + window - 1] - np.concatenate(
        [np.zeros((n_frames, 1)), csum[:, :tau_max]], axis=1
    )
    diff = np.maximum(energy_head[:, None] + energy_lagged - 2.0 * corr, 0.0)

    out = np.empty_like(diff)
    out[:, 0] = 1.0
    running = np.cumsum(diff[:, 1:], axis=1)
    taus = np.arange(1, tau_max + 1, dtype=np.float64)
    meaningful = running > _CMND_ZERO_TOL * raw_energy[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        out[:, 1:] = np.where(meaningful, diff[:, 1:] * taus / running, 1.0)
    return out


def _threshold_prior(n_thresholds: int, shape: tuple[float, float]):
    edges = np.linspace(0.0, 1.0, n_thresholds + 1)
    cdf = betainc(shape[0], shape[1], edges)
    return edges[1:], np.diff(cdf)


def _frame_candidates(
    cmnd_row: np.ndarray,
    tau_min: int,
    thresholds: np.ndarray,
    prior: np.ndarray,
    no_trough_prob: float,
):
    """Refined candidate lags and their probability masses for one frame."""
    v = cmnd_row
    idx = np.where((v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:]))[0] + 1
    idx = idx[idx >= tau_min]
    if len(idx) == 0:
        return None

    left, mid, right = v[idx - 1], v[idx], v[idx + 1]
    denom = left - 2.0 * mid + right
    safe = np.where(denom == 0.0, 1.0, denom)
    shift = np.clip(np.where(denom > 0.0, 0.5 * (left - right) / safe, 0.0), -0.5, 0.5)
    tau_refined = idx + shift
    val_refined = mid - 0.25 * (left - right) * shift

    # First trough below each threshold via the prefix minimum (non-increasing).
    prefix_min = np.minimum.accumulate(val_refined)
    first = np.searchsorted(-prefix_min, -thresholds, side="right")
    hit = first < len(idx)
    probs = np.zeros(len(idx))
    np.add.at(probs, first[hit], prior[hit])
    probs[int(np.argmin(val_refined))] += no_trough_prob * prior[~hit].sum()
    return tau_refined, probs


def pyin_track(
    clip: AudioClip,
    fmin: float = DEFAULT_FMIN,
    fmax: float = DEFAULT_FMAX,
    frame_length: int = 2048,
    hop: int = 512,
    bins_per_semitone: int = 20,
    max_step_cents: float = 35.0,
    switch_prob: float = 0.01,
    n_thresholds: int = 100,
    beta_shape: tuple[float, float] = (2.0, 18.0),
    no_trough_prob: float = 0.01,
) -> F0Track:
    """Track f0 over a clip, using the framing conventions shared with dsp.

    Pitch states are spaced ``bins_per_semitone`` per semitone from fmin to
    fmax; voiced-to-voiced transitions are confined to +-``max_step_cents``
    per frame with a triangular penalty, and switching voicing state costs
    ``switch_prob``. Emitted f0 values are the decoded state frequencies.
    """
    if len(clip.samples) < frame_length:
        raise ValueError("clip shorter than one frame")
    if not (0.0 < fmin < fmax <= clip.sample_rate / 2.0):
        raise ValueError("need 0 < fmin < fmax <= sample_rate / 2")

    sr = clip.sample_rate
    tau_min = max(1, int(np.floor(sr / fmax)))
    tau_max = min(frame_length // 2, int(np.ceil(sr / fmin)))

    frames = frame_signal(clip.samples, frame_length, hop)
    cmnd_all = _cmnd_frames(frames, tau_max)
    thresholds, prior = _threshold_prior(n_thresholds, beta_shape)

    n_bins = int(np.ceil(12.0 * np.log2(fmax / fmin) * bins_per_semitone))
    cents_per_bin = 100.0 / bins_per_semitone
    bin_freqs = fmin * 2.0 ** (np.arange(n_bins) * cents_per_bin / 1200.0)

    n_frames = frames.shape[0]
    emission = np.zeros((n_frames, n_bins))
    voiced_prob = np.zeros(n_frames)
    for t in range(n_frames):
        cand = _frame_candidates(cmnd_all[t], tau_min, thresholds, prior, no_trough_prob)
        if cand is None:
            continue
        tau_refined, probs = cand
        freqs = sr / tau_refined
        ok = (freqs >= fmin) & (freqs <= fmax)
        if not ok.any():
            continue
        bins = np.round(12.0 * bins_per_semitone * np.log2(freqs[ok] / fmin)).astype(int)
        np.add.at(emission[t], np.clip(bins, 0, n_bins - 1), probs[ok])
        voiced_prob[t] = probs[ok].sum()
    voiced_prob = np.clip(voiced_prob, 0.0, 1.0)

    states = _viterbi(emission, voiced_prob, bins_per_semitone, max_step_cents, switch_prob)
    voiced = states >= 0
    f0 = np.where(voiced, bin_freqs[np.clip(states, 0, n_bins - 1)], np.nan)
    return F0Track(
        f0_hz=f0,
        voiced=voiced,
        voiced_prob=voiced_prob,
        hop=hop,
        frame_length=frame_length,
        sample_rate=sr,
    )


def _viterbi(
    emission: np.ndarray,
    voiced_prob: np.ndarray,
    bins_per_semitone: int,
    max_step_cents: float,
    switch_prob: float,
) -> np.ndarray:
    """Decode pitch-bin/unvoiced states; returns bin index per frame, -1 = unvoiced."""
    n_frames, n_bins = emission.shape
    half = max(1, int(round(max_step_cents * bins_per_semitone / 100.0)))
    offsets = np.arange(-half, half + 1)
    tri = 1.0 - np.abs(offsets) / (half + 1.0)
    log_tri = np.log(tri / tri.sum())

    with np.errstate(divide="ignore"):
        log_em_v = np.log(emission)
        log_em_u = np.log(np.clip(1.0 - voiced_prob, 1e-12, 1.0))
    log_stay_v = np.log1p(-switch_prob)
    log_switch = np.log(switch_prob)

    score_v = np.log(0.5) + log_em_v[0]
    score_u = np.log(0.5) + log_em_u[0]
    back_v = np.zeros((n_frames, n_bins), dtype=np.int32)
    back_u = np.zeros(n_frames, dtype=np.int32)

    src_idx = np.arange(n_bins)
    for t in range(1, n_frames):
        best = np.full(n_bins, -np.inf)
        best_src = np.zeros(n_bins, dtype=np.int32)
        for k, off in enumerate(offsets):
            dst_lo, dst_hi = max(0, off), n_bins + min(0, off)
            src_lo, src_hi = max(0, -off), n_bins + min(0, -off)
            cand = score_v[src_lo:src_hi] + log_tri[k]
            seg = best[dst_lo:dst_hi]
            better = cand > seg
            seg[better] = cand[better]
            best_src[dst_lo:dst_hi][better] = src_idx[src_lo:src_hi][better]

        from_v = best + log_stay_v
        from_u = score_u + log_switch
        enter = from_u > from_v
        new_v = log_em_v[t] + np.where(enter, from_u, from_v)
        back_v[t] = np.where(enter, -1, best_src)

        best_prev_v = score_v.max()
        if best_prev_v + log_switch > score_u + log_stay_v:
            new_u = log_em_u[t] + best_prev_v + log_switch
            back_u[t] = int(score_v.argmax())
        else:
            new_u = log_em_u[t] + score_u + log_stay_v
            back_u[t] = -1
        score_v, score_u = new_v, new_u

    states = np.empty(n_frames, dtype=np.int32)
    states[-1] = -1 if score_u >= score_v.max() else int(score_v.argmax())
    for t in range(n_frames - 1, 0, -1):
        s = states[t]
        states[t - 1] = back_u[t] if s < 0 else back_v[t, s]
    return states
