"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``. The final criterion needs
real corpora on disk (AUDIOERA_GENERATED_DIR / AUDIOERA_ESC50_DIR) and is
skipped otherwise.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from audioera import (
    FeatureVector,
    a_weight_gain,
    assemble_feature_vectors,
    encode_wav,
    era_projection_2d,
    fit_pca,
    loudness_peak_metrics,
    mfcc,
    parse_features_csv,
    pyin_track,
    stft_power,
    total_variance,
    variance_summary,
)
from audioera.dsp import FrameSeries, frame_signal, hann_window

from conftest import SR, clip_of, tone


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "audioera", *map(str, args)],
        capture_output=True,
        text=True,
    )


def cents(f, ref):
    return 1200.0 * np.log2(f / ref)


# ---------------------------------------------------------------------------
# synthetic three-source corpus shared by criteria 7 and 9
# ---------------------------------------------------------------------------

CLIP_SECONDS = 3.0
CLIPS_PER_CELL = 40
LABELS = ("alpha", "beta")


def _noise_burst_clip(rng):
    n = int(CLIP_SECONDS * SR)
    x = 0.01 * rng.normal(size=n)
    for _ in range(int(rng.integers(1, 4))):
        width = int(0.3 * SR)
        start = int(rng.integers(0, n - width))
        x[start : start + width] += (
            0.4 * rng.normal(size=width) * np.hanning(width)
        )
    return np.clip(x, -1.0, 1.0)


@pytest.fixture(scope="session")
def synthetic_corpus(tmp_path_factory):
    rng = np.random.default_rng(20250810)
    root = tmp_path_factory.mktemp("synthetic_corpus")
    for label in LABELS:
        for i in range(CLIPS_PER_CELL):
            amp = rng.uniform(0.4, 0.6)
            a = tone(1000.0, CLIP_SECONDS, amplitude=amp, phase=rng.uniform(0, 2 * np.pi))
            b = tone(rng.uniform(200.0, 2000.0), CLIP_SECONDS, amplitude=0.5)
            c = _noise_burst_clip(rng)
            for source, x in (("gen_a", a), ("gen_b", b), ("gen_c", c)):
                path = root / source / label / f"{i:03d}.wav"
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(encode_wav(x, SR))
    return root


@pytest.fixture(scope="session")
def pipeline_outputs(synthetic_corpus, tmp_path_factory):
    """Timed ingest -> extract -> era -> variance over the synthetic corpus."""
    out = tmp_path_factory.mktemp("pipeline")
    started = time.perf_counter()
    steps = [
        run_cli(
            "ingest",
            "--generated", f"gen_a={synthetic_corpus / 'gen_a'}",
            "--generated", f"gen_b={synthetic_corpus / 'gen_b'}",
            "--generated", f"gen_c={synthetic_corpus / 'gen_c'}",
            "--out", out / "manifest.json",
        ),
        run_cli(
            "extract", "--manifest", out / "manifest.json",
            "--threads", 1, "--out", out / "features.csv",
        ),
        run_cli(
            "era", "--features", out / "features.csv",
            "--label", "alpha", "--kind", "pitch",
            "--out-csv", out / "proj.csv", "--out-svg", out / "proj.svg",
        ),
        run_cli(
            "variance", "--features", out / "features.csv",
            "--reference", "gen_b", "--out", out / "variance.csv",
        ),
    ]
    elapsed = time.perf_counter() - started
    for step in steps:
        assert step.returncode == 0, step.stderr
    return {"dir": out, "elapsed_s": elapsed}


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_01_dimensional_parity_and_runtime():
    rng = np.random.default_rng(1)
    clip = clip_of(0.05 * rng.normal(size=10 * SR) + tone(440.0, 10.0, amplitude=0.4))
    assemble_feature_vectors(clip_of(tone(330.0, 1.0)))  # warm FFT caches
    started = time.perf_counter()
    vectors = assemble_feature_vectors(clip)
    elapsed = time.perf_counter() - started
    assert vectors["pitch"].dim == 12
    assert vectors["loudness"].dim == 12
    assert vectors["timbre"].dim == 156
    assert elapsed < 1.0
    print(f"ACCEPTANCE 1 PASS: dims 12/12/156, {elapsed:.3f} s per 10 s clip")


def test_criterion_02_pitch_tracker_suite(silence_10s):
    started = time.perf_counter()
    for freq in (110.0, 220.0, 440.0, 880.0, 1760.0):
        track = pyin_track(clip_of(tone(freq, 10.0, amplitude=0.5)))
        assert track.voiced_fraction >= 0.9, freq
        median_err = abs(cents(np.median(track.voiced_f0()), freq))
        assert median_err <= 10.0, freq
    silent_track = pyin_track(silence_10s)
    assert silent_track.voiced.sum() == 0
    assert "pitch" not in assemble_feature_vectors(silence_10s)
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0
    print(f"ACCEPTANCE 2 PASS: 5 tones tracked, silence excluded, {elapsed:.1f} s")


def test_criterion_03_a_weighting_closed_form():
    assert abs(a_weight_gain(1000.0)) <= 0.01
    assert abs(a_weight_gain(100.0) - (-19.1)) <= 0.1
    assert abs(a_weight_gain(8000.0) - (-1.1)) <= 0.1
    print("ACCEPTANCE 3 PASS: A(1000)/A(100)/A(8000) within tolerance")


def test_criterion_04_dsp_invariants():
    rng = np.random.default_rng(4)
    clip = clip_of(rng.uniform(-0.6, 0.6, size=10 * SR))
    spec = stft_power(clip)
    assert spec.values.shape == (1025, 431)

    frames = frame_signal(clip.samples, 2048, 512)
    window = hann_window(2048)
    doubling = np.full(1025, 2.0)
    doubling[0] = doubling[-1] = 1.0
    spectral = doubling @ spec.values
    windowed_energy = 2048.0 * np.sum((frames * window) ** 2, axis=1)
    rel = np.abs(spectral - windowed_energy) / windowed_energy
    assert rel[3:-3].max() <= 1e-6

    base = mfcc(clip).values
    doubled = mfcc(clip_of(2.0 * clip.samples)).values
    assert np.abs(doubled[1:] - base[1:]).max() <= 1e-3
    shift = doubled[0] - base[0]
    assert np.abs(shift - shift.mean()).max() <= 1e-3  # c0 moves by one constant
    print("ACCEPTANCE 4 PASS: frame grid 431x1025, Parseval <= 1e-6, gain shift <= 1e-3")


def test_criterion_05_pca_oracle_equivalence():
    rng = np.random.default_rng(505)
    for trial in range(50):
        d = int(rng.integers(1, 7))
        n = int(rng.integers(d + 1, 51))
        data = rng.normal(size=(n, d)) * rng.uniform(0.1, 5.0, size=d)
        model = fit_pca(data, retain=d)
        oracle = np.linalg.eigvalsh(np.cov(data, rowvar=False).reshape(d, d))[::-1]
        assert np.abs(model.eigenvalues - oracle).max() < 1e-8, trial
        gram = model.components @ model.components.T
        assert np.abs(gram - np.eye(len(gram))).max() < 1e-8, trial

    rows = rng.normal(size=(30, 4))
    scaled = rows.mean(axis=0) + 2.0 * (rows - rows.mean(axis=0))
    assert total_variance(scaled) == pytest.approx(4.0 * total_variance(rows), rel=1e-6)

    vectors = []
    for source in ("ref", "gen"):
        for i in range(6):
            vectors.append(
                FeatureVector(
                    kind="pitch", values=rng.normal(size=12), clip_ref=("x", source, str(i))
                )
            )
    summary = variance_summary(vectors, "ref")
    assert summary.values[("ref", "pitch")] == 1.0
    print("ACCEPTANCE 5 PASS: 50 matrices match dense eigendecomposition oracle")


def test_criterion_06_variance_table_arithmetic():
    targets = {"loudness": 0.73, "pitch": 1.69, "timbre": 0.83}
    dims = {"loudness": 12, "pitch": 12, "timbre": 156}
    vectors = []
    for kind, ratio in targets.items():
        for i, coord in enumerate([0.0, 2.0]):
            v = np.zeros(dims[kind]); v[0] = coord
            vectors.append(FeatureVector(kind=kind, values=v, clip_ref=("x", "ref", f"r{i}")))
        for i, coord in enumerate([0.0, 2.0 * np.sqrt(ratio)]):
            v = np.zeros(dims[kind]); v[0] = coord
            vectors.append(FeatureVector(kind=kind, values=v, clip_ref=("x", "gen", f"g{i}")))
    summary = variance_summary(vectors, "ref")
    per_kind = [summary.values[("gen", k)] for k in summary.kinds]
    assert summary.means["gen"] == pytest.approx(np.mean(per_kind), rel=1e-15)
    assert summary.means["gen"] == pytest.approx(1.0833333333, rel=1e-6)
    assert round(summary.means["gen"], 2) == 1.08
    print("ACCEPTANCE 6 PASS: mean row = mean of unrounded kinds; fixture -> 1.08")


def test_criterion_07_end_to_end_synthetic_era(pipeline_outputs):
    elapsed = pipeline_outputs["elapsed_s"]
    assert elapsed < 300.0
    out = pipeline_outputs["dir"]

    variance_rows = {}
    for line in (out / "variance.csv").read_text().strip().split("\n")[1:]:
        source, kind, value = line.split(",")
        variance_rows[(source, kind)] = float(value)
    assert variance_rows[("gen_b", "pitch")] > variance_rows[("gen_a", "pitch")]

    vectors = parse_features_csv((out / "features.csv").read_text())
    projection = era_projection_2d(vectors, "alpha", "pitch")
    pc1 = {}
    for source, _sid, x, _y in projection.points:
        pc1.setdefault(source, []).append(x)
    distance = abs(np.mean(pc1["gen_a"]) - np.mean(pc1["gen_b"]))
    spread = max(min(np.std(pc1["gen_a"]), np.std(pc1["gen_b"])), 1e-12)
    assert distance > 3.0 * spread
    print(
        f"ACCEPTANCE 7 PASS: pipeline {elapsed:.1f} s; pitch variance "
        f"B={variance_rows[('gen_b', 'pitch')]:.3f} > A={variance_rows[('gen_a', 'pitch')]:.3f}; "
        f"separation {distance / spread:.1f}x"
    )


def test_criterion_08_peak_metrics_fixture():
    values = np.full(431, 0.1)
    values[int(round(3.0 * SR / 512))] = 0.5
    series = FrameSeries(values=values[None, :], hop=512, frame_length=2048, sample_rate=SR)
    metrics = loudness_peak_metrics(series)
    assert abs(metrics.peak_time_s - 3.00) <= 0.03
    assert abs(metrics.relative_magnitude - 4.954) <= 0.01

    doubled = FrameSeries(values=2.0 * values[None, :], hop=512, frame_length=2048, sample_rate=SR)
    assert loudness_peak_metrics(doubled) == metrics
    print(
        f"ACCEPTANCE 8 PASS: peak ({metrics.peak_time_s:.3f} s, "
        f"{metrics.relative_magnitude:.3f}), scaling invariance exact"
    )


def test_criterion_09_thread_count_determinism(pipeline_outputs):
    out = pipeline_outputs["dir"]
    res = run_cli(
        "extract", "--manifest", out / "manifest.json",
        "--threads", 8, "--out", out / "features_t8.csv",
    )
    assert res.returncode == 0, res.stderr
    assert (out / "features_t8.csv").read_bytes() == (out / "features.csv").read_bytes()
    print("ACCEPTANCE 9 PASS: --threads 1 and --threads 8 outputs byte-identical")


@pytest.mark.skipif(
    not (os.environ.get("AUDIOERA_GENERATED_DIR") and os.environ.get("AUDIOERA_ESC50_DIR")),
    reason="real corpora not available (set AUDIOERA_GENERATED_DIR and AUDIOERA_ESC50_DIR)",
)
def test_criterion_10_real_corpus_qualitative(tmp_path):
    """Optional, data-dependent: reproduce the qualitative variance findings.

    Expects AUDIOERA_GENERATED_DIR to hold stable_audio/, mmaudio/ and
    audioldm2/ trees laid out <model>/<label>/<id>.wav, and AUDIOERA_ESC50_DIR
    an ESC-50 checkout with meta/esc50.csv and audio/. Exact values are not
    expected to match published numbers; orderings and direction are.
    """
    generated = Path(os.environ["AUDIOERA_GENERATED_DIR"])
    esc50 = Path(os.environ["AUDIOERA_ESC50_DIR"])
    res = run_cli(
        "ingest",
        "--generated", f"stable_audio={generated / 'stable_audio'}",
        "--generated", f"mmaudio={generated / 'mmaudio'}",
        "--generated", f"audioldm2={generated / 'audioldm2'}",
        "--esc50-meta", esc50 / "meta" / "esc50.csv",
        "--esc50-audio", esc50 / "audio",
        "--out", tmp_path / "manifest.json",
    )
    assert res.returncode == 0, res.stderr
    res = run_cli(
        "extract", "--manifest", tmp_path / "manifest.json",
        "--threads", str(os.cpu_count() or 4), "--out", tmp_path / "features.csv",
    )
    assert res.returncode == 0, res.stderr
    res = run_cli(
        "variance", "--features", tmp_path / "features.csv",
        "--reference", "reference", "--out", tmp_path / "variance.csv",
    )
    assert res.returncode == 0, res.stderr

    rows = {}
    for line in (tmp_path / "variance.csv").read_text().strip().split("\n")[1:]:
        source, kind, value = line.split(",")
        rows[(source, kind)] = float(value)
    for kind in ("loudness", "pitch", "timbre"):
        assert rows[("stable_audio", kind)] > rows[("mmaudio", kind)] > rows[("audioldm2", kind)]
    for model in ("stable_audio", "mmaudio", "audioldm2"):
        assert rows[(model, "pitch")] > 1.0
        assert rows[(model, "loudness")] < 1.0
        assert rows[(model, "timbre")] < 1.0
    print("ACCEPTANCE 10 PASS: real-corpus orderings and deviation signs reproduced")
