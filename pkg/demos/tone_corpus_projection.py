"""Full pipeline on a synthetic corpus: manifest -> features -> PCA -> variance.

Builds a small on-disk corpus with three sources that differ in how varied
their "instrument" is:

* steady  - always the same 500 Hz tone
* roaming - a different random pitch every clip
* noisy   - unpitched noise bursts

then extracts the three per-clip feature vectors, projects the pitch vectors
of one label into 2D, and prints the per-source variance table normalized
against the roaming source. The roaming source reads 1.00 by construction;
the steady source lands near zero; the noise source simply has no pitch rows.

Run:  python demos/tone_corpus_projection.py
"""

import tempfile
from pathlib import Path

import numpy as np

from audioera import (
    assemble_feature_vectors,
    build_manifest,
    emit_era_svg,
    emit_variance_csv,
    encode_wav,
    era_projection_2d,
    load_clip,
    variance_summary,
)

SR = 22050
OUT = Path(__file__).parent / "output"


def write_corpus(root: Path, rng, clips_per_source=12):
    t = np.arange(2 * SR) / SR
    for i in range(clips_per_source):
        clips = {
            "steady": 0.5 * np.sin(2 * np.pi * 500.0 * t + rng.uniform(0, 6.28)),
            "roaming": 0.5 * np.sin(2 * np.pi * rng.uniform(150.0, 1500.0) * t),
            "noisy": 0.2 * rng.normal(size=len(t)) * np.hanning(len(t)),
        }
        for source, x in clips.items():
            path = root / source / "hum" / f"{i:02d}.wav"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(encode_wav(np.clip(x, -1, 1), SR))


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(42)

    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        write_corpus(root, rng)
        manifest = build_manifest(
            {name: root / name for name in ("steady", "roaming", "noisy")}
        )
        print(f"manifest: {len(manifest.entries)} clips, labels {sorted(manifest.labels)}")

        vectors = []
        for entry in manifest.entries:
            clip = load_clip(entry.file_path)
            ref = (entry.label, entry.source, entry.sample_id)
            vectors.extend(assemble_feature_vectors(clip, clip_ref=ref).values())

        pitch_rows = sum(1 for v in vectors if v.kind == "pitch")
        print(f"extracted {len(vectors)} vectors ({pitch_rows} pitch rows; noise is excluded)")

        projection = era_projection_2d(vectors, "hum", "pitch")
        svg_path = OUT / "tone_projection.svg"
        svg_path.write_text(emit_era_svg(projection))
        print(f"wrote {svg_path} ({len(projection.points)} points)")

        summary = variance_summary(vectors, reference_source="roaming")
        (OUT / "tone_variance.csv").write_text(emit_variance_csv(summary))
        print("normalized total variance (roaming = 1.00):")
        for (source, kind), value in sorted(summary.values.items()):
            print(f"  {source:>8} {kind:>9}: {value:6.3f}")


if __name__ == "__main__":
    main()
