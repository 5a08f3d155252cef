"""Command-line interface.

Subcommands mirror the pipeline: ``ingest`` builds a corpus manifest,
``extract`` writes the per-clip feature table, ``peaks`` the loudness-peak
table, ``era`` a per-label 2D projection (CSV + SVG), ``variance`` the
normalized total-variance table, and ``render-spectrogram`` a PGM image.

Exit codes: 0 success, 2 usage error, 3 data error (decode/validation),
4 insufficient data.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .audio_io import load_clip
from .corpus import (
    CorpusManifest,
    build_manifest,
    load_esc50_metadata,
    load_manifest,
    save_manifest,
)
from .dsp import a_weighted_rms, rms_series
from .era import era_projection_2d, variance_summary
from .errors import AudioEraError, DecodeError, InsufficientDataError
from .features import ExtractionConfig, assemble_feature_vectors, loudness_peak_metrics
from .report import (
    emit_era_svg,
    emit_features_csv,
    emit_peaks_csv,
    emit_pgm,
    emit_projection_csv,
    emit_variance_csv,
    parse_features_csv,
    render_spectrogram,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INSUFFICIENT = 4


def _parse_source_dir(value: str) -> tuple[str, str]:
    name, sep, path = value.partition("=")
    if not sep or not name or not path:
        raise argparse.ArgumentTypeError(f"expected <source>=<dir>, got {value!r}")
    return name, path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="audioera",
        description="Expressive range analysis of audio corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="discover corpora and write a manifest")
    p.add_argument(
        "--generated",
        action="append",
        default=[],
        type=_parse_source_dir,
        metavar="SOURCE=DIR",
        help="generated subset root, repeatable",
    )
    p.add_argument("--esc50-meta", metavar="CSV", help="ESC-50 metadata table")
    p.add_argument("--esc50-audio", metavar="DIR", help="ESC-50 audio directory")
    p.add_argument("--labels", metavar="A,B,...", help="keep only these labels")
    p.add_argument("--layout", default="*/*.wav", help="glob for generated trees")
    p.add_argument("--out", required=True, metavar="MANIFEST")

    p = sub.add_parser("extract", help="write per-clip feature vectors as CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--sample-rate", type=int, default=22050)
    p.add_argument("--hop", type=int, default=512)
    p.add_argument("--frame", type=int, default=2048)
    p.add_argument("--n-mels", type=int, default=128)
    p.add_argument("--n-mfcc", type=int, default=13)
    p.add_argument("--rms-frame", type=int, default=2048)
    p.add_argument("--fmin", type=float, default=65.4)
    p.add_argument("--fmax", type=float, default=2093.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, metavar="CSV")

    p = sub.add_parser("peaks", help="write loudness-peak metrics as CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--peaks-weighted", action="store_true", help="A-weight the RMS series")
    p.add_argument("--sample-rate", type=int, default=22050)
    p.add_argument("--out", required=True, metavar="CSV")

    p = sub.add_parser("era", help="2D projection for one label and kind")
    p.add_argument("--features", required=True, metavar="CSV")
    p.add_argument("--label", required=True)
    p.add_argument("--kind", required=True, choices=["pitch", "loudness", "timbre"])
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg", required=True)

    p = sub.add_parser("variance", help="normalized total-variance table")
    p.add_argument("--features", required=True, metavar="CSV")
    p.add_argument("--reference", required=True, metavar="SOURCE")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--retain", type=float, default=0.95)
    p.add_argument("--out", required=True, metavar="CSV")

    p = sub.add_parser("render-spectrogram", help="grayscale PGM spectrogram")
    p.add_argument("--in", dest="input", required=True, metavar="WAV")
    p.add_argument("--out", required=True, metavar="PGM")

    return parser


def _cmd_ingest(args) -> int:
    if not args.generated and not args.esc50_meta:
        raise AudioEraError("nothing to ingest: give --generated and/or --esc50-meta")
    root_dirs = dict(args.generated)
    esc50_rows = None
    if args.esc50_meta:
        if not args.esc50_audio:
            raise AudioEraError("--esc50-meta requires --esc50-audio")
        esc50_rows = load_esc50_metadata(Path(args.esc50_meta).read_text(encoding="utf-8"))
        root_dirs["reference"] = args.esc50_audio
    label_filter = set(args.labels.split(",")) if args.labels else None
    manifest = build_manifest(
        root_dirs, esc50_meta=esc50_rows, label_filter=label_filter, layout=args.layout
    )
    save_manifest(manifest, args.out)
    print(
        f"wrote {args.out}: {len(manifest.entries)} entries, "
        f"{len(manifest.labels)} labels, {len(manifest.sources)} sources"
    )
    return EXIT_OK


def _extract_one(entry, config: ExtractionConfig):
    ref = (entry.label, entry.source, entry.sample_id)
    try:
        clip = load_clip(entry.file_path, target_rate=config.sample_rate)
        return list(assemble_feature_vectors(clip, config, clip_ref=ref).values())
    except (AudioEraError, ValueError) as exc:
        raise DecodeError(f"{'/'.join(ref)}: {exc}") from exc


def _cmd_extract(args) -> int:
    manifest = load_manifest(args.manifest)
    config = ExtractionConfig(
        sample_rate=args.sample_rate,
        frame_length=args.frame,
        hop=args.hop,
        n_mels=args.n_mels,
        n_mfcc=args.n_mfcc,
        rms_frame_length=args.rms_frame,
        fmin=args.fmin,
        fmax=args.fmax,
    )
    entries = manifest.entries
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            per_clip = list(pool.map(lambda e: _extract_one(e, config), entries))
    else:
        per_clip = [_extract_one(e, config) for e in entries]
    vectors = [fv for group in per_clip for fv in group]
    Path(args.out).write_text(emit_features_csv(vectors), encoding="utf-8")
    print(f"wrote {args.out}: {len(vectors)} vectors from {len(entries)} clips")
    return EXIT_OK


def _cmd_peaks(args) -> int:
    manifest: CorpusManifest = load_manifest(args.manifest)
    rows = []
    for entry in manifest.entries:
        try:
            clip = load_clip(entry.file_path, target_rate=args.sample_rate)
            series = a_weighted_rms(clip) if args.peaks_weighted else rms_series(clip)
        except (AudioEraError, ValueError) as exc:
            raise DecodeError(
                f"{entry.label}/{entry.source}/{entry.sample_id}: {exc}"
            ) from exc
        rows.append((entry.label, entry.source, entry.sample_id, loudness_peak_metrics(series)))
    Path(args.out).write_text(emit_peaks_csv(rows), encoding="utf-8")
    print(f"wrote {args.out}: {len(rows)} clips")
    return EXIT_OK


def _cmd_era(args) -> int:
    vectors = parse_features_csv(Path(args.features).read_text(encoding="utf-8"))
    projection = era_projection_2d(vectors, args.label, args.kind, standardize=args.standardize)
    sources = {fv.clip_ref[1] for fv in vectors}
    reference = "reference" if "reference" in sources else None
    Path(args.out_csv).write_text(emit_projection_csv(projection), encoding="utf-8")
    Path(args.out_svg).write_text(
        emit_era_svg(projection, reference_source=reference), encoding="utf-8"
    )
    counts = ", ".join(f"{s}={n}" for s, n in sorted(projection.counts_by_source().items()))
    print(f"wrote {args.out_csv} and {args.out_svg}: {len(projection.points)} points ({counts})")
    return EXIT_OK


def _cmd_variance(args) -> int:
    vectors = parse_features_csv(Path(args.features).read_text(encoding="utf-8"))
    summary = variance_summary(
        vectors, args.reference, retain=args.retain, standardize=args.standardize
    )
    Path(args.out).write_text(emit_variance_csv(summary), encoding="utf-8")
    print(f"wrote {args.out}: {len(summary.values)} cells, reference {args.reference}")
    return EXIT_OK


def _cmd_render_spectrogram(args) -> int:
    clip = load_clip(args.input)
    Path(args.out).write_bytes(emit_pgm(render_spectrogram(clip)))
    print(f"wrote {args.out}")
    return EXIT_OK


_HANDLERS = {
    "ingest": _cmd_ingest,
    "extract": _cmd_extract,
    "peaks": _cmd_peaks,
    "era": _cmd_era,
    "variance": _cmd_variance,
    "render-spectrogram": _cmd_render_spectrogram,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except (AudioEraError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
