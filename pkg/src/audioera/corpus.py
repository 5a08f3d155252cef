"""Corpus discovery and the manifest that unifies generated and reference sets.

A corpus is a set of audio files tagged (label, source, sample_id): generated
subsets live in per-source directory trees laid out ``<root>/<label>/<id>.wav``
(configurable glob), the reference subset comes from an ESC-50 style metadata
table mapping flat filenames to categories. Labels are normalized by
lowercasing and replacing underscores with spaces, so metadata categories and
prompt-style directory names compare equal.

The manifest serializes to a single deterministic JSON document.
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .errors import DecodeError, ManifestError, SchemaError

SUPPORTED_EXTENSIONS = {".wav"}
DEFAULT_LAYOUT = "*/*.wav"
_REQUIRED_ESC50_COLUMNS = ("filename", "target", "category")


def normalize_label(label: str) -> str:
    """Case-insensitive, underscore/space-insensitive label form. Idempotent."""
    return " ".join(label.strip().lower().replace("_", " ").split())


@dataclass(frozen=True)
class Esc50MetadataRow:
    filename: str
    target: int
    category: str  # normalized (spaces, lowercase)
    fold: str = ""
    take: str = ""
    esc10: str = ""
    src_file: str = ""


@dataclass(frozen=True)
class CorpusEntry:
    file_path: str
    label: str
    source: str
    sample_id: str


@dataclass(frozen=True)
class CorpusManifest:
    entries: list
    labels: set
    sources: set
    reference_source: Optional[str] = None


@dataclass(frozen=True)
class ValidationReport:
    cell_counts: dict  # (label, source) -> entry count, full grid
    missing_files: list
    decode_failures: list  # (path, message)

    @property
    def ok(self) -> bool:
        return not self.missing_files and not self.decode_failures


def load_esc50_metadata(csv_text: str) -> list[Esc50MetadataRow]:
    """Parse ESC-50 style metadata CSV text into rows.

    Categories are normalized ("crying_baby" -> "crying baby"). Raises
    SchemaError for a missing required column or a malformed target id.
    """
    reader = csv.DictReader(io.StringIO(csv_text))
    header = reader.fieldnames or []
    for column in _REQUIRED_ESC50_COLUMNS:
        if column not in header:
            raise SchemaError(f"metadata is missing required column {column!r}")

    rows = []
    for line_no, rec in enumerate(reader, start=2):
        try:
            target = int(rec["target"])
        except (TypeError, ValueError):
            raise SchemaError(
                f"line {line_no}: target {rec.get('target')!r} is not an integer"
            ) from None
        if not (0 <= target <= 49):
            raise SchemaError(f"line {line_no}: target {target} outside 0..49")
        rows.append(
            Esc50MetadataRow(
                filename=rec["filename"],
                target=target,
                category=normalize_label(rec["category"]),
                fold=rec.get("fold") or "",
                take=rec.get("take") or "",
                esc10=rec.get("esc10") or "",
                src_file=rec.get("src_file") or "",
            )
        )
    return rows


def _scan_generated(source: str, root: Path, layout: str) -> Iterable[CorpusEntry]:
    for path in sorted(root.glob(layout)):
        if not path.is_file() or path.suffix.lower() not in SUPPORTED_EXTENSIONS:
            continue
        rel = path.relative_to(root)
        if len(rel.parts) < 2:
            raise ManifestError(
                f"source {source!r}: {path} has no label directory under {root} "
                f"(layout {layout!r} must match <label>/.../<sample>.wav)"
            )
        yield CorpusEntry(
            file_path=str(path),
            label=normalize_label(rel.parts[0]),
            source=source,
            sample_id=path.stem,
        )


def build_manifest(
    root_dirs: dict,
    esc50_meta: Optional[list] = None,
    label_filter: Optional[set] = None,
    reference_source: str = "reference",
    layout: str = DEFAULT_LAYOUT,
) -> CorpusManifest:
    """Assemble a manifest from per-source roots (source name -> directory).

    When ``esc50_meta`` rows are given, the ``reference_source`` entry of
    ``root_dirs`` is treated as a flat directory of the metadata's filenames
    instead of a label tree. ``label_filter`` keeps only the listed labels
    (normalized). Output ordering is deterministic: (label, source, sample_id).
    """
    wanted = {normalize_label(l) for l in label_filter} if label_filter else None
    if esc50_meta is not None and reference_source not in root_dirs:
        raise ManifestError(
            f"ESC-50 metadata given but no {reference_source!r} directory in root_dirs"
        )

    entries: list[CorpusEntry] = []
    for source in sorted(root_dirs):
        root = Path(root_dirs[source])
        if esc50_meta is not None and source == reference_source:
            for row in esc50_meta:
                entries.append(
                    CorpusEntry(
                        file_path=str(root / row.filename),
                        label=row.category,
                        source=source,
                        sample_id=Path(row.filename).stem,
                    )
                )
        else:
            entries.extend(_scan_generated(source, root, layout))

    if wanted is not None:
        entries = [e for e in entries if e.label in wanted]

    seen = {}
    for entry in entries:
        key = (entry.label, entry.source, entry.sample_id)
        if key in seen:
            raise ManifestError(
                f"duplicate entry {key}: {seen[key]} and {entry.file_path}"
            )
        seen[key] = entry.file_path
    if not entries:
        raise ManifestError("no entries: the given roots contain no matching audio files")

    entries.sort(key=lambda e: (e.label, e.source, e.sample_id))
    return CorpusManifest(
        entries=entries,
        labels={e.label for e in entries},
        sources=set(root_dirs),
        reference_source=reference_source if esc50_meta is not None else None,
    )


def manifest_to_json(manifest: CorpusManifest) -> str:
    doc = {
        "entries": [
            {
                "file_path": e.file_path,
                "label": e.label,
                "source": e.source,
                "sample_id": e.sample_id,
            }
            for e in sorted(manifest.entries, key=lambda e: (e.label, e.source, e.sample_id))
        ],
        "labels": sorted(manifest.labels),
        "sources": sorted(manifest.sources),
        "reference_source": manifest.reference_source,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def manifest_from_json(text: str) -> CorpusManifest:
    try:
        doc = json.loads(text)
        entries = [CorpusEntry(**rec) for rec in doc["entries"]]
        return CorpusManifest(
            entries=entries,
            labels=set(doc["labels"]),
            sources=set(doc["sources"]),
            reference_source=doc.get("reference_source"),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"malformed manifest document: {exc}") from exc


def save_manifest(manifest: CorpusManifest, path) -> None:
    Path(path).write_text(manifest_to_json(manifest), encoding="utf-8")


def load_manifest(path) -> CorpusManifest:
    return manifest_from_json(Path(path).read_text(encoding="utf-8"))


def _probe_wav_header(path: Path) -> None:
    """Cheap sanity check: container magic, supported fmt, data chunk fits."""
    size = os.stat(path).st_size
    with open(path, "rb") as fh:
        head = fh.read(12)
        if len(head) < 12 or head[:4] != b"RIFF" or head[8:12] != b"WAVE":
            raise DecodeError("not a RIFF/WAVE stream")
        offset = 12
        saw_fmt = saw_data = False
        while offset + 8 <= size:
            fh.seek(offset)
            chunk_id, chunk_size = struct.unpack("<4sI", fh.read(8))
            if chunk_id == b"fmt ":
                fmt = fh.read(16)
                if len(fmt) < 16:
                    raise DecodeError(f"truncated fmt chunk at byte {offset}")
                tag, _ch, _rate, _br, _ba, bits = struct.unpack("<HHIIHH", fmt)
                if (tag, bits) not in ((1, 16), (1, 24), (3, 32)):
                    raise DecodeError(f"unsupported encoding {tag} ({bits}-bit)")
                saw_fmt = True
            elif chunk_id == b"data":
                if offset + 8 + chunk_size > size:
                    raise DecodeError(
                        f"truncated data chunk: need {offset + 8 + chunk_size} bytes, "
                        f"file ends at {size}"
                    )
                saw_data = True
            offset += 8 + chunk_size + (chunk_size & 1)
        if not saw_fmt or not saw_data:
            raise DecodeError("missing fmt or data chunk")


def validate_manifest(manifest: CorpusManifest, check_audio: bool = True) -> ValidationReport:
    """Count entries per (label, source) cell and flag unreadable files.

    The grid covers every label x source combination (zeros included). With
    ``check_audio`` each existing file gets a header-level decode probe; the
    manifest itself is never modified.
    """
    cells = {
        (label, source): 0
        for label in sorted(manifest.labels)
        for source in sorted(manifest.sources)
    }
    missing = []
    failures = []
    for entry in manifest.entries:
        cells[(entry.label, entry.source)] = cells.get((entry.label, entry.source), 0) + 1
        path = Path(entry.file_path)
        if path.suffix.lower() not in SUPPORTED_EXTENSIONS:
            failures.append((entry.file_path, f"unsupported extension {path.suffix!r}"))
            continue
        if not path.is_file():
            missing.append(entry.file_path)
            continue
        if check_audio:
            try:
                _probe_wav_header(path)
            except DecodeError as exc:
                failures.append((entry.file_path, str(exc)))
    return ValidationReport(cell_counts=cells, missing_files=missing, decode_failures=failures)
