"""Emitters for every artifact the toolkit writes.

Everything here is a pure function from data to text or bytes, with no
timestamps and '.'-decimal number formatting, so identical inputs always
produce byte-identical files. Scatter plots are emitted as standalone SVG
(text-diffable, no imaging dependency); spectrograms as binary PGM.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .audio_io import AudioClip
from .dsp import stft_power
from .era import EraProjection, VarianceSummary
from .errors import SchemaError
from .features import KIND_DIMS, FeatureVector

MAX_DIM = max(KIND_DIMS.values())

# Fixed palette; color index comes from the source's rank in sorted order.
PALETTE = (
    "#1f77b4",  # blue
    "#d62728",  # red
    "#2ca02c",  # green
    "#ff7f0e",  # orange
    "#9467bd",  # purple
    "#8c564b",  # brown
    "#e377c2",  # pink
    "#7f7f7f",  # gray
)


@dataclass(frozen=True)
class PlotSpec:
    title: str
    x_label: str
    y_label: str
    series: list = field(default_factory=list)  # (name, color, [(x, y), ...])
    width: int = 640
    height: int = 480


# ---------------------------------------------------------------------------
# CSV tables
# ---------------------------------------------------------------------------

_FEATURE_HEADER = ["label", "source", "sample_id", "kind", "dim"] + [
    f"v{i}" for i in range(MAX_DIM)
]


def emit_features_csv(vectors: Iterable[FeatureVector]) -> str:
    """Feature table with constant column count; short kinds leave v12.. empty."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_FEATURE_HEADER)
    rows = sorted(vectors, key=lambda fv: (*fv.clip_ref, fv.kind))
    for fv in rows:
        label, source, sample_id = fv.clip_ref
        cells = [repr(float(v)) for v in fv.values]
        cells += [""] * (MAX_DIM - len(cells))
        writer.writerow([label, source, sample_id, fv.kind, fv.dim] + cells)
    return buf.getvalue()


def parse_features_csv(text: str) -> list[FeatureVector]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != _FEATURE_HEADER:
        raise SchemaError("unrecognized feature CSV header")
    vectors = []
    for line_no, row in enumerate(reader, start=2):
        try:
            label, source, sample_id, kind, dim = row[:5]
            values = np.array([float(v) for v in row[5 : 5 + int(dim)]])
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"line {line_no}: {exc}") from None
        vectors.append(
            FeatureVector(kind=kind, values=values, clip_ref=(label, source, sample_id))
        )
    return vectors


def emit_peaks_csv(rows: Iterable[tuple]) -> str:
    """Rows of (label, source, sample_id, PeakMetrics)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "source", "sample_id", "peak_time_s", "relative_magnitude"])
    for label, source, sample_id, metrics in sorted(rows, key=lambda r: r[:3]):
        writer.writerow(
            [label, source, sample_id, repr(metrics.peak_time_s), repr(metrics.relative_magnitude)]
        )
    return buf.getvalue()


def emit_projection_csv(projection: EraProjection) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label", "kind", "source", "sample_id", "pc1", "pc2"])
    for source, sample_id, pc1, pc2 in projection.points:
        writer.writerow([projection.label, projection.kind, source, sample_id, repr(pc1), repr(pc2)])
    return buf.getvalue()


def emit_variance_csv(summary: VarianceSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "kind", "normalized_total_variance"])
    sources = sorted({source for source, _ in summary.values})
    for kind in summary.kinds:
        for source in sources:
            if (source, kind) in summary.values:
                writer.writerow([source, kind, repr(summary.values[(source, kind)])])
    for source in sources:
        if source in summary.means:
            writer.writerow([source, "mean", repr(summary.means[source])])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# SVG scatter diagrams
# ---------------------------------------------------------------------------


def source_colors(sources: Iterable[str]) -> dict[str, str]:
    ordered = sorted(set(sources))
    return {name: PALETTE[i % len(PALETTE)] for i, name in enumerate(ordered)}


def _series_from_points(
    points: Sequence[tuple], reference_source: Optional[str]
) -> list[tuple]:
    """Group (source, x, y) triples into draw-ordered, colored series."""
    by_source: dict[str, list] = {}
    for source, x, y in points:
        by_source.setdefault(source, []).append((float(x), float(y)))
    colors = source_colors(by_source)
    order = sorted(by_source)
    if reference_source in by_source:
        order.remove(reference_source)
        order.append(reference_source)  # reference drawn last, on top
    return [(name, colors[name], by_source[name]) for name in order]


def projection_plot_spec(
    projection: EraProjection, reference_source: Optional[str] = None
) -> PlotSpec:
    ex1, ex2 = projection.explained
    return PlotSpec(
        title=f"{projection.label}: {projection.kind}",
        x_label=f"PC1 ({100.0 * ex1:.1f}%)",
        y_label=f"PC2 ({100.0 * ex2:.1f}%)",
        series=_series_from_points(
            [(src, x, y) for src, _sid, x, y in projection.points], reference_source
        ),
    )


def peaks_plot_spec(
    rows: Sequence[tuple],
    title: str = "Loudness peaks",
    reference_source: Optional[str] = None,
) -> PlotSpec:
    """Rows of (source, sample_id, PeakMetrics)."""
    return PlotSpec(
        title=title,
        x_label="Peak time (s)",
        y_label="Peak / mean loudness",
        series=_series_from_points(
            [(src, m.peak_time_s, m.relative_magnitude) for src, _sid, m in rows],
            reference_source,
        ),
    )


def emit_era_svg(data, spec: Optional[PlotSpec] = None, reference_source: Optional[str] = None) -> str:
    """Render a scatter diagram as SVG text.

    ``data`` is an EraProjection or a sequence of (source, sample_id,
    PeakMetrics) rows; pass ``spec`` to override titles/size. Byte output is
    deterministic for identical input.
    """
    if spec is None or not spec.series:
        if isinstance(data, EraProjection):
            built = projection_plot_spec(data, reference_source)
        else:
            built = peaks_plot_spec(list(data), reference_source=reference_source)
        if spec is not None:
            built = PlotSpec(
                title=spec.title or built.title,
                x_label=spec.x_label or built.x_label,
                y_label=spec.y_label or built.y_label,
                series=built.series,
                width=spec.width,
                height=spec.height,
            )
        spec = built
    return _scatter_svg(spec)


def _axis_range(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return lo - 1.0, hi + 1.0  # degenerate range padded by one unit
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _scatter_svg(spec: PlotSpec) -> str:
    names = [name for name, _c, _p in spec.series]
    if len(set(names)) != len(names):
        raise ValueError("series names must be unique")
    all_points = [pt for _n, _c, pts in spec.series for pt in pts]
    if not all_points:
        raise ValueError("cannot plot zero points")

    width, height = spec.width, spec.height
    margin_l, margin_r, margin_t, margin_b = 62, 24, 42, 52
    x0, x1 = _axis_range([p[0] for p in all_points])
    y0, y1 = _axis_range([p[1] for p in all_points])

    def sx(x: float) -> float:
        return margin_l + (x - x0) / (x1 - x0) * (width - margin_l - margin_r)

    def sy(y: float) -> float:
        return height - margin_b - (y - y0) / (y1 - y0) * (height - margin_t - margin_b)

    def esc(text: str) -> str:
        return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")

    out = []
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    out.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    out.append(
        f'<text x="{width / 2:.2f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{esc(spec.title)}</text>'
    )
    # axis frame and end-value ticks
    fx0, fx1 = sx(x0), sx(x1)
    fy0, fy1 = sy(y0), sy(y1)
    out.append(
        f'<rect x="{fx0:.2f}" y="{fy1:.2f}" width="{fx1 - fx0:.2f}" '
        f'height="{fy0 - fy1:.2f}" fill="none" stroke="#333333" stroke-width="1"/>'
    )
    tick_font = 'font-family="sans-serif" font-size="11" fill="#333333"'
    out.append(f'<text x="{fx0:.2f}" y="{fy0 + 16:.2f}" text-anchor="middle" {tick_font}>{x0:.3g}</text>')
    out.append(f'<text x="{fx1:.2f}" y="{fy0 + 16:.2f}" text-anchor="middle" {tick_font}>{x1:.3g}</text>')
    out.append(f'<text x="{fx0 - 6:.2f}" y="{fy0:.2f}" text-anchor="end" {tick_font}>{y0:.3g}</text>')
    out.append(f'<text x="{fx0 - 6:.2f}" y="{fy1 + 4:.2f}" text-anchor="end" {tick_font}>{y1:.3g}</text>')
    out.append(
        f'<text x="{(fx0 + fx1) / 2:.2f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{esc(spec.x_label)}</text>'
    )
    out.append(
        f'<text x="16" y="{(fy0 + fy1) / 2:.2f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {(fy0 + fy1) / 2:.2f})">{esc(spec.y_label)}</text>'
    )
    for name, color, pts in spec.series:
        for x, y in pts:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}" fill-opacity="0.65"/>')
    # legend, one entry per series in color-assignment (sorted-name) order
    for i, (name, color) in enumerate(sorted((n, c) for n, c, _p in spec.series)):
        ly = margin_t + 8 + 16 * i
        out.append(f'<rect x="{margin_l + 8}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(
            f'<text x="{margin_l + 22}" y="{ly}" font-family="sans-serif" '
            f'font-size="12">{esc(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Spectrogram images
# ---------------------------------------------------------------------------


def render_spectrogram(
    clip: AudioClip,
    frame_length: int = 2048,
    hop: int = 512,
    dynamic_range_db: float = 80.0,
) -> np.ndarray:
    """Grayscale spectrogram image as a uint8 matrix.

    Rows are frequency bins with the lowest bin at the bottom, columns are
    frames. Power is shown in dB clipped to [max - dynamic_range, max]; a
    constant-power clip (silence) renders at the floor.
    """
    spec = stft_power(clip, frame_length=frame_length, hop=hop)
    db = 10.0 * np.log10(np.maximum(spec.values, 1e-10))
    top = db.max()
    lo = top - dynamic_range_db
    if db.min() == top:
        image = np.zeros(db.shape, dtype=np.uint8)
    else:
        scaled = (np.clip(db, lo, top) - lo) / dynamic_range_db
        image = np.round(scaled * 255.0).astype(np.uint8)
    return np.flipud(image)


def emit_pgm(image: np.ndarray) -> bytes:
    """Binary PGM (P5, maxval 255) of a uint8 image matrix."""
    arr = np.asarray(image, dtype=np.uint8)
    height, width = arr.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + arr.tobytes()
