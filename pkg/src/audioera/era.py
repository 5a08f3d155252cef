"""PCA projections and normalized total-variance summaries.

Two analyses share the PCA core:

* per-label 2D projections for scatter diagrams, fit on the pooled rows of
  every source (generators plus reference) for that label;
* a corpus-wide variance table: per feature kind, fit PCA on all rows pooled
  across labels and sources at a retained-variance fraction, take the trace
  of each source's covariance in the transformed space, and divide by the
  reference source's trace.

Rows are pooled in a canonical sort order so results do not depend on input
ordering or thread count. Covariances use the sample convention (n - 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InsufficientDataError
from .features import FeatureVector


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (r, d), orthonormal rows
    eigenvalues: np.ndarray  # descending
    explained_variance_ratio: np.ndarray
    scale: Optional[np.ndarray] = None  # set when fit with standardize=True


@dataclass(frozen=True)
class EraProjection:
    label: str
    kind: str
    points: list  # (source, sample_id, pc1, pc2)
    explained: tuple  # (ratio1, ratio2)

    def counts_by_source(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for source, _sid, _x, _y in self.points:
            counts[source] = counts.get(source, 0) + 1
        return counts


@dataclass(frozen=True)
class VarianceSummary:
    values: dict  # (source, kind) -> normalized total variance
    counts: dict  # (source, kind) -> row count entering the subset
    means: dict  # source -> arithmetic mean over kinds (unrounded inputs)
    reference_source: str
    kinds: tuple


def fit_pca(data: np.ndarray, retain, standardize: bool = False) -> PcaModel:
    """Fit principal components on rows of ``data``.

    ``retain`` is either an int (component count) or a float in (0, 1]
    (smallest count whose cumulative explained-variance ratio reaches it).
    Data is centered internally; per-feature unit-variance scaling only
    with ``standardize``. Component signs are fixed so each row's
    largest-magnitude entry is positive.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] < 1:
        raise ValueError("data must be a 2-D matrix with at least one column")
    if x.shape[0] < 2:
        raise InsufficientDataError(f"PCA needs at least 2 rows, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("data contains non-finite values")

    n = x.shape[0]
    mean = x.mean(axis=0)
    centered = x - mean
    scale = None
    if standardize:
        scale = centered.std(axis=0, ddof=1)
        scale = np.where(scale == 0.0, 1.0, scale)
        centered = centered / scale

    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    eigenvalues = singular**2 / (n - 1)
    total = eigenvalues.sum()
    ratios = eigenvalues / total if total > 0.0 else np.zeros_like(eigenvalues)

    if isinstance(retain, (int, np.integer)) and not isinstance(retain, bool):
        r = int(min(retain, len(eigenvalues)))
        if retain < 1:
            raise ValueError("component count must be >= 1")
    else:
        fraction = float(retain)
        if not (0.0 < fraction <= 1.0):
            raise ValueError("variance fraction must be in (0, 1]")
        reached = np.cumsum(ratios) >= fraction - 1e-12
        r = int(np.argmax(reached)) + 1 if reached.any() else len(eigenvalues)

    components = vt[:r].copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0.0:
            row *= -1.0
    return PcaModel(
        mean=mean,
        components=components,
        eigenvalues=eigenvalues[:r],
        explained_variance_ratio=ratios[:r],
        scale=scale,
    )


def transform(model: PcaModel, data: np.ndarray) -> np.ndarray:
    """Project rows into the component space: (data - mean) @ components.T."""
    x = np.asarray(data, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != len(model.mean):
        raise ValueError(
            f"dimension mismatch: model expects {len(model.mean)} features, got {x.shape[1]}"
        )
    centered = x - model.mean
    if model.scale is not None:
        centered = centered / model.scale
    return centered @ model.components.T


def total_variance(transformed: np.ndarray) -> float:
    """Trace of the sample covariance of the rows (sum of column variances)."""
    z = np.asarray(transformed, dtype=np.float64)
    if z.ndim == 1:
        z = z[:, None]
    if z.shape[0] < 2:
        raise InsufficientDataError(f"total_variance needs at least 2 rows, got {z.shape[0]}")
    return float(np.sum(z.var(axis=0, ddof=1)))


def _pooled_rows(
    vectors: Iterable[FeatureVector], kind: str, label: Optional[str] = None
) -> list[FeatureVector]:
    rows = [
        fv
        for fv in vectors
        if fv.kind == kind and (label is None or fv.clip_ref[0] == label)
    ]
    # Canonical order makes every float accumulation independent of input order.
    rows.sort(key=lambda fv: fv.clip_ref)
    return rows


def era_projection_2d(
    vectors: Sequence[FeatureVector],
    label: str,
    kind: str,
    standardize: bool = False,
) -> EraProjection:
    """2-component projection of one label's pooled rows for one kind."""
    rows = _pooled_rows(vectors, kind, label)
    if len(rows) < 3:
        raise InsufficientDataError(
            f"label {label!r} kind {kind!r}: need at least 3 rows, got {len(rows)}"
        )
    matrix = np.stack([fv.values for fv in rows])
    model = fit_pca(matrix, retain=2, standardize=standardize)
    coords = transform(model, matrix)
    points = [
        (fv.clip_ref[1], fv.clip_ref[2], float(z[0]), float(z[1]))
        for fv, z in zip(rows, coords)
    ]
    ratios = model.explained_variance_ratio
    return EraProjection(
        label=label,
        kind=kind,
        points=points,
        explained=(float(ratios[0]), float(ratios[1])),
    )


def variance_summary(
    vectors: Sequence[FeatureVector],
    reference_source: str,
    retain: float = 0.95,
    standardize: bool = False,
) -> VarianceSummary:
    """Normalized total variance per (source, kind), reference rows = 1.0.

    Per kind, PCA is fit on all rows pooled across labels and sources, each
    source's rows are projected, and the trace of the projected covariance is
    divided by the reference source's trace. Sources with fewer than two rows
    for a kind get no cell (their count is still reported).
    """
    vectors = list(vectors)
    kinds = tuple(sorted({fv.kind for fv in vectors}))
    sources = sorted({fv.clip_ref[1] for fv in vectors})
    if reference_source not in sources:
        raise ConfigurationError(f"reference source {reference_source!r} has no feature rows")

    values: dict = {}
    counts: dict = {}
    for kind in kinds:
        rows = _pooled_rows(vectors, kind)
        by_source: dict[str, list[np.ndarray]] = {}
        for fv in rows:
            by_source.setdefault(fv.clip_ref[1], []).append(fv.values)
        for source in sources:
            counts[(source, kind)] = len(by_source.get(source, ()))
        if len(by_source.get(reference_source, ())) < 2:
            raise ConfigurationError(
                f"reference source {reference_source!r} has fewer than 2 rows for kind {kind!r}"
            )
        matrix = np.stack([fv.values for fv in rows])
        model = fit_pca(matrix, retain=retain, standardize=standardize)
        reference_tv = total_variance(transform(model, np.stack(by_source[reference_source])))
        if reference_tv == 0.0:
            raise ConfigurationError(
                f"reference source {reference_source!r} has zero variance for kind {kind!r}"
            )
        for source in sources:
            rows_s = by_source.get(source, ())
            if len(rows_s) < 2:
                continue
            values[(source, kind)] = (
                total_variance(transform(model, np.stack(rows_s))) / reference_tv
            )

    means = {}
    for source in sources:
        cell_values = [values[(source, k)] for k in kinds if (source, k) in values]
        if cell_values:
            means[source] = float(np.mean(cell_values))
    return VarianceSummary(
        values=values,
        counts=counts,
        means=means,
        reference_source=reference_source,
        kinds=kinds,
    )
