"""audioera: expressive range analysis of audio corpora.

Decode clips into a canonical mono form, extract pitch/loudness/timbre
feature vectors and loudness-peak metrics per clip, project pooled corpora
into 2D PCA diagrams, and summarize per-source diversity as normalized total
variance against a reference subset.
"""

from .audio_io import (
    CANONICAL_RATE,
    AudioClip,
    RawAudio,
    decode_wav,
    encode_wav,
    load_clip,
    mixdown,
    resample,
)
from .corpus import (
    CorpusEntry,
    CorpusManifest,
    Esc50MetadataRow,
    ValidationReport,
    build_manifest,
    load_esc50_metadata,
    load_manifest,
    manifest_from_json,
    manifest_to_json,
    normalize_label,
    save_manifest,
    validate_manifest,
)
from .dsp import (
    FrameSeries,
    PowerSpectrogram,
    a_weight_gain,
    a_weighted_rms,
    hz_to_mel,
    mel_filterbank,
    mel_to_hz,
    mfcc,
    rms_series,
    stft_power,
)
from .era import (
    EraProjection,
    PcaModel,
    VarianceSummary,
    era_projection_2d,
    fit_pca,
    total_variance,
    transform,
    variance_summary,
)
from .errors import (
    AudioEraError,
    ConfigurationError,
    DecodeError,
    InsufficientDataError,
    ManifestError,
    SchemaError,
)
from .features import (
    KIND_DIMS,
    ExtractionConfig,
    FeatureVector,
    PeakMetrics,
    assemble_feature_vectors,
    delta,
    loudness_peak_metrics,
    summarize_stats,
)
from .pitch import F0Track, cmnd, pyin_track
from .report import (
    PlotSpec,
    emit_era_svg,
    emit_features_csv,
    emit_peaks_csv,
    emit_pgm,
    emit_projection_csv,
    emit_variance_csv,
    parse_features_csv,
    render_spectrogram,
)

__version__ = "0.1.0"
