"""Exception hierarchy shared across the toolkit.

The CLI maps these onto process exit codes: decode/validation/configuration
problems exit 3, insufficient-data conditions exit 4.
"""


class AudioEraError(Exception):
    """Base class for all toolkit errors."""


class DecodeError(AudioEraError):
    """An audio file could not be decoded."""


class SchemaError(AudioEraError):
    """A tabular input (CSV) is malformed or missing required columns."""


class ManifestError(AudioEraError):
    """A corpus manifest is inconsistent (duplicates, no entries)."""


class ConfigurationError(AudioEraError):
    """A parameter combination cannot produce a valid analysis."""


class InsufficientDataError(AudioEraError):
    """Too few rows/samples for the requested statistic."""
