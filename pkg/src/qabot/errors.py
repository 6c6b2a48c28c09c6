"""Exception types shared across the engine.

The CLI maps these onto exit codes: data validation problems exit 1,
io/config/provider problems exit 2.
"""


class EngineError(Exception):
    """Base class for all engine errors."""


class SchemaError(EngineError):
    """Input data does not match the expected schema (missing column, malformed row)."""


class ConfigError(EngineError):
    """A configuration value is out of its allowed range or inconsistent."""


class DegenerateInputError(EngineError):
    """Input text is empty after cleaning, or produces an all-zero embedding."""


class ProviderError(EngineError):
    """An embedding provider failed (unreachable, bad response, not fitted)."""


class ValidationError(EngineError):
    """A runtime validation failed (e.g. an eval scenario references an unknown record)."""


class StateError(EngineError):
    """An operation was invoked on an object in the wrong state (e.g. no bundle loaded)."""


class BundleError(EngineError):
    """Base class for persisted-bundle problems."""


class BundleMissingFileError(BundleError):
    """A required bundle file is absent."""


class BundleVersionError(BundleError):
    """The bundle manifest declares an unsupported format version."""


class BundleChecksumError(BundleError):
    """A bundle file does not match its manifest checksum."""


class BundleConsistencyError(BundleError):
    """Bundle parts disagree (corpus size, index size, Q-table shape)."""
