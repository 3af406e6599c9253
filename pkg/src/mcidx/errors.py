"""Exception hierarchy shared across the package.

Split into two broad families so the CLI can map failures to exit codes:
``DataError`` (bad inputs, exit 2) and ``ProviderError`` (remote generation
or embedding endpoints, exit 3).
"""

from __future__ import annotations


class McIndexError(Exception):
    """Base class for all package errors."""


class DataError(McIndexError):
    """Invalid or inconsistent input data."""


class SchemaError(DataError):
    """A JSONL record does not match the expected schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateId(DataError):
    """An identifier that must be unique occurred twice."""


class EmptyDocument(DataError):
    """No non-whitespace content survived parsing."""


class EmptyCorpus(DataError):
    """An index was requested over zero units."""


class UnknownDoc(DataError):
    """A question references a document (or section) that is not present."""


class InvalidTarget(DataError):
    """Chunk target length below 1."""


class InvalidK(DataError):
    """Retrieval budget outside {1.5} and the positive integers."""


class ViewMismatch(DataError):
    """View indexes do not cover the same unit ids."""


class EmptyScope(DataError):
    """An answer scope with zero characters cannot be scored."""


class EmptyRetrieval(DataError):
    """Answer generation requires at least one retrieved text."""


class CorruptIndex(DataError):
    """A persisted index failed checksum verification."""


class VersionMismatch(DataError):
    """A persisted index uses an unsupported format version."""


class DimensionMismatch(DataError):
    """An embedding provider returned rows of differing lengths."""


class ProviderMismatch(DataError):
    """A dense index was built with a different provider than supplied."""


class ProviderError(McIndexError):
    """A generation or embedding endpoint failed (after retries)."""


class ParseError(McIndexError):
    """Provider output could not be parsed into the expected shape."""
