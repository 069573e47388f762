"""Library for exceptions raised while loading, scoring and searching."""

from __future__ import annotations


class AllusioException(Exception):
    """Base class for all library exceptions."""


class CorpusException(AllusioException):
    """Raised during problems loading corpus documents."""


class EncodingException(CorpusException):
    """Raised when a corpus file is not valid UTF-8."""

    def __init__(self, path: str, offset: int) -> None:
        """Initialize EncodingException."""
        super().__init__(f"{path}: invalid UTF-8 at byte offset {offset}")
        self.path = path
        self.offset = offset


class LexiconException(AllusioException):
    """Raised when a lexicon table line is malformed or conflicting."""

    def __init__(self, path: str, line: int, reason: str) -> None:
        """Initialize LexiconException."""
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class QueryException(AllusioException):
    """Raised when a query has nothing to search for."""


class ScoringException(AllusioException):
    """Raised when a scoring precondition does not hold."""


class ConfigurationException(AllusioException):
    """Raised due to misconfiguration problems."""
