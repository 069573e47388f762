"""Diagnostics for debugging corpus loading, lexicon parsing and searches.

Counters are shared by the worker threads of a search, so every update
happens under a lock.
"""

from __future__ import annotations

import threading
import time
from collections import Counter
from collections.abc import Mapping
from contextlib import contextmanager
from typing import Any, Generator

__all__ = [
    "Diagnostics",
    "get_diagnostics",
    "reset",
]


class Diagnostics:
    """Counters and latency totals for one area of the library."""

    def __init__(self) -> None:
        """Initialize Diagnostics."""
        self._lock = threading.Lock()
        self._counter: Counter[str] = Counter()

    def increment(self, key: str, count: int = 1) -> None:
        """Increment a counter for the specified key/event."""
        with self._lock:
            self._counter[key] += count

    def update(self, counts: Mapping[str, int]) -> None:
        """Add a batch of counts, e.g. the tally of one scanned document."""
        with self._lock:
            self._counter.update(counts)

    def elapsed(self, key_prefix: str, elapsed_ms: int = 1) -> None:
        """Track a latency event for the specified key/event prefix."""
        self.update({f"{key_prefix}_count": 1, f"{key_prefix}_sum": elapsed_ms})

    @contextmanager
    def timer(self, key_prefix: str) -> Generator[None, None, None]:
        """A context manager that records the timing of operations as a diagnostic."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.elapsed(key_prefix, int((time.perf_counter() - start) * 1000))

    def as_dict(self) -> Mapping[str, Any]:
        """Return diagnostics as a debug dictionary."""
        with self._lock:
            return {k: self._counter[k] for k in sorted(self._counter)}

    def reset(self) -> None:
        """Clear all diagnostics, for testing."""
        with self._lock:
            self._counter = Counter()


CORPUS_DIAGNOSTICS = Diagnostics()
LEXICON_DIAGNOSTICS = Diagnostics()
SEARCH_DIAGNOSTICS = Diagnostics()

MAP = {
    "corpus": CORPUS_DIAGNOSTICS,
    "lexicon": LEXICON_DIAGNOSTICS,
    "search": SEARCH_DIAGNOSTICS,
}


def reset() -> None:
    """Clear all diagnostics, for testing."""
    for diagnostics in MAP.values():
        diagnostics.reset()


def get_diagnostics() -> dict[str, Any]:
    """Produce diagnostics information for the library."""
    return {k: v.as_dict() for (k, v) in MAP.items() if v.as_dict()}
