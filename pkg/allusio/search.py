"""Sliding window search over a corpus with a global, deterministic ranking.

Every document is cut into overlapping token windows, each window is scored
against the query, and the hits of all documents are merged into one
ranking. Documents are split into scan tasks holding only normalized forms
and a table of the forms that match the query; large corpora are scanned on
a process pool. The merge sorts on (score, document id, window start) so the
result does not depend on the order in which tasks finish, and the full
breakdown is only built for the returned results.

Example usage:
```
    query = Query.from_text("arma virumque cano")
    lexicon = prepare_lexicon(load_lexicon_dir("lexicon/"), corpus)
    for result in search(corpus, query, lexicon):
        print(result.document_id, result.breakdown.combined)
```
"""

from __future__ import annotations

import asyncio
import bisect
import concurrent.futures
import itertools
import logging
import os
from collections.abc import Callable, Iterable, Iterator, Mapping
from dataclasses import dataclass
from typing import Final, NamedTuple, TypeVar

from .corpus import Corpus, Document
from .diagnostics import SEARCH_DIAGNOSTICS as DIAGNOSTICS
from .exceptions import ConfigurationException
from .lexicon import Lexicon
from .model import ResultDataClass
from .scoring import MatchEntry, Query, QueryMatcher, ScoreBreakdown, score_norms
from .tokenizer import Token

__all__ = [
    "SearchParams",
    "RankedResult",
    "windows",
    "window_at",
    "scan_document",
    "suppress_overlaps",
    "rank_results",
    "worker_count",
    "async_search",
    "search",
]

_LOGGER = logging.getLogger(__name__)

THREADS_ENV: Final = "ALLUSIO_THREADS"

MIN_WINDOW_SIZE = 30
WINDOW_QUERY_FACTOR = 3
DEFAULT_TOP_K = 50

# Tokens scanned by one task
TASK_TOKENS = 50_000
# Corpora with fewer tokens are scanned on a thread
PROCESS_POOL_MIN_TOKENS = 200_000

_T = TypeVar("_T")


@dataclass(frozen=True)
class SearchParams:
    """Window geometry and result limits for one search."""

    window_size: int
    stride: int
    top_k: int = DEFAULT_TOP_K
    min_score: float = 0.0

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ConfigurationException(
                f"window size must be >= 1: {self.window_size}"
            )
        if not 1 <= self.stride <= self.window_size:
            raise ConfigurationException(
                f"stride must be between 1 and the window size: {self.stride}"
            )
        if self.top_k < 1:
            raise ConfigurationException(f"top must be >= 1: {self.top_k}")
        if self.min_score < 0:
            raise ConfigurationException(f"min score must be >= 0: {self.min_score}")

    @classmethod
    def for_query(
        cls,
        query_length: int,
        window_size: int | None = None,
        stride: int | None = None,
        top_k: int | None = None,
        min_score: float | None = None,
    ) -> SearchParams:
        """Return parameters with defaults derived from the query length.

        The window holds at least three times the query so a quotation with
        insertions fits, and windows overlap by half.
        """
        if window_size is None:
            window_size = max(MIN_WINDOW_SIZE, WINDOW_QUERY_FACTOR * query_length)
        if stride is None:
            stride = max(1, window_size // 2)
        return cls(
            window_size=window_size,
            stride=stride,
            top_k=DEFAULT_TOP_K if top_k is None else top_k,
            min_score=0.0 if min_score is None else min_score,
        )


@dataclass(frozen=True)
class RankedResult(ResultDataClass):
    """A scored corpus window with its citation."""

    document_id: str
    author: str
    work: str
    window_start: int
    window_end: int
    """Token position one past the last token of the window."""

    first_line: int
    last_line: int
    excerpt: str
    """Surface forms of the window tokens joined by single spaces."""

    breakdown: ScoreBreakdown

    @property
    def score(self) -> float:
        """Return the combined score."""
        return self.breakdown.combined

    @property
    def matched_indices(self) -> frozenset[int]:
        """Return the window indices of the matched target words."""
        return frozenset(m.target_index for m in self.breakdown.matches)

    def overlaps(self, other: RankedResult) -> bool:
        """Return True if both results cover a common token of one document."""
        return (
            self.document_id == other.document_id
            and self.window_start < other.window_end
            and other.window_start < self.window_end
        )


def _window_starts(token_count: int, params: SearchParams) -> range:
    if token_count == 0:
        return range(0)
    if token_count <= params.window_size:
        return range(1)
    return range(0, token_count, params.stride)


def windows(
    document: Document, params: SearchParams
) -> Iterator[tuple[int, tuple[Token, ...]]]:
    """Yield (start, tokens) for every window of the document."""
    for start in _window_starts(len(document.tokens), params):
        yield start, document.tokens[start : start + params.window_size]


def window_at(
    document: Document, params: SearchParams, start: int
) -> tuple[Token, ...]:
    """Return the window starting at start, which must be a window start."""
    if start not in _window_starts(len(document.tokens), params):
        raise ConfigurationException(
            f"No window of {document.id} starts at token {start}"
        )
    return document.tokens[start : start + params.window_size]


@dataclass(frozen=True)
class _ScanTask:
    """A run of consecutive windows of one document, ready for a worker."""

    document_id: str
    starts: range
    norms: tuple[str, ...]
    """Forms from the first window start to the end of the last window."""

    window_size: int
    min_score: float
    table: dict[str, MatchEntry]


class _Hit(NamedTuple):
    document_id: str
    window_start: int
    window_end: int
    combined: float


@dataclass(frozen=True)
class _ScanOutcome:
    hits: list[_Hit]
    counts: dict[str, int]


def _scan_tasks(
    document: Document, matcher: QueryMatcher, params: SearchParams
) -> Iterator[_ScanTask]:
    starts = _window_starts(len(document.tokens), params)
    per_task = max(1, TASK_TOKENS // params.stride)
    for i in range(0, len(starts), per_task):
        chunk = starts[i : i + per_task]
        end = min(chunk[-1] + params.window_size, len(document.tokens))
        norms = tuple(token.norm for token in document.tokens[chunk[0] : end])
        yield _ScanTask(
            document_id=document.id,
            starts=chunk,
            norms=norms,
            window_size=params.window_size,
            min_score=params.min_score,
            table=matcher.table(norms),
        )


def _run_scan(task: _ScanTask) -> _ScanOutcome:
    """Score the windows of one task, keeping those above the threshold.

    Windows without a single matching token are skipped without scoring.
    """
    base = task.starts[0]
    prefix = list(
        itertools.accumulate(
            (1 if norm in task.table else 0 for norm in task.norms), initial=0
        )
    )
    hits: list[_Hit] = []
    scored = solved = 0
    for start in task.starts:
        lo = start - base
        hi = min(lo + task.window_size, len(task.norms))
        if prefix[hi] == prefix[lo]:
            continue
        scored += 1
        combined, conflicts = score_norms(task.table, task.norms[lo:hi])
        solved += conflicts
        if combined > 0 and combined >= task.min_score:
            hits.append(_Hit(task.document_id, start, base + hi, combined))
    counts = {
        "windows_scored": scored,
        "windows_skipped": len(task.starts) - scored,
        "assignments_solved": solved,
    }
    return _ScanOutcome(hits, {key: value for key, value in counts.items() if value})


def _ranked_result(
    document: Document, matcher: QueryMatcher, start: int, end: int
) -> RankedResult:
    window = document.tokens[start:end]
    return RankedResult(
        document_id=document.id,
        author=document.author,
        work=document.work,
        window_start=start,
        window_end=end,
        first_line=window[0].line,
        last_line=window[-1].line,
        excerpt=" ".join(token.surface for token in window),
        breakdown=matcher.breakdown(window),
    )


def scan_document(
    document: Document, matcher: QueryMatcher, params: SearchParams
) -> list[RankedResult]:
    """Score every window of one document, keeping those above the threshold.

    Windows without a single matching token are skipped without scoring.
    """
    results: list[RankedResult] = []
    for task in _scan_tasks(document, matcher, params):
        outcome = _run_scan(task)
        DIAGNOSTICS.update(outcome.counts)
        results.extend(
            _ranked_result(document, matcher, hit.window_start, hit.window_end)
            for hit in outcome.hits
        )
    _LOGGER.debug("Scanned %s: %d hits", document.id, len(results))
    return results


def _drop_overlaps(
    items: Iterable[_T],
    key: Callable[[_T], tuple[float, str, int]],
    span: Callable[[_T], tuple[str, int, int]],
) -> list[_T]:
    """Keep items greedily in key order, dropping those overlapping a kept one."""
    # Kept ranges of a document are disjoint, so starts and ends sort alike
    kept: dict[str, tuple[list[int], list[int]]] = {}
    ranked: list[_T] = []
    dropped = 0
    for item in sorted(items, key=key):
        document_id, start, end = span(item)
        starts, ends = kept.setdefault(document_id, ([], []))
        i = bisect.bisect_right(starts, start)
        if (i > 0 and ends[i - 1] > start) or (i < len(starts) and starts[i] < end):
            dropped += 1
            continue
        starts.insert(i, start)
        ends.insert(i, end)
        ranked.append(item)
    if dropped:
        DIAGNOSTICS.increment("results_suppressed", dropped)
    return ranked


def _ranking_key(result: RankedResult) -> tuple[float, str, int]:
    return (-result.breakdown.combined, result.document_id, result.window_start)


def _result_span(result: RankedResult) -> tuple[str, int, int]:
    return (result.document_id, result.window_start, result.window_end)


def _hit_key(hit: _Hit) -> tuple[float, str, int]:
    return (-hit.combined, hit.document_id, hit.window_start)


def _hit_span(hit: _Hit) -> tuple[str, int, int]:
    return (hit.document_id, hit.window_start, hit.window_end)


def suppress_overlaps(results: Iterable[RankedResult]) -> list[RankedResult]:
    """Keep only the best scoring result among overlapping windows of a document.

    Results are taken greedily by score (ties: earliest window start) and a
    result is dropped when it overlaps one already kept.
    """
    return _drop_overlaps(results, _ranking_key, _result_span)


def rank_results(
    results: Iterable[RankedResult], params: SearchParams
) -> list[RankedResult]:
    """Filter, de-duplicate and order results into the final ranking."""
    eligible = (
        r
        for r in results
        if r.breakdown.combined > 0 and r.breakdown.combined >= params.min_score
    )
    return suppress_overlaps(eligible)[: params.top_k]


def worker_count(environ: Mapping[str, str] | None = None) -> int | None:
    """Return the worker cap from the environment, None when unset."""
    environ = os.environ if environ is None else environ
    value = environ.get(THREADS_ENV)
    if value is None or not value.strip():
        return None
    try:
        workers = int(value)
    except ValueError as err:
        raise ConfigurationException(
            f"{THREADS_ENV} must be a positive integer: '{value}'"
        ) from err
    if workers < 1:
        raise ConfigurationException(
            f"{THREADS_ENV} must be a positive integer: '{value}'"
        )
    return workers


async def async_search(
    corpus: Corpus,
    query: Query,
    lexicon: Lexicon,
    params: SearchParams | None = None,
    executor: concurrent.futures.Executor | None = None,
) -> list[RankedResult]:
    """Search the corpus, scanning the documents on the executor.

    The executor may be a thread or a process pool; with no executor the
    event loop's default executor is used.
    """
    matcher = QueryMatcher(query, lexicon)
    if params is None:
        params = SearchParams.for_query(len(query))
    loop = asyncio.get_running_loop()
    with DIAGNOSTICS.timer("search"):
        tasks = [
            task
            for document in corpus.documents
            for task in _scan_tasks(document, matcher, params)
        ]
        outcomes = await asyncio.gather(
            *(loop.run_in_executor(executor, _run_scan, task) for task in tasks)
        )
        for outcome in outcomes:
            DIAGNOSTICS.update(outcome.counts)
        hits = _drop_overlaps(
            itertools.chain.from_iterable(outcome.hits for outcome in outcomes),
            _hit_key,
            _hit_span,
        )[: params.top_k]
        documents = {document.id: document for document in corpus.documents}
        ranked = [
            _ranked_result(
                documents[hit.document_id], matcher, hit.window_start, hit.window_end
            )
            for hit in hits
        ]
    _LOGGER.debug(
        "Search of %d documents in %d tasks returned %d results",
        len(corpus.documents),
        len(tasks),
        len(ranked),
    )
    return ranked


def _executor(corpus: Corpus, max_workers: int | None) -> concurrent.futures.Executor:
    if max_workers == 1 or corpus.total_tokens < PROCESS_POOL_MIN_TOKENS:
        return concurrent.futures.ThreadPoolExecutor(max_workers=1)
    return concurrent.futures.ProcessPoolExecutor(max_workers=max_workers)


def search(
    corpus: Corpus,
    query: Query,
    lexicon: Lexicon,
    params: SearchParams | None = None,
    max_workers: int | None = None,
) -> list[RankedResult]:
    """Search the corpus and return the ranked results.

    max_workers caps the worker processes and defaults to the ALLUSIO_THREADS
    environment variable, then to the number of CPUs. Corpora under
    PROCESS_POOL_MIN_TOKENS tokens are scanned on a single thread. This runs
    its own event loop; from async code use `async_search`.
    """
    if max_workers is None:
        max_workers = worker_count()

    async def _run() -> list[RankedResult]:
        with _executor(corpus, max_workers) as pool:
            return await async_search(corpus, query, lexicon, params, pool)

    return asyncio.run(_run())
