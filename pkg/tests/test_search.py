"""Tests for windowing, corpus search and ranking."""

from __future__ import annotations

import concurrent.futures
import random
import time
from collections.abc import Callable

import pytest
from hypothesis import given, settings, strategies as st

from allusio import diagnostics, search as search_module
from allusio.corpus import Corpus, Document
from allusio.exceptions import ConfigurationException
from allusio.lexicon import Lexicon
from allusio.scoring import Query, QueryMatcher, ScoreBreakdown
from allusio.search import (
    DEFAULT_TOP_K,
    RankedResult,
    SearchParams,
    async_search,
    rank_results,
    scan_document,
    search,
    suppress_overlaps,
    window_at,
    windows,
    worker_count,
)
from allusio.tokenizer import Token, tokenize

from .conftest import assert_diagnostics

Loader = Callable[..., tuple[Corpus, Lexicon]]


def make_document(doc_id: str, text: str) -> Document:
    return Document(doc_id, "", "", doc_id, tuple(tokenize(text)))


def make_result(doc_id: str, start: int, end: int, score: float) -> RankedResult:
    return RankedResult(
        document_id=doc_id,
        author="",
        work="",
        window_start=start,
        window_end=end,
        first_line=1,
        last_line=1,
        excerpt="",
        breakdown=ScoreBreakdown(combined=score),
    )


def test_search_params_for_query() -> None:
    assert SearchParams.for_query(3) == SearchParams(30, 15)
    assert SearchParams.for_query(20) == SearchParams(60, 30)
    params = SearchParams.for_query(3, window_size=5, top_k=2, min_score=1.5)
    assert params == SearchParams(5, 2, 2, 1.5)
    assert SearchParams.for_query(3, window_size=1).stride == 1


@pytest.mark.parametrize(
    ("kwargs", "message"),
    [
        ({"window_size": 0, "stride": 1}, "window size"),
        ({"window_size": 5, "stride": 0}, "stride"),
        ({"window_size": 5, "stride": 6}, "stride"),
        ({"window_size": 5, "stride": 2, "top_k": 0}, "top"),
        ({"window_size": 5, "stride": 2, "min_score": -1.0}, "min score"),
    ],
)
def test_search_params_invalid(kwargs: dict[str, int], message: str) -> None:
    with pytest.raises(ConfigurationException, match=message):
        SearchParams(**kwargs)  # type: ignore[arg-type]


def test_windows() -> None:
    document = make_document("a.txt", "a b c d e f g")
    params = SearchParams(window_size=4, stride=2)
    got = [(start, [t.surface for t in w]) for start, w in windows(document, params)]
    assert got == [
        (0, ["a", "b", "c", "d"]),
        (2, ["c", "d", "e", "f"]),
        (4, ["e", "f", "g"]),
        (6, ["g"]),
    ]


def test_short_document_is_one_window() -> None:
    document = make_document("a.txt", "a b c")
    assert [start for start, _ in windows(document, SearchParams(4, 2))] == [0]
    assert list(windows(make_document("b.txt", ""), SearchParams(4, 2))) == []


def test_window_at() -> None:
    document = make_document("a.txt", "a b c d e f g")
    params = SearchParams(window_size=4, stride=2)
    assert [t.surface for t in window_at(document, params, 2)] == ["c", "d", "e", "f"]
    with pytest.raises(ConfigurationException, match="No window"):
        window_at(document, params, 3)


def test_scan_document_skips_windows_without_matches() -> None:
    document = make_document("a.txt", "x x x x x x arma cano x x x x")
    matcher = QueryMatcher(Query.from_text("arma cano"), Lexicon())
    results = scan_document(document, matcher, SearchParams(window_size=4, stride=2))
    assert [(r.window_start, r.window_end) for r in results] == [(4, 8), (6, 10)]
    assert_diagnostics(
        diagnostics.get_diagnostics(),
        {"search": {"windows_scored": 2, "windows_skipped": 4}},
    )


def test_scan_document_min_score() -> None:
    document = make_document("a.txt", "arma cano et arma")
    matcher = QueryMatcher(Query.from_text("arma cano"), Lexicon())
    params = SearchParams(window_size=2, stride=1, min_score=9.0)
    results = scan_document(document, matcher, params)
    assert [r.window_start for r in results] == [0]
    assert results[0].excerpt == "arma cano"
    assert results[0].score == 10 / 3 + 4 + 2


def test_suppress_overlaps() -> None:
    results = [
        make_result("a.txt", 0, 10, 5.0),
        make_result("a.txt", 5, 15, 7.0),
        make_result("a.txt", 10, 20, 6.0),
        make_result("b.txt", 5, 15, 7.0),
        make_result("a.txt", 20, 30, 7.0),
    ]
    ranked = suppress_overlaps(results)
    assert [(r.document_id, r.window_start) for r in ranked] == [
        ("a.txt", 5),
        ("a.txt", 20),
        ("b.txt", 5),
    ]
    assert_diagnostics(
        diagnostics.get_diagnostics(), {"search": {"results_suppressed": 2}}
    )


def test_rank_results_filters_and_limits() -> None:
    results = [
        make_result("c.txt", 0, 10, 3.0),
        make_result("a.txt", 0, 10, 0.0),
        make_result("b.txt", 0, 10, 3.0),
        make_result("d.txt", 0, 10, 9.0),
        make_result("e.txt", 0, 10, 1.0),
    ]
    params = SearchParams(window_size=10, stride=5, top_k=3, min_score=2.0)
    assert [r.document_id for r in rank_results(results, params)] == [
        "d.txt",
        "b.txt",
        "c.txt",
    ]


def test_result_properties() -> None:
    result = make_result("a.txt", 0, 10, 5.0)
    assert result.score == 5.0
    assert result.matched_indices == frozenset()
    assert result.overlaps(make_result("a.txt", 9, 19, 1.0))
    assert not result.overlaps(make_result("a.txt", 10, 20, 1.0))
    assert not result.overlaps(make_result("b.txt", 0, 10, 1.0))


def test_search(load: Loader) -> None:
    corpus, lexicon = load(
        {
            "vergil.txt": "#! author: Vergil\narma virumque cano Troiae qui primus",
            "ovid.txt": "arma gravi numero violentaque bella parabam",
            "other.txt": "nihil hic est",
        },
        lemmas={"virumque": "vir", "viro": "vir"},
    )
    query = Query.from_text("arma virumque cano")
    results = search(corpus, query, lexicon, SearchParams.for_query(len(query)))
    assert [r.document_id for r in results] == ["vergil.txt", "ovid.txt"]
    top = results[0]
    assert top.author == "Vergil"
    assert top.first_line == 2
    assert top.breakdown.quantity == 3
    assert top.matched_indices == frozenset({0, 1, 2})
    assert results[1].breakdown.quantity == 1


def test_search_no_results(load: Loader) -> None:
    corpus, lexicon = load({"a.txt": "nihil hic est"})
    assert search(corpus, Query.from_text("arma"), lexicon) == []


def test_search_empty_corpus() -> None:
    assert search(Corpus(), Query.from_text("arma"), Lexicon()) == []


def test_search_is_deterministic_across_workers(load: Loader) -> None:
    documents = {
        f"doc{i:02d}.txt": " ".join(
            ["arma", "et", "cano", "virum", "troiae"][(i + j) % 5] for j in range(40)
        )
        for i in range(12)
    }
    corpus, lexicon = load(documents)
    query = Query.from_text("arma virumque cano")
    params = SearchParams(window_size=9, stride=3, top_k=200)
    serial = search(corpus, query, lexicon, params, max_workers=1)
    parallel = search(corpus, query, lexicon, params, max_workers=8)
    assert serial
    assert serial == parallel


def test_ties_break_on_document_then_start(load: Loader) -> None:
    corpus, lexicon = load({"b.txt": "arma cano", "a.txt": "arma cano"})
    results = search(corpus, Query.from_text("arma cano"), lexicon)
    assert [r.document_id for r in results] == ["a.txt", "b.txt"]


async def test_async_search(load: Loader) -> None:
    corpus, lexicon = load({"a.txt": "arma virumque cano"})
    query = Query.from_text("arma virumque cano")
    with concurrent.futures.ThreadPoolExecutor(max_workers=2) as pool:
        results = await async_search(corpus, query, lexicon, executor=pool)
    assert len(results) == 1
    assert results[0].excerpt == "arma virumque cano"
    stats = diagnostics.get_diagnostics()["search"]
    assert stats["search_count"] == 1
    assert stats["windows_scored"] == 1


@pytest.mark.parametrize(
    ("environ", "expected"),
    [
        ({}, None),
        ({"ALLUSIO_THREADS": ""}, None),
        ({"ALLUSIO_THREADS": "4"}, 4),
    ],
)
def test_worker_count(environ: dict[str, str], expected: int | None) -> None:
    assert worker_count(environ) == expected


@pytest.mark.parametrize("value", ["0", "-2", "many"])
def test_worker_count_invalid(value: str) -> None:
    with pytest.raises(ConfigurationException, match="ALLUSIO_THREADS"):
        worker_count({"ALLUSIO_THREADS": value})


def test_search_reads_thread_env(
    load: Loader, monkeypatch: pytest.MonkeyPatch
) -> None:
    corpus, lexicon = load({"a.txt": "arma"})
    monkeypatch.setenv("ALLUSIO_THREADS", "nope")
    with pytest.raises(ConfigurationException):
        search(corpus, Query.from_text("arma"), lexicon)


WORDS = ["arma", "cano", "virum", "et", "troiae", "qui"]


@settings(max_examples=50, deadline=None)
@given(
    texts=st.lists(
        st.lists(st.sampled_from(WORDS), min_size=1, max_size=40),
        min_size=1,
        max_size=3,
    ),
    query_words=st.lists(st.sampled_from(WORDS), min_size=1, max_size=4),
    min_score=st.floats(min_value=0.0, max_value=20.0),
    top_k=st.integers(min_value=1, max_value=8),
)
def test_looser_limits_keep_previous_results(
    texts: list[list[str]], query_words: list[str], min_score: float, top_k: int
) -> None:
    corpus = Corpus(
        tuple(make_document(f"d{i}.txt", " ".join(t)) for i, t in enumerate(texts))
    )
    query = Query.from_text(" ".join(query_words))

    def run(top: int, threshold: float) -> list[RankedResult]:
        params = SearchParams(window_size=6, stride=3, top_k=top, min_score=threshold)
        return search(corpus, query, Lexicon(), params, max_workers=1)

    strict = run(top_k, min_score)
    assert run(top_k + 5, min_score)[:top_k] == strict
    lower = run(top_k, min_score / 2)
    assert all(result in lower for result in strict)


def test_search_on_process_pool(
    load: Loader, monkeypatch: pytest.MonkeyPatch
) -> None:
    documents = {
        f"doc{i:02d}.txt": " ".join(
            ["arma", "et", "cano", "virum", "troiae"][(i * j) % 5] for j in range(60)
        )
        for i in range(6)
    }
    corpus, lexicon = load(documents, lemmas={"virumque": "vir", "virum": "vir"})
    query = Query.from_text("arma virumque cano")
    params = SearchParams(window_size=9, stride=3, top_k=100)
    serial = search(corpus, query, lexicon, params, max_workers=1)

    monkeypatch.setattr(search_module, "PROCESS_POOL_MIN_TOKENS", 0)
    monkeypatch.setattr(search_module, "TASK_TOKENS", 20)
    diagnostics.reset()
    pooled = search(corpus, query, lexicon, params, max_workers=2)
    assert serial
    assert pooled == serial
    stats = diagnostics.get_diagnostics()["search"]
    assert stats["windows_scored"] + stats.get("windows_skipped", 0) == 6 * 20


def zipf_document(doc_id: str, rng: random.Random, size: int) -> Document:
    vocabulary = [f"w{i}" for i in range(5000)]
    weights = [1 / rank for rank in range(1, len(vocabulary) + 1)]
    words = rng.choices(vocabulary, weights=weights, k=size)
    return Document(
        doc_id,
        "",
        "",
        doc_id,
        tuple(Token(w, w, i, 1 + i // 10) for i, w in enumerate(words)),
    )


def test_million_token_search_is_fast() -> None:
    rng = random.Random(7)
    corpus = Corpus(
        tuple(zipf_document(f"zipf{i:02d}.txt", rng, 50_000) for i in range(20))
    )
    assert corpus.total_tokens == 1_000_000
    query = Query.from_text("w0 w1 w2 w3 w5 w8 w13 w21 w34 w55")

    started = time.perf_counter()
    results = search(corpus, query, Lexicon(), SearchParams.for_query(len(query)))
    elapsed = time.perf_counter() - started

    assert len(results) == DEFAULT_TOP_K
    assert elapsed < 10.0
