"""Tests for diagnostics."""

import concurrent.futures

from allusio import diagnostics
from allusio.diagnostics import Diagnostics

from .conftest import assert_diagnostics


def test_empty_diagnostics() -> None:
    assert diagnostics.get_diagnostics() == {}


def test_counters() -> None:
    data = Diagnostics()
    data.increment("a")
    data.increment("a", 2)
    data.update({"b": 1, "a": 1})
    assert data.as_dict() == {"a": 4, "b": 1}
    data.reset()
    assert data.as_dict() == {}


def test_timer() -> None:
    data = Diagnostics()
    with data.timer("load"):
        pass
    with data.timer("load"):
        pass
    assert data.as_dict()["load_count"] == 2
    assert "load_sum" in data.as_dict()


def test_concurrent_increments() -> None:
    data = Diagnostics()
    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda _: data.increment("hits"), range(1000)))
    assert data.as_dict() == {"hits": 1000}


def test_get_diagnostics_by_area() -> None:
    diagnostics.SEARCH_DIAGNOSTICS.increment("windows_scored", 3)
    with diagnostics.CORPUS_DIAGNOSTICS.timer("load_corpus"):
        pass
    assert_diagnostics(
        diagnostics.get_diagnostics(),
        {
            "corpus": {"load_corpus_count": 1},
            "search": {"windows_scored": 3},
        },
    )
    diagnostics.reset()
    assert diagnostics.get_diagnostics() == {}
