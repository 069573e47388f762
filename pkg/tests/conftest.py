"""Fixtures and libraries shared by tests."""

from __future__ import annotations

import logging
from collections.abc import Callable, Generator, Iterable, Mapping
from pathlib import Path
from typing import Any

import pytest

from allusio import diagnostics
from allusio.corpus import Corpus, load_corpus
from allusio.lexicon import Lexicon, load_lexicon_dir, prepare_lexicon
from allusio.tokenizer import DEFAULT_OPTIONS, NormalizationOptions

CorpusFactory = Callable[..., Path]
LexiconFactory = Callable[..., Path]


def pytest_configure(config: pytest.Config) -> None:
    """Configure logging for the test run."""
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s.%(msecs)03d %(levelname)-8s %(name)s:%(filename)s:%(lineno)s %(message)s",  # noqa: E501
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    if config.getoption("verbose") > 0:
        logging.getLogger().setLevel(logging.DEBUG)


@pytest.fixture(name="corpus_dir")
def mock_corpus_dir(tmp_path: Path) -> Path:
    path = tmp_path / "corpus"
    path.mkdir()
    return path


@pytest.fixture(name="lexicon_dir")
def mock_lexicon_dir(tmp_path: Path) -> Path:
    path = tmp_path / "lexicon"
    path.mkdir()
    return path


@pytest.fixture(name="write_corpus")
def mock_write_corpus(corpus_dir: Path) -> CorpusFactory:
    """Fixture to write corpus documents, keyed by relative path."""

    def _write(documents: Mapping[str, str]) -> Path:
        for name, text in documents.items():
            path = corpus_dir / name
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        return corpus_dir

    return _write


@pytest.fixture(name="write_lexicon")
def mock_write_lexicon(lexicon_dir: Path) -> LexiconFactory:
    """Fixture to write the lexicon tables; omitted tables are not created."""

    def _write(
        lemmas: Mapping[str, str] | None = None,
        stems: Mapping[str, str] | None = None,
        synonyms: Iterable[Iterable[str]] | None = None,
        freq: Mapping[str, int] | None = None,
    ) -> Path:
        def write_rows(name: str, rows: Iterable[Iterable[Any]]) -> None:
            lines = ["\t".join(str(c) for c in row) for row in rows]
            (lexicon_dir / name).write_text(
                "# generated for tests\n" + "\n".join(lines) + "\n", encoding="utf-8"
            )

        write_rows("lemmas.tsv", (lemmas or {}).items())
        if stems is not None:
            write_rows("stems.tsv", stems.items())
        if synonyms is not None:
            write_rows("synonyms.tsv", synonyms)
        if freq is not None:
            write_rows("freq.tsv", freq.items())
        return lexicon_dir

    return _write


@pytest.fixture(name="options")
def mock_options() -> NormalizationOptions:
    return DEFAULT_OPTIONS


@pytest.fixture(name="load")
def mock_load(
    write_corpus: CorpusFactory,
    write_lexicon: LexiconFactory,
    options: NormalizationOptions,
) -> Callable[..., tuple[Corpus, Lexicon]]:
    """Fixture to write a corpus and lexicon and load both, ready for search."""

    def _load(
        documents: Mapping[str, str], **tables: Any
    ) -> tuple[Corpus, Lexicon]:
        corpus = load_corpus(write_corpus(documents), options)
        lexicon = load_lexicon_dir(write_lexicon(**tables), options)
        return corpus, prepare_lexicon(lexicon, corpus)

    return _load


@pytest.fixture(autouse=True)
def reset_diagnostics() -> Generator[None, None, None]:
    yield
    diagnostics.reset()


def assert_diagnostics(actual: dict[str, Any], expected: dict[str, Any]) -> None:
    """Helper method for stripping timing based diagnostics."""

    def scrub_dict(data: dict[str, Any]) -> dict[str, Any]:
        return {k: v for k, v in data.items() if not k.endswith("_sum")}

    actual = {
        k: scrub_dict(dict(v)) if isinstance(v, Mapping) else v
        for k, v in actual.items()
    }
    assert actual == expected
