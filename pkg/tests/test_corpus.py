"""Tests for loading corpus documents."""

from pathlib import Path

import pytest

from allusio import diagnostics
from allusio.corpus import Corpus, Document, load_corpus, load_document
from allusio.exceptions import CorpusException, EncodingException
from allusio.tokenizer import NormalizationOptions

from .conftest import CorpusFactory, assert_diagnostics


def test_load_document_with_header(tmp_path: Path) -> None:
    path = tmp_path / "aeneid.txt"
    path.write_text(
        "#! author: Vergil\n#! work: Aeneid\nArma virumque cano,\nTroiae qui\n",
        encoding="utf-8",
    )
    document = load_document(path)
    assert document.id == "aeneid.txt"
    assert document.author == "Vergil"
    assert document.work == "Aeneid"
    assert document.title == "Vergil, Aeneid"
    assert [t.norm for t in document.tokens] == [
        "arma",
        "virumque",
        "cano",
        "troiae",
        "qui",
    ]
    # Header lines still count for line numbers
    assert [t.line for t in document.tokens] == [3, 3, 3, 4, 4]


def test_explicit_metadata_wins(tmp_path: Path) -> None:
    path = tmp_path / "a.txt"
    path.write_text("#! author: Vergil\narma\n", encoding="utf-8")
    document = load_document(path, doc_id="x/a.txt", author="Publius", work="Aen.")
    assert document.id == "x/a.txt"
    assert document.author == "Publius"
    assert document.work == "Aen."


def test_no_header(tmp_path: Path) -> None:
    path = tmp_path / "a.txt"
    path.write_text("arma cano", encoding="utf-8")
    document = load_document(path)
    assert document.author == ""
    assert document.work == ""
    assert document.title == "a.txt"
    assert [t.line for t in document.tokens] == [1, 1]


def test_unknown_header_key_is_ignored(
    tmp_path: Path, caplog: pytest.LogCaptureFixture
) -> None:
    path = tmp_path / "a.txt"
    path.write_text("#! edition: Oxford\n#! Author: Ovid\nin nova\n", encoding="utf-8")
    document = load_document(path)
    assert document.author == "Ovid"
    assert "edition" in caplog.text


def test_malformed_header(tmp_path: Path) -> None:
    path = tmp_path / "a.txt"
    path.write_text("#! author Vergil\narma\n", encoding="utf-8")
    with pytest.raises(CorpusException, match=r"a.txt:1: malformed header line"):
        load_document(path)


def test_invalid_utf8(tmp_path: Path) -> None:
    path = tmp_path / "bad.txt"
    path.write_bytes(b"arma \xff cano")
    with pytest.raises(EncodingException, match="byte offset 5") as exc_info:
        load_document(path)
    assert exc_info.value.offset == 5
    assert exc_info.value.path == str(path)


def test_byte_order_mark_is_skipped(tmp_path: Path) -> None:
    path = tmp_path / "a.txt"
    path.write_bytes("\ufeff#! author: Vergil\narma\n".encode())
    document = load_document(path)
    assert document.author == "Vergil"
    assert [t.surface for t in document.tokens] == ["arma"]
    assert [t.line for t in document.tokens] == [2]


def test_invalid_utf8_after_byte_order_mark(tmp_path: Path) -> None:
    path = tmp_path / "bad.txt"
    path.write_bytes(b"\xef\xbb\xbfarma \xff cano")
    with pytest.raises(EncodingException, match="byte offset 8"):
        load_document(path)


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(CorpusException, match="does not exist"):
        load_document(tmp_path / "missing.txt")


def test_load_corpus_order_and_ids(write_corpus: CorpusFactory) -> None:
    root = write_corpus(
        {
            "vergil/aeneid.txt": "arma virumque cano",
            "homer/iliad.txt": "μῆνιν ἄειδε θεὰ",
            "homer/odyssey.txt": "ἄνδρα μοι ἔννεπε",
            "notes.md": "not a text",
        }
    )
    corpus = load_corpus(root, max_workers=2)
    assert [d.id for d in corpus.documents] == [
        "homer/iliad.txt",
        "homer/odyssey.txt",
        "vergil/aeneid.txt",
    ]
    assert corpus.total_tokens == 9
    assert corpus.get_document("vergil/aeneid.txt").tokens[0].surface == "arma"
    assert_diagnostics(
        diagnostics.get_diagnostics(),
        {
            "corpus": {
                "documents_loaded": 3,
                "load_corpus_count": 1,
                "tokens_loaded": 9,
            },
        },
    )


def test_load_corpus_options(write_corpus: CorpusFactory) -> None:
    root = write_corpus({"iliad.txt": "Μῆνιν ἄειδε"})
    corpus = load_corpus(root, NormalizationOptions(strip_diacritics=True))
    assert [t.norm for t in corpus.documents[0].tokens] == ["μηνιν", "αειδε"]


def test_empty_corpus(corpus_dir: Path) -> None:
    corpus = load_corpus(corpus_dir)
    assert corpus.documents == ()
    assert corpus.total_tokens == 0


def test_missing_corpus_directory(tmp_path: Path) -> None:
    with pytest.raises(CorpusException, match="does not exist"):
        load_corpus(tmp_path / "nowhere")


def test_bad_file_fails_whole_corpus(write_corpus: CorpusFactory) -> None:
    root = write_corpus({"good.txt": "arma"})
    (root / "bad.txt").write_bytes(b"\xc3")
    with pytest.raises(EncodingException, match="bad.txt"):
        load_corpus(root)


def test_document_not_found() -> None:
    with pytest.raises(CorpusException, match="not found"):
        Corpus().get_document("missing.txt")


def test_duplicate_document_ids() -> None:
    document = Document("a.txt", "", "", "a.txt", ())
    with pytest.raises(CorpusException, match="Duplicate"):
        Corpus((document, document))
