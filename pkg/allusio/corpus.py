"""Loading of plain-text corpus documents into position indexed tokens.

A corpus is a directory tree of UTF-8 `*.txt` files, one document per file.
A file may start with header lines of the form `#! key: value` that carry the
`author` and `work` of the document; header lines are not tokenized but are
still counted for line numbers.

Example usage:
```
    corpus = load_corpus("texts/", NormalizationOptions(strip_diacritics=True))
    for document in corpus.documents:
        print(document.id, len(document.tokens))
```
"""

from __future__ import annotations

import codecs
import concurrent.futures
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import CORPUS_DIAGNOSTICS as DIAGNOSTICS
from .exceptions import CorpusException, EncodingException
from .tokenizer import DEFAULT_OPTIONS, NormalizationOptions, Token, tokenize

__all__ = [
    "Document",
    "Corpus",
    "load_document",
    "load_corpus",
]

_LOGGER = logging.getLogger(__name__)

HEADER_PREFIX = "#!"
HEADER_KEYS = ("author", "work")
CORPUS_GLOB = "*.txt"


@dataclass(frozen=True)
class Document:
    """A single corpus file and its tokens."""

    id: str
    """Path of the file relative to the corpus root, e.g. 'vergil/aeneid.txt'."""

    author: str
    work: str
    path: str
    tokens: tuple[Token, ...]

    @property
    def title(self) -> str:
        """Citation label for display, falling back to the document id."""
        label = ", ".join(part for part in (self.author, self.work) if part)
        return label or self.id


@dataclass(frozen=True)
class Corpus:
    """An immutable, ordered collection of documents."""

    documents: tuple[Document, ...] = ()
    total_tokens: int = field(init=False)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for document in self.documents:
            if document.id in seen:
                raise CorpusException(f"Duplicate document id: {document.id}")
            seen.add(document.id)
        object.__setattr__(
            self, "total_tokens", sum(len(d.tokens) for d in self.documents)
        )

    def get_document(self, document_id: str) -> Document:
        """Return the document with the specified id."""
        for document in self.documents:
            if document.id == document_id:
                return document
        raise CorpusException(f"Document not found in corpus: {document_id}")


def _read_text(path: Path) -> str:
    try:
        data = path.read_bytes()
    except FileNotFoundError as err:
        raise CorpusException(f"Corpus file does not exist: {path}") from err
    except OSError as err:
        raise CorpusException(f"Unable to read corpus file {path}: {err}") from err
    bom = len(codecs.BOM_UTF8) if data.startswith(codecs.BOM_UTF8) else 0
    try:
        return data[bom:].decode("utf-8")
    except UnicodeDecodeError as err:
        raise EncodingException(str(path), bom + err.start) from err


def _split_header(path: Path, text: str) -> tuple[dict[str, str], str, int]:
    """Consume leading header lines, returning metadata, body and its first line."""
    metadata: dict[str, str] = {}
    lines = text.split("\n")
    consumed = 0
    for line in lines:
        if not line.startswith(HEADER_PREFIX):
            break
        consumed += 1
        key, sep, value = line[len(HEADER_PREFIX) :].partition(":")
        if not sep:
            raise CorpusException(f"{path}:{consumed}: malformed header line")
        key = key.strip().lower()
        if key not in HEADER_KEYS:
            _LOGGER.warning("Ignoring unknown header key '%s' in %s", key, path)
            continue
        metadata[key] = value.strip()
    return metadata, "\n".join(lines[consumed:]), consumed + 1


def load_document(
    path: str | Path,
    doc_id: str | None = None,
    author: str | None = None,
    work: str | None = None,
    options: NormalizationOptions = DEFAULT_OPTIONS,
) -> Document:
    """Load and tokenize a single corpus file.

    Explicit author/work arguments take precedence over header values.
    """
    path = Path(path)
    metadata, body, first_line = _split_header(path, _read_text(path))
    tokens = tokenize(body, options, first_line=first_line)
    _LOGGER.debug("Loaded %s (%d tokens)", path, len(tokens))
    DIAGNOSTICS.update({"documents_loaded": 1, "tokens_loaded": len(tokens)})
    return Document(
        id=doc_id if doc_id is not None else path.name,
        author=author if author is not None else metadata.get("author", ""),
        work=work if work is not None else metadata.get("work", ""),
        path=str(path),
        tokens=tuple(tokens),
    )


def _corpus_files(root: Path) -> list[tuple[str, Path]]:
    try:
        files = [p for p in root.rglob(CORPUS_GLOB) if p.is_file()]
    except OSError as err:
        raise CorpusException(f"Unable to read corpus directory {root}: {err}") from err
    return sorted((p.relative_to(root).as_posix(), p) for p in files)


def load_corpus(
    directory: str | Path,
    options: NormalizationOptions = DEFAULT_OPTIONS,
    max_workers: int | None = None,
) -> Corpus:
    """Load every `*.txt` file below directory in lexicographic path order.

    Files are read on a thread pool; a single failing file fails the whole
    load with an error naming that file.
    """
    root = Path(directory)
    if not root.is_dir():
        raise CorpusException(f"Corpus directory does not exist: {root}")
    files = _corpus_files(root)
    with DIAGNOSTICS.timer("load_corpus"):
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
            documents = tuple(
                pool.map(
                    lambda item: load_document(
                        item[1], doc_id=item[0], options=options
                    ),
                    files,
                )
            )
    corpus = Corpus(documents)
    _LOGGER.debug(
        "Loaded corpus %s: %d documents, %d tokens",
        root,
        len(corpus.documents),
        corpus.total_tokens,
    )
    return corpus
