"""User supplied linguistic knowledge: lemmas, stem groups, synonyms, frequencies.

Nothing here is computed morphologically. The tables are plain UTF-8 TSV
files, `#` comment lines and blank lines are ignored:

- `lemmas.tsv`: `form<TAB>lemma`
- `stems.tsv`: `lemma<TAB>group-id`
- `synonyms.tsv`: one synonym set per line, two or more lemmas
- `freq.tsv`: `lemma<TAB>count`

Forms and lemmas are normalized on load with the same options as the corpus,
so tables may be written with accents or capitals.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path
from types import MappingProxyType
from typing import Final

from .corpus import Corpus
from .diagnostics import LEXICON_DIAGNOSTICS as DIAGNOSTICS
from .exceptions import LexiconException
from .tokenizer import DEFAULT_OPTIONS, NormalizationOptions, normalize_form

__all__ = [
    "Lexicon",
    "load_lexicon",
    "load_lexicon_dir",
    "lemma_of",
    "related_by_stem_or_synonym",
    "compute_frequencies",
    "rarity_score",
    "prepare_lexicon",
]

_LOGGER = logging.getLogger(__name__)

LEMMAS_FILE: Final = "lemmas.tsv"
STEMS_FILE: Final = "stems.tsv"
SYNONYMS_FILE: Final = "synonyms.tsv"
FREQ_FILE: Final = "freq.tsv"

COMMENT_PREFIX = "#"


@dataclass(frozen=True)
class Lexicon:
    """Immutable bundle of lemma, stem, synonym and frequency tables."""

    lemmas: Mapping[str, str] = field(default_factory=dict)
    """Normalized form to lemma."""

    stem_groups: Mapping[str, str] = field(default_factory=dict)
    """Lemma to stem group id."""

    synonym_sets: tuple[frozenset[str], ...] = ()

    frequencies: Mapping[str, int] | None = None
    """Lemma to corpus count, None when no frequency table was supplied."""

    _synonym_index: Mapping[str, frozenset[int]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "lemmas", MappingProxyType(dict(self.lemmas)))
        object.__setattr__(
            self, "stem_groups", MappingProxyType(dict(self.stem_groups))
        )
        if self.frequencies is not None:
            object.__setattr__(
                self, "frequencies", MappingProxyType(dict(self.frequencies))
            )
        index: dict[str, set[int]] = {}
        for i, synonyms in enumerate(self.synonym_sets):
            for lemma in synonyms:
                index.setdefault(lemma, set()).add(i)
        object.__setattr__(
            self, "_synonym_index", {k: frozenset(v) for k, v in index.items()}
        )

    @property
    def total_lemma_tokens(self) -> int:
        """Sum of all frequency counts.

        Equals the corpus token count only when the frequencies were derived
        from the corpus; a loaded frequency file has its own total.
        """
        return sum(self.frequencies.values()) if self.frequencies else 0

    def lemma_of(self, form: str) -> str | None:
        """Return the lemma of a normalized form, if the table has one."""
        return self.lemmas.get(form)

    def lemma_key(self, form: str) -> str:
        """Return the lemma of a form, or the form itself when it has none."""
        return self.lemmas.get(form, form)

    def related(self, lemma_a: str, lemma_b: str) -> bool:
        """Return True if the lemmas share a stem group or a synonym set."""
        if lemma_a == lemma_b:
            return True
        group = self.stem_groups.get(lemma_a)
        if group is not None and group == self.stem_groups.get(lemma_b):
            return True
        sets_a = self._synonym_index.get(lemma_a)
        sets_b = self._synonym_index.get(lemma_b)
        return bool(sets_a and sets_b and not sets_a.isdisjoint(sets_b))

    def frequency(self, lemma: str) -> int | None:
        """Return the count for a lemma, None when it is unknown."""
        if self.frequencies is None:
            return None
        return self.frequencies.get(lemma)

    def rarity(self, form: str) -> float:
        """Return the rarity score of a normalized form's lemma."""
        return rarity_score(self.frequency(self.lemma_key(form)))

    def with_frequencies(self, frequencies: Mapping[str, int]) -> Lexicon:
        """Return a copy of the lexicon using the specified frequency table."""
        return replace(self, frequencies=frequencies)

    def with_synonym_set(self, lemmas: Iterable[str]) -> Lexicon:
        """Return a copy of the lexicon with an additional synonym set."""
        return replace(self, synonym_sets=(*self.synonym_sets, frozenset(lemmas)))


def _table_rows(path: Path) -> Iterator[tuple[int, list[str]]]:
    """Yield (line number, columns) for every data line of a TSV table."""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError as err:
        raise LexiconException(str(path), 0, "file does not exist") from err
    except (OSError, UnicodeDecodeError) as err:
        raise LexiconException(str(path), 0, f"unable to read: {err}") from err
    for number, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.startswith(COMMENT_PREFIX):
            continue
        columns = [column.strip() for column in line.split("\t")]
        if any(not column for column in columns):
            raise LexiconException(str(path), number, "empty column")
        yield number, columns


def _expect_columns(path: Path, number: int, columns: list[str], count: int) -> None:
    if len(columns) != count:
        raise LexiconException(
            str(path), number, f"expected {count} columns, found {len(columns)}"
        )


def _load_pairs(
    path: Path, options: NormalizationOptions, normalize_value: bool
) -> dict[str, str]:
    """Parse a two column table, rejecting conflicting duplicate keys."""
    table: dict[str, str] = {}
    for number, columns in _table_rows(path):
        _expect_columns(path, number, columns, 2)
        key = normalize_form(columns[0], options)
        value = normalize_form(columns[1], options) if normalize_value else columns[1]
        if not key or not value:
            raise LexiconException(str(path), number, "empty after normalization")
        if table.get(key, value) != value:
            raise LexiconException(
                str(path),
                number,
                f"conflicting entries for '{key}': '{table[key]}' and '{value}'",
            )
        table[key] = value
    return table


def _load_synonyms(
    path: Path, options: NormalizationOptions
) -> tuple[frozenset[str], ...]:
    synonym_sets: list[frozenset[str]] = []
    for number, columns in _table_rows(path):
        lemmas = frozenset(normalize_form(column, options) for column in columns)
        lemmas = frozenset(lemma for lemma in lemmas if lemma)
        if len(lemmas) < 2:
            raise LexiconException(
                str(path), number, "a synonym set needs at least 2 lemmas"
            )
        synonym_sets.append(lemmas)
    return tuple(synonym_sets)


def _load_frequencies(path: Path, options: NormalizationOptions) -> dict[str, int]:
    frequencies: dict[str, int] = {}
    for number, columns in _table_rows(path):
        _expect_columns(path, number, columns, 2)
        lemma = normalize_form(columns[0], options)
        try:
            count = int(columns[1])
        except ValueError as err:
            raise LexiconException(
                str(path), number, f"count is not an integer: '{columns[1]}'"
            ) from err
        if count < 1:
            raise LexiconException(str(path), number, f"count must be >= 1: {count}")
        if frequencies.get(lemma, count) != count:
            raise LexiconException(
                str(path), number, f"conflicting counts for '{lemma}'"
            )
        frequencies[lemma] = count
    return frequencies


def load_lexicon(
    lemma_path: str | Path,
    stem_path: str | Path | None = None,
    synonym_path: str | Path | None = None,
    freq_path: str | Path | None = None,
    options: NormalizationOptions = DEFAULT_OPTIONS,
) -> Lexicon:
    """Load the lexicon tables; the lemma table is required, the rest optional."""
    lexicon = Lexicon(
        lemmas=_load_pairs(Path(lemma_path), options, normalize_value=True),
        stem_groups=(
            _load_pairs(Path(stem_path), options, normalize_value=False)
            if stem_path
            else {}
        ),
        synonym_sets=(
            _load_synonyms(Path(synonym_path), options) if synonym_path else ()
        ),
        frequencies=_load_frequencies(Path(freq_path), options) if freq_path else None,
    )
    DIAGNOSTICS.update(
        {
            "lemma_entries": len(lexicon.lemmas),
            "stem_entries": len(lexicon.stem_groups),
            "synonym_sets": len(lexicon.synonym_sets),
            "frequency_entries": len(lexicon.frequencies or {}),
        }
    )
    _LOGGER.debug(
        "Loaded lexicon: %d lemmas, %d stems, %d synonym sets, frequencies=%s",
        len(lexicon.lemmas),
        len(lexicon.stem_groups),
        len(lexicon.synonym_sets),
        "file" if lexicon.frequencies is not None else "none",
    )
    return lexicon


def load_lexicon_dir(
    directory: str | Path, options: NormalizationOptions = DEFAULT_OPTIONS
) -> Lexicon:
    """Load a lexicon from a directory holding the four standard table names.

    `lemmas.tsv` must exist; the other tables are used when present.
    """
    root = Path(directory)

    def optional(name: str) -> Path | None:
        path = root / name
        return path if path.is_file() else None

    return load_lexicon(
        root / LEMMAS_FILE,
        optional(STEMS_FILE),
        optional(SYNONYMS_FILE),
        optional(FREQ_FILE),
        options,
    )


def lemma_of(form: str, lexicon: Lexicon) -> str | None:
    """Return the lemma of a normalized form, None when the table lacks it."""
    return lexicon.lemma_of(form)


def related_by_stem_or_synonym(lemma_a: str, lemma_b: str, lexicon: Lexicon) -> bool:
    """Return True if the lemmas share a stem group or a synonym set."""
    return lexicon.related(lemma_a, lemma_b)


def compute_frequencies(corpus: Corpus, lexicon: Lexicon) -> dict[str, int]:
    """Count corpus tokens per lemma, using the form itself when it has no lemma."""
    counts: Counter[str] = Counter()
    for document in corpus.documents:
        counts.update(lexicon.lemma_key(token.norm) for token in document.tokens)
    return dict(counts)


def rarity_score(freq: int | None) -> float:
    """Return the rarity of a lemma with the specified count, in (0, 1].

    A lemma seen once scores 1.0 and the score decays with log10 of the
    count; an unknown lemma counts as never seen and scores 1.0.
    """
    if freq is None or freq <= 1:
        return 1.0
    return 1.0 / (1.0 + math.log10(freq))


def prepare_lexicon(lexicon: Lexicon, corpus: Corpus) -> Lexicon:
    """Return the lexicon with frequencies, derived from the corpus if needed.

    A frequency table loaded from file always wins over corpus counts.
    """
    if lexicon.frequencies is not None:
        return lexicon
    _LOGGER.debug("Deriving lemma frequencies from %d tokens", corpus.total_tokens)
    return lexicon.with_frequencies(compute_frequencies(corpus, lexicon))
