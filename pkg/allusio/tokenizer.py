"""Unicode normalization and word tokenization for Greek and Latin text.

A word is a maximal run of Unicode letters and combining marks. Everything
else (whitespace, punctuation, digits, apostrophes, editorial brackets) is a
separator, so an elided form such as δ' becomes its own token.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import StrEnum

import regex

from .exceptions import ConfigurationException

__all__ = [
    "UnicodeForm",
    "NormalizationOptions",
    "Token",
    "normalize_form",
    "tokenize",
]

_WORD_RE = regex.compile(r"[\p{L}\p{M}]+")

FINAL_SIGMA = "ς"
MEDIAL_SIGMA = "σ"

# Classical editions disagree on consonantal u/v and i/j
_LATIN_UV_TABLE = str.maketrans({"v": "u", "j": "i"})


class UnicodeForm(StrEnum):
    """Unicode normalization form used for the normalized token."""

    COMPOSED = "composed"
    DECOMPOSED = "decomposed"

    @property
    def nf(self) -> str:
        """Return the unicodedata normalization form name."""
        return "NFC" if self is UnicodeForm.COMPOSED else "NFD"


@dataclass(frozen=True)
class NormalizationOptions:
    """Settings that decide how a raw word becomes a comparable form."""

    fold_case: bool = True
    """Lowercase, with Greek final sigma folded to medial sigma."""

    strip_diacritics: bool = False
    """Remove combining marks after decomposition."""

    unicode_form: UnicodeForm = UnicodeForm.DECOMPOSED

    fold_latin_uv: bool = False
    """Fold lowercase v to u and j to i."""

    def __post_init__(self) -> None:
        if not isinstance(self.unicode_form, UnicodeForm):
            try:
                object.__setattr__(self, "unicode_form", UnicodeForm(self.unicode_form))
            except ValueError as err:
                raise ConfigurationException(
                    f"Invalid unicode form: {self.unicode_form}"
                ) from err


DEFAULT_OPTIONS = NormalizationOptions()


@dataclass(frozen=True)
class Token:
    """One word occurrence in a document or query."""

    surface: str
    """The word as it appears in the source text."""

    norm: str
    """Normalized form used for matching."""

    position: int
    """Ordinal token index within the document, 0-based."""

    line: int
    """Source line number, 1-based."""


def _is_mark(char: str) -> bool:
    return unicodedata.category(char).startswith("M")


def normalize_form(raw: str, options: NormalizationOptions = DEFAULT_OPTIONS) -> str:
    """Return the normalized form of a raw string under the given options."""
    if not raw:
        return ""
    text = raw
    if options.fold_case:
        text = text.lower().replace(FINAL_SIGMA, MEDIAL_SIGMA)
    text = unicodedata.normalize("NFD", text)
    if options.strip_diacritics:
        text = "".join(c for c in text if not _is_mark(c))
    if options.fold_latin_uv:
        text = text.translate(_LATIN_UV_TABLE)
    return unicodedata.normalize(options.unicode_form.nf, text)


def tokenize(
    text: str,
    options: NormalizationOptions = DEFAULT_OPTIONS,
    first_line: int = 1,
) -> list[Token]:
    """Split text into tokens, tracking the line each token starts on.

    Positions are assigned after dropping words whose normalized form is
    empty, so they are always gap-free.
    """
    tokens: list[Token] = []
    line = first_line
    scanned = 0
    for match in _WORD_RE.finditer(text):
        line += text.count("\n", scanned, match.start())
        scanned = match.start()
        surface = match.group()
        norm = normalize_form(surface, options)
        if not norm:
            continue
        tokens.append(Token(surface, norm, len(tokens), line))
    return tokens
