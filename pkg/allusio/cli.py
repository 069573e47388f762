#!/usr/bin/python3

"""Command line tool for finding quotations and allusions in a text corpus.

The corpus is a directory of UTF-8 `*.txt` files. The optional lexicon is a
directory holding `lemmas.tsv` and, when available, `stems.tsv`,
`synonyms.tsv` and `freq.tsv`.

Once the corpus is in place, you can run commands like:

$ allusio stats texts/ --lexicon lexicon/
$ allusio search texts/ --lexicon lexicon/ --query "arma virumque cano"
$ allusio explain texts/ --query "arma virumque cano" --doc aeneid.txt --start 0

Exit codes: 0 on success (also with zero results), 2 for usage and input
errors, 1 for internal errors. ALLUSIO_THREADS caps the number of workers.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import regex

from .corpus import Corpus, load_corpus
from .diagnostics import get_diagnostics
from .exceptions import AllusioException, ConfigurationException, QueryException
from .formatter import FORMATTERS, explain_breakdown, format_results
from .lexicon import Lexicon, load_lexicon_dir, prepare_lexicon
from .scoring import Query, score_window
from .search import SearchParams, search, window_at
from .tokenizer import NormalizationOptions, UnicodeForm, normalize_form

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL_ERROR = 1
EXIT_INPUT_ERROR = 2

DEFAULT_TOP_LEMMAS = 10

_RELATED_SPLIT_RE = regex.compile(r"[,\s]+")

# Define command line arguments
parser = argparse.ArgumentParser(
    description="Find quotations and allusions of a source passage in a corpus"
)
parser.add_argument(
    "-v", "--verbose", help="Increase output verbosity", action="store_true"
)

cmd_parser = parser.add_subparsers(dest="command", required=True)


def _add_corpus_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("corpus_dir", help="Directory of UTF-8 *.txt corpus files")
    sub.add_argument(
        "--lexicon",
        help="Directory with lemmas.tsv and optional stems/synonyms/freq tables",
    )
    sub.add_argument(
        "--strip-diacritics",
        action="store_true",
        help="Remove accents and breathings before matching",
    )
    sub.add_argument(
        "--no-fold-case",
        action="store_true",
        help="Keep upper and lower case distinct",
    )
    sub.add_argument(
        "--fold-uv", action="store_true", help="Treat Latin v as u and j as i"
    )
    sub.add_argument(
        "--unicode-form",
        choices=[form.value for form in UnicodeForm],
        default=UnicodeForm.DECOMPOSED.value,
        help="Unicode normalization form of the compared words",
    )


def _add_query_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--query", help="The source passage to search for")
    sub.add_argument("--query-file", help="File holding the source passage")
    sub.add_argument(
        "--related",
        action="append",
        default=[],
        metavar="WORDS",
        help="Comma separated lemmas to treat as synonyms for this search",
    )
    sub.add_argument("--window", type=int, help="Window size in tokens")
    sub.add_argument("--stride", type=int, help="Distance between window starts")
    sub.add_argument("--top", type=int, help="Maximum number of results")
    sub.add_argument(
        "--min-score", type=float, help="Drop results scoring below this value"
    )


stats_parser = cmd_parser.add_parser(
    "stats", description="Report corpus and lexicon sizes."
)
_add_corpus_arguments(stats_parser)
stats_parser.add_argument(
    "--top",
    type=int,
    default=DEFAULT_TOP_LEMMAS,
    help="Number of most frequent lemmas to list",
)

search_parser = cmd_parser.add_parser(
    "search", description="Rank corpus windows by how closely they quote the query."
)
_add_corpus_arguments(search_parser)
_add_query_arguments(search_parser)
search_parser.add_argument(
    "--format",
    choices=sorted(FORMATTERS),
    default="human",
    help="Output format (default: human)",
)

explain_parser = cmd_parser.add_parser(
    "explain", description="Show the score breakdown of one corpus window."
)
_add_corpus_arguments(explain_parser)
_add_query_arguments(explain_parser)
explain_parser.add_argument("--doc", required=True, help="Document id")
explain_parser.add_argument(
    "--start", type=int, required=True, help="Token position of the window start"
)


def _options(args: argparse.Namespace) -> NormalizationOptions:
    return NormalizationOptions(
        fold_case=not args.no_fold_case,
        strip_diacritics=args.strip_diacritics,
        unicode_form=UnicodeForm(args.unicode_form),
        fold_latin_uv=args.fold_uv,
    )


def _load_lexicon(args: argparse.Namespace, options: NormalizationOptions) -> Lexicon:
    lexicon = load_lexicon_dir(args.lexicon, options) if args.lexicon else Lexicon()
    for words in getattr(args, "related", []):
        lemmas = {
            form
            for word in _RELATED_SPLIT_RE.split(words)
            if (form := normalize_form(word, options))
        }
        if len(lemmas) < 2:
            raise ConfigurationException(
                f"--related needs at least 2 distinct words: '{words}'"
            )
        lexicon = lexicon.with_synonym_set(lemmas)
    return lexicon


def _read_query(args: argparse.Namespace, options: NormalizationOptions) -> Query:
    if args.query is not None and args.query_file is not None:
        raise ConfigurationException("Use either --query or --query-file, not both")
    if args.query_file is not None:
        try:
            text = Path(args.query_file).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as err:
            raise QueryException(
                f"Unable to read query file {args.query_file}: {err}"
            ) from err
    elif args.query is not None:
        text = args.query
    else:
        raise QueryException("empty query: use --query or --query-file")
    return Query.from_text(text, options)


def _search_params(args: argparse.Namespace, query: Query) -> SearchParams:
    return SearchParams.for_query(
        len(query),
        window_size=args.window,
        stride=args.stride,
        top_k=args.top,
        min_score=args.min_score,
    )


def _prepare(
    args: argparse.Namespace,
) -> tuple[Corpus, Query, Lexicon, SearchParams]:
    options = _options(args)
    query = _read_query(args, options)
    corpus = load_corpus(args.corpus_dir, options)
    lexicon = prepare_lexicon(_load_lexicon(args, options), corpus)
    return corpus, query, lexicon, _search_params(args, query)


def cmd_stats(args: argparse.Namespace) -> None:
    """Print corpus and lexicon sizes and the most frequent lemmas."""
    options = _options(args)
    corpus = load_corpus(args.corpus_dir, options)
    loaded = _load_lexicon(args, options)
    lexicon = prepare_lexicon(loaded, corpus)
    source = "file" if loaded.frequencies is not None else "corpus"
    frequencies = lexicon.frequencies or {}
    print(f"documents: {len(corpus.documents)}")
    print(f"tokens: {corpus.total_tokens}")
    print(f"lemmas: {len(lexicon.lemmas)}")
    print(f"stems: {len(lexicon.stem_groups)}")
    print(f"synonym sets: {len(lexicon.synonym_sets)}")
    print(f"frequencies: {len(frequencies)} ({source})")
    print("top lemmas:")
    top = sorted(frequencies.items(), key=lambda item: (-item[1], item[0]))
    for lemma, count in top[: args.top]:
        print(f"  {lemma}\t{count}")


def cmd_search(args: argparse.Namespace) -> None:
    """Print the ranked results in the chosen format."""
    corpus, query, lexicon, params = _prepare(args)
    results = search(corpus, query, lexicon, params)
    print(format_results(results, args.format))


def cmd_explain(args: argparse.Namespace) -> None:
    """Print the per-match table and score arithmetic for one window."""
    corpus, query, lexicon, params = _prepare(args)
    document = corpus.get_document(args.doc)
    window = window_at(document, params, args.start)
    breakdown = score_window(query, window, lexicon)
    end = args.start + len(window)
    lines = f"lines {window[0].line}-{window[-1].line}" if window else "empty"
    print(f"{document.id} [{args.start}, {end}) {lines}")
    print(explain_breakdown(breakdown))


COMMANDS = {
    "stats": cmd_stats,
    "search": cmd_search,
    "explain": cmd_explain,
}


def main(argv: list[str] | None = None) -> int:
    """Allusio command line tool."""
    args: argparse.Namespace = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG)
    try:
        COMMANDS[args.command](args)
    except AllusioException as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as err:  # pylint: disable=broad-except
        _LOGGER.debug("Unexpected failure", exc_info=True)
        print(f"internal error: {err}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
    _LOGGER.debug("Diagnostics: %s", get_diagnostics())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
