"""Library for finding quotations and allusions of a passage in a text corpus.

A source passage is compared against overlapping windows of every corpus
document and each window gets one combined score from five criteria:
quantity, quality, rarity, density and order of the matched words.

The primary components in this library are:
- `tokenizer`: Unicode normalization and word tokenization for Greek and Latin.
- `corpus`: Loads a directory of `*.txt` files into tokenized documents.
- `lexicon`: User supplied lemma, stem, synonym and frequency tables.
- `scoring`: Matching of a window to the passage and the five criteria.
- `search`: Sliding windows over the corpus and the global ranking.
- `formatter`: Output formats for results and score explanations.
- `cli`: The `allusio` command line tool.

Example usage:
```
    corpus = load_corpus("texts/")
    lexicon = prepare_lexicon(load_lexicon_dir("lexicon/"), corpus)
    query = Query.from_text("arma virumque cano")

    for result in search(corpus, query, lexicon):
        print(f"{result.score:0.4f} {result.document_id} {result.excerpt}")
```
"""

__all__ = [
    "tokenizer",
    "corpus",
    "lexicon",
    "scoring",
    "search",
    "formatter",
    "cli",
    "diagnostics",
    "exceptions",
]
