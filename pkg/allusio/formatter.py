"""Output formats for ranked results and score explanations.

Formats are registered by name in `FORMATTERS`; each takes the ranked
results and returns the text to print. json and yaml embed the full score
breakdown, tsv has one row per result and human is meant for reading.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Sequence
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any

import yaml

from .registry import Registry
from .scoring import DENSITY_WEIGHT, QUALITY_GROUP_DIVISOR, ScoreBreakdown
from .search import RankedResult

__all__ = [
    "FORMATTERS",
    "OutputFormat",
    "format_score",
    "format_results",
    "explain_breakdown",
]

FORMATTERS = Registry()

OutputFormat = Callable[[Sequence[RankedResult]], str]

TSV_HEADER = ("rank", "score", "doc", "start", "end", "excerpt")
SCORE_QUANTUM = Decimal("0.0001")


def format_score(value: float) -> str:
    """Return a score with 4 decimals, rounding half to even."""
    return str(Decimal(repr(value)).quantize(SCORE_QUANTUM, rounding=ROUND_HALF_EVEN))


def _format_points(value: float) -> str:
    """Whole numbers print without decimals, everything else like a score."""
    return str(int(value)) if float(value).is_integer() else format_score(value)


def _records(results: Sequence[RankedResult]) -> list[dict[str, Any]]:
    return [
        {"rank": rank, **result.raw_data}
        for rank, result in enumerate(results, start=1)
    ]


def _marked_excerpt(result: RankedResult) -> str:
    matched = result.matched_indices
    return " ".join(
        f"[{word}]" if i in matched else word
        for i, word in enumerate(result.excerpt.split(" "))
    )


@FORMATTERS.register("human")
def format_human(results: Sequence[RankedResult]) -> str:
    """Rank, score, citation and the excerpt with matched words in brackets."""
    if not results:
        return "no results"
    blocks = []
    for rank, result in enumerate(results, start=1):
        citation = ", ".join(p for p in (result.author, result.work) if p)
        blocks.append(
            f"{rank}. {format_score(result.score)}  "
            f"{citation or result.document_id}  "
            f"{result.document_id}:{result.window_start}-{result.window_end}  "
            f"lines {result.first_line}-{result.last_line}\n"
            f"   {_marked_excerpt(result)}"
        )
    return "\n".join(blocks)


@FORMATTERS.register("tsv")
def format_tsv(results: Sequence[RankedResult]) -> str:
    """Tab separated rows under a header line, one row per result."""
    rows = ["\t".join(TSV_HEADER)]
    for rank, result in enumerate(results, start=1):
        rows.append(
            "\t".join(
                (
                    str(rank),
                    format_score(result.score),
                    result.document_id,
                    str(result.window_start),
                    str(result.window_end),
                    result.excerpt,
                )
            )
        )
    return "\n".join(rows)


@FORMATTERS.register("json")
def format_json(results: Sequence[RankedResult]) -> str:
    """A JSON array of result records."""
    return json.dumps(_records(results), ensure_ascii=False, indent=2)


@FORMATTERS.register("yaml")
def format_yaml(results: Sequence[RankedResult]) -> str:
    """A YAML list of result records."""
    return str(
        yaml.safe_dump(_records(results), allow_unicode=True, sort_keys=False)
    ).rstrip("\n")


def format_results(results: Sequence[RankedResult], output_format: str) -> str:
    """Render results in the named output format."""
    formatter: OutputFormat = FORMATTERS.lookup(output_format)
    return formatter(results)


def explain_breakdown(breakdown: ScoreBreakdown) -> str:
    """Return the per-match table and the arithmetic of the combined score."""
    if not breakdown.matches:
        return "no matches; score 0"
    width = max(
        len("source"),
        len("target"),
        *(len(m.source_word) for m in breakdown.matches),
        *(len(m.target_word) for m in breakdown.matches),
    )
    lines = [
        f"{'source':<{width}}  {'target':<{width}}  tier  rarity  density   order"
    ]
    for m in breakdown.matches:
        lines.append(
            f"{m.source_word:<{width}}  {m.target_word:<{width}}  "
            f"{int(m.tier):>4}  {format_score(m.rarity):>6}  "
            f"{format_score(m.density):>7}  {format_score(m.order):>6}"
        )
    if breakdown.core is not None:
        lines.append(f"core offset: {breakdown.core.offset}")
    lines.append(
        f"({breakdown.quantity} + {breakdown.quality_sum} + "
        f"{_format_points(breakdown.rarity_sum)})/{QUALITY_GROUP_DIVISOR} + "
        f"{DENSITY_WEIGHT}×{format_score(breakdown.density_total)} + "
        f"{format_score(breakdown.order_total)} = {format_score(breakdown.combined)}"
    )
    return "\n".join(lines)
