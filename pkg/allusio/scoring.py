"""Scoring of a candidate window against the source passage.

Five criteria are combined into one score:

- quantity: 1 point per counted match; a source word occurring n times is
  counted at most n times however often the target repeats it.
- quality: 3 points for the exact form, 2 for another form of the same lemma,
  1 for a lemma in the same stem group or synonym set.
- rarity: between 0 and 1 point per match, see `lexicon.rarity_score`.
- density: per match 1 / (words inserted since the previous match + 1).
- order: per match 1 / (positions strayed from the core alignment + 1).

combined = (quantity + quality + rarity) / 3 + 2 * density + order
"""

from __future__ import annotations

import functools
import logging
import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import IntEnum

from .diagnostics import SEARCH_DIAGNOSTICS as DIAGNOSTICS
from .exceptions import QueryException, ScoringException
from .lexicon import Lexicon
from .model import ResultDataClass
from .tokenizer import DEFAULT_OPTIONS, NormalizationOptions, Token, tokenize

__all__ = [
    "QualityTier",
    "Query",
    "MatchCandidate",
    "Assignment",
    "CoreAlignment",
    "ScoredMatch",
    "ScoreBreakdown",
    "QueryMatcher",
    "classify_match",
    "find_candidates",
    "assign_matches",
    "align_core",
    "density_scores",
    "order_scores",
    "combine",
    "score_candidates",
    "score_window",
    "score_norms",
    "MatchEntry",
    "MatchTable",
]

_LOGGER = logging.getLogger(__name__)

# Resolution used when rarity takes part in the exact assignment objective
RARITY_RESOLUTION = 10**12

DENSITY_WEIGHT = 2
QUALITY_GROUP_DIVISOR = 3

# (source index, target index)
Pair = tuple[int, int]
# (tier, rarity in units of 1/RARITY_RESOLUTION)
Edge = tuple[int, int]


class QualityTier(IntEnum):
    """Points awarded for how closely a target word matches a source word."""

    RELATED = 1
    SAME_WORD = 2
    EXACT = 3


# Query matches of one target form and its rarity
MatchEntry = tuple[tuple[tuple[int, QualityTier], ...], float]
MatchTable = Mapping[str, MatchEntry]


@dataclass(frozen=True)
class Query:
    """The tokenized source passage whose quotations are sought."""

    text: str
    tokens: tuple[Token, ...]

    @classmethod
    def from_text(
        cls, text: str, options: NormalizationOptions = DEFAULT_OPTIONS
    ) -> Query:
        """Tokenize a source passage, raising QueryException if it has no words."""
        tokens = tuple(tokenize(text, options))
        if not tokens:
            raise QueryException("empty query")
        return cls(text, tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class MatchCandidate(ResultDataClass):
    """A possible match between one source token and one window token."""

    source_index: int
    target_index: int
    """Index into the window tokens."""

    tier: QualityTier
    rarity: float


@dataclass(frozen=True)
class Assignment:
    """A one-to-one set of matches, ordered by target index."""

    matches: tuple[MatchCandidate, ...] = ()

    def __post_init__(self) -> None:
        sources = {m.source_index for m in self.matches}
        targets = {m.target_index for m in self.matches}
        if len(sources) != len(self.matches) or len(targets) != len(self.matches):
            raise ScoringException("Assignment must be one-to-one")
        object.__setattr__(
            self,
            "matches",
            tuple(sorted(self.matches, key=lambda m: (m.target_index, m.source_index))),
        )

    def __len__(self) -> int:
        return len(self.matches)

    def __bool__(self) -> bool:
        return bool(self.matches)


@dataclass(frozen=True)
class CoreAlignment(ResultDataClass):
    """Offset of the target positions relative to the source positions."""

    offset: int


@dataclass(frozen=True)
class ScoredMatch(ResultDataClass):
    """A counted match with the points it earned for each criterion."""

    source_index: int
    target_index: int
    source_word: str
    target_word: str
    tier: QualityTier
    rarity: float
    density: float
    order: float


@dataclass(frozen=True)
class ScoreBreakdown(ResultDataClass):
    """Per window record of all criterion subtotals and the combined score."""

    quantity: int = 0
    quality_sum: int = 0
    rarity_sum: float = 0.0
    density_total: float = 0.0
    order_total: float = 0.0
    combined: float = 0.0
    matches: tuple[ScoredMatch, ...] = field(default_factory=tuple)
    core: CoreAlignment | None = None

    def recompute(self) -> float:
        """Return the combined score recomputed from the subtotals."""
        return combine(
            self.quantity,
            self.quality_sum,
            self.rarity_sum,
            self.density_total,
            self.order_total,
        )


def _classify_forms(source: str, target: str, lexicon: Lexicon) -> QualityTier | None:
    if source == target:
        return QualityTier.EXACT
    source_lemma = lexicon.lemma_key(source)
    target_lemma = lexicon.lemma_key(target)
    if source_lemma == target_lemma:
        return QualityTier.SAME_WORD
    if lexicon.related(source_lemma, target_lemma):
        return QualityTier.RELATED
    return None


def classify_match(
    source_token: Token, target_token: Token, lexicon: Lexicon
) -> QualityTier | None:
    """Return the highest quality tier that applies to the pair, if any."""
    return _classify_forms(source_token.norm, target_token.norm, lexicon)


class QueryMatcher:
    """Caches, per normalized target form, which query tokens it matches.

    A corpus repeats the same forms many times, so each distinct form is
    classified against the query only once.
    """

    def __init__(self, query: Query, lexicon: Lexicon) -> None:
        """Initialize QueryMatcher."""
        if not query.tokens:
            raise QueryException("empty query")
        self._query = query
        self._lexicon = lexicon
        self._matches: dict[str, tuple[tuple[int, QualityTier], ...]] = {}
        self._rarity: dict[str, float] = {}

    @property
    def query(self) -> Query:
        """Return the query being matched."""
        return self._query

    @property
    def lexicon(self) -> Lexicon:
        """Return the lexicon used for matching."""
        return self._lexicon

    def matches_for(self, norm: str) -> tuple[tuple[int, QualityTier], ...]:
        """Return (source index, tier) for every query token the form matches."""
        if (cached := self._matches.get(norm)) is not None:
            return cached
        found = []
        for source_index, source in enumerate(self._query.tokens):
            tier = _classify_forms(source.norm, norm, self._lexicon)
            if tier is not None:
                found.append((source_index, tier))
        result = tuple(found)
        self._matches[norm] = result
        return result

    def rarity_for(self, norm: str) -> float:
        """Return the rarity score of a target form."""
        if (cached := self._rarity.get(norm)) is not None:
            return cached
        rarity = self._lexicon.rarity(norm)
        self._rarity[norm] = rarity
        return rarity

    def candidates(self, window: Sequence[Token]) -> list[MatchCandidate]:
        """Return every qualifying (source, target) pair for the window."""
        result = [
            MatchCandidate(source_index, target_index, tier, self.rarity_for(norm))
            for target_index, norm in enumerate(token.norm for token in window)
            for source_index, tier in self.matches_for(norm)
        ]
        result.sort(key=lambda m: (m.source_index, m.target_index))
        return result

    def table(self, norms: Iterable[str]) -> dict[str, MatchEntry]:
        """Return the entries of the forms among norms that match the query.

        The table carries no lexicon, so it is cheap to send to a worker
        process together with the forms of a text.
        """
        return {
            norm: (found, self.rarity_for(norm))
            for norm in set(norms)
            if (found := self.matches_for(norm))
        }

    def breakdown(self, window: Sequence[Token]) -> ScoreBreakdown:
        """Score a window in full without counting it in the diagnostics."""
        best = {(c.source_index, c.target_index): c for c in self.candidates(window)}
        if not best:
            return ScoreBreakdown()
        chosen, _ = _select_pairs(_edges(best))
        return _breakdown(
            self._query, window, Assignment(tuple(best[pair] for pair in chosen))
        )


def find_candidates(
    query: Query, window: Sequence[Token], lexicon: Lexicon
) -> list[MatchCandidate]:
    """Return every source/window token pair with a quality tier."""
    return QueryMatcher(query, lexicon).candidates(window)


def _rarity_units(rarity: float) -> int:
    return round(rarity * RARITY_RESOLUTION)


@functools.cache
def _order_scale(max_stray: int) -> int:
    """Return a multiple of 1..max_stray+1 so every order point is integral."""
    return math.lcm(*range(1, max_stray + 2))


def _core_offset(diffs: Sequence[int]) -> int:
    """Return the offset maximizing the order sum of the given t - s values."""
    offsets = sorted(set(diffs))
    scale = _order_scale(offsets[-1] - offsets[0])
    best_offset, best_units = offsets[0], -1
    for offset in offsets:
        units = sum(scale // (abs(d - offset) + 1) for d in diffs)
        if units > best_units:
            best_offset, best_units = offset, units
    return best_offset


def _components(pairs: Sequence[Pair]) -> list[list[Pair]]:
    """Split pairs into groups that share no source and no target."""
    parent: dict[int, int] = {}

    def find(node: int) -> int:
        root = node
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[node] != root:
            parent[node], node = root, parent[node]
        return root

    # Targets are keyed as ~t so they never collide with source indices
    for source, target in pairs:
        a, b = find(source), find(~target)
        if a != b:
            parent[a] = b
    groups: dict[int, list[Pair]] = {}
    for pair in pairs:
        groups.setdefault(find(pair[0]), []).append(pair)
    return list(groups.values())


def _star_choice(
    star: Sequence[Pair], edges: Mapping[Pair, Edge], offset: int
) -> Pair:
    """Return the best pair of a group with a single source or a single target."""
    return max(
        star,
        key=lambda p: (*edges[p], -abs(p[1] - p[0] - offset), -p[1], -p[0]),
    )


def _order_bound(component: Sequence[Pair], offset: int, scale: int) -> int:
    """Return an upper bound of the order units any matching of the group earns."""
    by_source: dict[int, int] = {}
    by_target: dict[int, int] = {}
    for source, target in component:
        units = scale // (abs(target - source - offset) + 1)
        by_source[source] = max(units, by_source.get(source, 0))
        by_target[target] = max(units, by_target.get(target, 0))
    return min(sum(by_source.values()), sum(by_target.values()))


def _max_weight_matching(
    weights: Mapping[Pair, int],
) -> list[Pair]:
    """Return the maximum weight matching of a bipartite graph with positive weights.

    Hungarian algorithm with potentials over exact integers. Missing edges
    weigh 0 so a perfect assignment of the smaller side always exists; the
    zero pairs are dropped from the result.
    """
    rows = sorted({r for r, _ in weights})
    cols = sorted({c for _, c in weights})
    transposed = len(rows) > len(cols)
    if transposed:
        rows, cols = cols, rows
    n, m = len(rows), len(cols)
    row_at = {r: i for i, r in enumerate(rows)}
    col_at = {c: j for j, c in enumerate(cols)}
    cost = [[0] * m for _ in range(n)]
    for (a, b), weight in weights.items():
        r, c = (b, a) if transposed else (a, b)
        cost[row_at[r]][col_at[c]] = -weight

    u = [0] * (n + 1)
    v = [0] * (m + 1)
    p = [0] * (m + 1)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv: list[int | None] = [None] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            u_i0 = u[i0]
            delta: int | None = None
            j1 = 0
            for j in range(1, m + 1):
                if used[j]:
                    continue
                current = row[j - 1] - u_i0 - v[j]
                best = minv[j]
                if best is None or current < best:
                    minv[j] = best = current
                    way[j] = j0
                if delta is None or best < delta:
                    delta = best
                    j1 = j
            assert delta is not None
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    remaining = minv[j]
                    assert remaining is not None
                    minv[j] = remaining - delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break

    matching = []
    for j in range(1, m + 1):
        if p[j] == 0:
            continue
        row_key, col_key = rows[p[j] - 1], cols[j - 1]
        pair = (col_key, row_key) if transposed else (row_key, col_key)
        if pair in weights:
            matching.append(pair)
    return matching


def _solve_component(
    component: Sequence[Pair], edges: Mapping[Pair, Edge], offset: int
) -> list[Pair]:
    """Return the best matching of one group for a fixed core offset.

    Every criterion is a per-pair weight once the offset is fixed, so the
    criteria are packed into one integer per pair with each radix exceeding
    twice the largest total of all lower levels.
    """
    ordered = sorted(component, key=lambda p: (p[1], p[0]))
    strays = [abs(t - s - offset) for s, t in ordered]
    scale = _order_scale(max(strays))
    size = min(len({s for s, _ in ordered}), len({t for _, t in ordered}))
    span = ordered[-1][1] + 1
    target_radix = 1 << (len(ordered) + 1)
    order_radix = target_radix * 2 * (size * span + 1)
    rarity_radix = order_radix * 2 * (size * scale + 1)
    tier_radix = rarity_radix * 2 * (size * max(edges[p][1] for p in ordered) + 1)
    weights = {}
    for rank, (pair, stray) in enumerate(zip(ordered, strays)):
        tier, rarity = edges[pair]
        weights[pair] = (
            tier * tier_radix
            + rarity * rarity_radix
            + scale // (stray + 1) * order_radix
            - pair[1] * target_radix
            - (1 << rank)
        )
    return _max_weight_matching(weights)


def _select_pairs(edges: Mapping[Pair, Edge]) -> tuple[list[Pair], bool]:
    """Return the best one-to-one set of pairs and whether any pairs conflicted.

    Pairs sharing neither a source nor a target are always chosen. The other
    groups are solved for every candidate core offset; within a group a
    single source or single target needs only the best pair, larger groups
    go to the matching solver. Offsets whose order bound cannot reach the
    best order found so far are skipped.
    """
    sources = Counter(s for s, _ in edges)
    targets = Counter(t for _, t in edges)
    if all(sources[s] == 1 and targets[t] == 1 for s, t in edges):
        return list(edges), False

    pairs = sorted(edges, key=lambda p: (p[1], p[0]))
    rank = {pair: i for i, pair in enumerate(pairs)}
    fixed: list[Pair] = []
    stars: list[list[Pair]] = []
    groups: list[list[Pair]] = []
    for component in _components(pairs):
        if len(component) == 1:
            fixed.append(component[0])
        elif len({s for s, _ in component}) == 1 or len({t for _, t in component}) == 1:
            stars.append(component)
        else:
            groups.append(component)

    offsets = sorted({t - s for s, t in pairs})
    scale = _order_scale(offsets[-1] - offsets[0])
    plans = []
    for offset in offsets:
        chosen = fixed + [_star_choice(star, edges, offset) for star in stars]
        bound = sum(scale // (abs(t - s - offset) + 1) for s, t in chosen) + sum(
            _order_bound(group, offset, scale) for group in groups
        )
        plans.append((bound, offset, chosen))
    plans.sort(key=lambda plan: (-plan[0], plan[1]))

    best_key: tuple[int, int, int] | None = None
    best_pairs: list[Pair] = []
    for bound, offset, chosen in plans:
        if best_key is not None and bound < best_key[0]:
            break
        for group in groups:
            chosen = chosen + _solve_component(group, edges, offset)
        key = (
            sum(scale // (abs(t - s - offset) + 1) for s, t in chosen),
            -sum(t for _, t in chosen),
            -sum(1 << rank[pair] for pair in chosen),
        )
        if best_key is None or key > best_key:
            best_key, best_pairs = key, chosen
    return best_pairs, True


def _edges(best: Mapping[Pair, MatchCandidate]) -> dict[Pair, Edge]:
    return {pair: (int(m.tier), _rarity_units(m.rarity)) for pair, m in best.items()}


def assign_matches(candidates: Iterable[MatchCandidate]) -> Assignment:
    """Select the one-to-one subset of candidates that scores best.

    Subsets are ranked by, in order: quality points, rarity points, order
    points under the subset's own best core, the smallest sum of target
    indices, and finally the smallest bit mask over the candidate pairs
    ordered by (target index, source index).

    The quality and rarity optimum does not depend on the core, and the
    order points of a fixed subset peak at one of its own offsets, so the
    best matching over all candidate offsets is the best subset overall.
    """
    best: dict[Pair, MatchCandidate] = {}
    for candidate in candidates:
        pair = (candidate.source_index, candidate.target_index)
        if pair not in best or candidate.tier > best[pair].tier:
            best[pair] = candidate
    if not best:
        return Assignment()
    chosen, solved = _select_pairs(_edges(best))
    if solved:
        DIAGNOSTICS.increment("assignments_solved")
    return Assignment(tuple(best[pair] for pair in chosen))


def align_core(assignment: Assignment) -> CoreAlignment:
    """Return the offset that best reproduces the source's relative positions.

    Only offsets of the assignment's own matches are considered; ties go to
    the smallest offset.
    """
    if not assignment:
        raise ScoringException("Cannot align the core of an empty assignment")
    return CoreAlignment(
        _core_offset([m.target_index - m.source_index for m in assignment.matches])
    )


def _density_points(targets: Sequence[int]) -> list[float]:
    if not targets:
        return []
    return [1.0] + [1.0 / (b - a) for a, b in zip(targets, targets[1:])]


def _order_points(diffs: Iterable[int], offset: int) -> list[float]:
    return [1.0 / (abs(d - offset) + 1) for d in diffs]


def density_scores(assignment: Assignment) -> float:
    """Return the density total, 1/(inserted words + 1) per match in target order."""
    return math.fsum(_density_points([m.target_index for m in assignment.matches]))


def order_scores(assignment: Assignment, core: CoreAlignment) -> float:
    """Return the order total, 1/(stray + 1) per match relative to the core."""
    diffs = (m.target_index - m.source_index for m in assignment.matches)
    return math.fsum(_order_points(diffs, core.offset))


def combine(
    quantity: float,
    quality_sum: float,
    rarity_sum: float,
    density_total: float,
    order_total: float,
) -> float:
    """Return the combined score of the five criteria."""
    return (
        (quantity + quality_sum + rarity_sum) / QUALITY_GROUP_DIVISOR
        + DENSITY_WEIGHT * density_total
        + order_total
    )


def _totals(
    matches: Sequence[MatchCandidate],
) -> tuple[CoreAlignment, list[float], list[float], float]:
    """Return the core, per match density and order points, and the combined score.

    matches must be sorted by target index.
    """
    diffs = [m.target_index - m.source_index for m in matches]
    core = CoreAlignment(_core_offset(diffs))
    density = _density_points([m.target_index for m in matches])
    order = _order_points(diffs, core.offset)
    combined = combine(
        len(matches),
        sum(int(m.tier) for m in matches),
        math.fsum(m.rarity for m in matches),
        math.fsum(density),
        math.fsum(order),
    )
    return core, density, order, combined


def _breakdown(
    query: Query, window: Sequence[Token], assignment: Assignment
) -> ScoreBreakdown:
    if not assignment:
        return ScoreBreakdown()
    core, density, order, combined = _totals(assignment.matches)
    matches = tuple(
        ScoredMatch(
            source_index=m.source_index,
            target_index=m.target_index,
            source_word=query.tokens[m.source_index].surface,
            target_word=window[m.target_index].surface,
            tier=m.tier,
            rarity=m.rarity,
            density=d,
            order=o,
        )
        for m, d, o in zip(assignment.matches, density, order)
    )
    return ScoreBreakdown(
        quantity=len(matches),
        quality_sum=sum(int(m.tier) for m in matches),
        rarity_sum=math.fsum(m.rarity for m in matches),
        density_total=math.fsum(density),
        order_total=math.fsum(order),
        combined=combined,
        matches=matches,
        core=core,
    )


def score_candidates(
    query: Query, window: Sequence[Token], candidates: Iterable[MatchCandidate]
) -> ScoreBreakdown:
    """Score a window from its already computed match candidates."""
    return _breakdown(query, window, assign_matches(candidates))


def score_window(
    query: Query, window: Sequence[Token], lexicon: Lexicon
) -> ScoreBreakdown:
    """Score one candidate window against the query."""
    if not query.tokens:
        raise QueryException("empty query")
    return score_candidates(query, window, find_candidates(query, window, lexicon))


def score_norms(table: MatchTable, norms: Sequence[str]) -> tuple[float, bool]:
    """Return the combined score of a window of normalized forms.

    Equal to `score_window(...).combined` for the same window, without
    building the per match breakdown. The second value tells whether
    conflicting pairs had to be resolved.
    """
    best: dict[Pair, MatchCandidate] = {}
    for target, norm in enumerate(norms):
        if (entry := table.get(norm)) is None:
            continue
        found, rarity = entry
        for source, tier in found:
            best[(source, target)] = MatchCandidate(source, target, tier, rarity)
    if not best:
        return 0.0, False
    chosen, solved = _select_pairs(_edges(best))
    matches = sorted((best[pair] for pair in chosen), key=lambda m: m.target_index)
    return _totals(matches)[3], solved
