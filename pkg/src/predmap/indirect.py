"""Indirect links method: relink mapped subject-object pairs in the target graph.

Every target predicate that links at least one mapped pair is a candidate.
A candidate linking ``coverage`` pairs and occurring in ``frequency`` target
triples scores ``coverage * log(frequency)``; the best candidate's share of
the total score is its confidence.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Callable, Optional

from predmap.interlink import LinkTable, PairSet, map_pair_set
from predmap.triple_store import IRI

LogFn = Callable[[float], float]


@dataclass(frozen=True)
class CandidateScore:
    predicate: IRI
    coverage: int
    frequency: int
    score: float


@dataclass(frozen=True)
class IndirectResult:
    best: Optional[IRI] = None
    confidence: float = 0.0
    candidates: tuple = ()
    stats: dict = field(default_factory=dict)


@total_ordering
class _Strength:
    """Exact ordering of ``coverage * log(frequency)`` independent of log base.

    Float scores decide when clearly apart; near-ties are settled by comparing
    ``frequency ** coverage`` as integers, so equal scores stay equal and the
    ranking cannot flip between log bases.
    """

    __slots__ = ("coverage", "frequency", "approx")

    def __init__(self, coverage: int, frequency: int):
        self.coverage = coverage
        self.frequency = frequency
        self.approx = coverage * math.log(frequency) if frequency > 0 else 0.0

    def _cmp(self, other: "_Strength") -> int:
        a, b = self.approx, other.approx
        if abs(a - b) > 1e-9 * max(1.0, abs(a), abs(b)):
            return -1 if a < b else 1
        if a == 0.0 or b == 0.0:
            return (a > b) - (a < b)
        x = self.frequency ** self.coverage
        y = other.frequency ** other.coverage
        return (x > y) - (x < y)

    def __eq__(self, other):
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0


def _rank_key(c: CandidateScore):
    return (_Reverse(_Strength(c.coverage, c.frequency)), -c.coverage, c.predicate.value)


@total_ordering
class _Reverse:
    __slots__ = ("inner",)

    def __init__(self, inner):
        self.inner = inner

    def __eq__(self, other):
        return self.inner == other.inner

    def __lt__(self, other):
        return other.inner < self.inner


def rank_candidates(candidates) -> list[CandidateScore]:
    """Sort by descending score, then descending coverage, then ascending IRI."""
    return sorted(candidates, key=_rank_key)


def candidate_scores(t_pairs: PairSet | frozenset, target, log: LogFn = math.log) -> list[CandidateScore]:
    """Score every target predicate linking at least one mapped pair.

    ``target`` only needs ``predicates_linking`` and ``predicate_count``, so a
    remote store works as well as a local one.
    """
    pairs = t_pairs.pairs if isinstance(t_pairs, PairSet) else t_pairs
    coverage: Counter = Counter()
    for a, b in pairs:
        coverage.update(target.predicates_linking(a, b))
    out = []
    for p, c in coverage.items():
        n = target.predicate_count(p)
        out.append(CandidateScore(p, c, n, c * log(n) if n > 0 else 0.0))
    return rank_candidates(out)


def confidence_of(candidates) -> tuple[Optional[IRI], float]:
    """Best predicate and its share of the total score.

    With an all-zero score list the best is the highest-coverage candidate
    (ties by IRI) and confidence is 0.
    """
    if not candidates:
        return None, 0.0
    total = math.fsum(c.score for c in candidates)
    if total > 0:
        return candidates[0].predicate, candidates[0].score / total
    best = min(candidates, key=lambda c: (-c.coverage, c.predicate.value))
    return best.predicate, 0.0


def map_predicate_indirect(p_s: IRI, source, links: LinkTable, target,
                           log: LogFn = math.log) -> IndirectResult:
    s_pairs = PairSet(p_s, source.pairs_for_predicate(p_s))
    t_pairs, mapping_stats = map_pair_set(s_pairs, links)
    candidates = candidate_scores(t_pairs, target, log)
    best, confidence = confidence_of(candidates)
    stats = {
        "source_pairs": len(s_pairs),
        "target_pairs": len(t_pairs),
        "candidates": len(candidates),
        "kept": mapping_stats.kept,
        "dropped": mapping_stats.dropped,
        "resolutions": dict(mapping_stats.resolutions),
    }
    return IndirectResult(best, confidence, tuple(candidates), stats)

