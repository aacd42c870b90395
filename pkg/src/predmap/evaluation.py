"""Scoring mappings against gold ratings, rater agreement, and synthetic fixtures."""

from __future__ import annotations

import enum
import math
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

from predmap.interlink import LinkTable, write_link_files
from predmap.triple_store import IRI, XSD, Literal, Triple, TripleStore

NOT_AVAILABLE = "N/A"


class Rating(enum.Enum):
    EQUIVALENT = "EQ"
    SOURCE_SUBSUMED_BY_TARGET = "SUB"
    TARGET_SUBSUMED_BY_SOURCE = "SUP"
    UNRELATED = "UNREL"
    NOT_AVAILABLE = "NA"


_PARTIAL = (Rating.EQUIVALENT, Rating.SOURCE_SUBSUMED_BY_TARGET, Rating.TARGET_SUBSUMED_BY_SOURCE)


class GoldFormatError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


@dataclass(frozen=True)
class EvaluationReport:
    counts: Mapping[Rating, int]
    precision1: float
    precision2: float
    total: int

    def rows(self) -> list[tuple[str, str]]:
        out = [(r.name.lower(), str(self.counts.get(r, 0))) for r in Rating]
        out += [("total", str(self.total)),
                ("precision1", f"{self.precision1:.3f}"),
                ("precision2", f"{self.precision2:.3f}")]
        return out

    def to_tsv(self) -> str:
        return "".join(f"{k}\t{v}\n" for k, v in self.rows())

    def to_text(self) -> str:
        labels = {
            Rating.EQUIVALENT: "p_S == p_T",
            Rating.SOURCE_SUBSUMED_BY_TARGET: "p_S sub-property of p_T",
            Rating.TARGET_SUBSUMED_BY_SOURCE: "p_T sub-property of p_S",
            Rating.UNRELATED: "unrelated",
            Rating.NOT_AVAILABLE: "N/A",
        }
        lines = [f"{labels[r]:<26}{self.counts.get(r, 0):>8}" for r in Rating]
        lines.append(f"{'total':<26}{self.total:>8}")
        lines.append(f"{'Precision 1':<26}{self.precision1:>8.3f}")
        lines.append(f"{'Precision 2':<26}{self.precision2:>8.3f}")
        return "\n".join(lines) + "\n"


def evaluate(ratings: Sequence[Rating]) -> EvaluationReport:
    """Precision over all rated mappings; N/A ratings stay in the denominator."""
    if not ratings:
        raise ValueError("cannot evaluate an empty rating list")
    counts = Counter(ratings)
    total = len(ratings)
    return EvaluationReport(
        counts={r: counts.get(r, 0) for r in Rating},
        precision1=counts[Rating.EQUIVALENT] / total,
        precision2=sum(counts[r] for r in _PARTIAL) / total,
        total=total,
    )


def evaluate_counts(equivalent: int, source_sub: int, target_sub: int, unrelated: int,
                    not_available: int) -> EvaluationReport:
    ratings = (
        [Rating.EQUIVALENT] * equivalent
        + [Rating.SOURCE_SUBSUMED_BY_TARGET] * source_sub
        + [Rating.TARGET_SUBSUMED_BY_SOURCE] * target_sub
        + [Rating.UNRELATED] * unrelated
        + [Rating.NOT_AVAILABLE] * not_available
    )
    return evaluate(ratings)


def cohens_kappa(ratings_a: Sequence, ratings_b: Sequence) -> float:
    """Two-rater Cohen's kappa over nominal categories.

    Perfect observed agreement returns 1.0, which also covers the otherwise
    undefined case where both raters use a single category.
    """
    if len(ratings_a) != len(ratings_b):
        raise ValueError(f"rating vectors differ in length: {len(ratings_a)} vs {len(ratings_b)}")
    n = len(ratings_a)
    if n == 0:
        raise ValueError("cannot compute kappa on empty rating vectors")
    observed = sum(a == b for a, b in zip(ratings_a, ratings_b)) / n
    if observed == 1.0:
        return 1.0
    ca, cb = Counter(ratings_a), Counter(ratings_b)
    expected = sum(ca[k] * cb[k] for k in ca) / (n * n)
    return (observed - expected) / (1.0 - expected)


def load_gold(text: str) -> dict[str, tuple[str, Rating]]:
    """Parse ``p_S \\t p_T \\t code`` rows; codes are EQ, SUB, SUP, UNREL, NA."""
    gold: dict[str, tuple[str, Rating]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cols = [c.strip() for c in line.split("\t")]
        if len(cols) != 3 or not cols[0] or not cols[1]:
            raise GoldFormatError(lineno, "expected 3 tab-separated columns")
        source, target, code = cols
        try:
            rating = Rating(code.upper())
        except ValueError:
            raise GoldFormatError(lineno, f"unknown rating code {code!r}") from None
        if source in gold:
            raise GoldFormatError(lineno, f"duplicate source predicate {source}")
        gold[source] = (target, rating)
    return gold


def write_gold(gold: Mapping[str, tuple[str, Rating]]) -> str:
    return "".join(f"{s}\t{t}\t{r.value}\n" for s, (t, r) in sorted(gold.items()))


def rate_mappings(mappings: Sequence[tuple[str, str]], gold: Mapping[str, tuple[str, Rating]]
                  ) -> tuple[list[Rating], list[str]]:
    """Rate each ``(p_S, p_T)`` mapping from the gold sheet.

    A mapping whose target agrees with the gold row takes the gold rating; a
    missing target is N/A; any other target is unrelated. Source predicates
    absent from the gold sheet are returned separately.
    """
    ratings, missing = [], []
    for source, target in mappings:
        if source not in gold:
            missing.append(source)
            continue
        gold_target, rating = gold[source]
        if target == NOT_AVAILABLE:
            ratings.append(Rating.NOT_AVAILABLE)
        elif target == gold_target:
            ratings.append(rating)
        else:
            ratings.append(Rating.UNRELATED)
    return ratings, missing


# --------------------------------------------------------------------------
# Synthetic bilingual graphs
# --------------------------------------------------------------------------

SOURCE_NS = "http://ko.example.org/"
TARGET_NS = "http://en.example.org/"

_HANGUL_BASE, _HANGUL_COUNT = 0xAC00, 11172
_CONSONANTS = "bcdfghjklmnprstvz"
_VOWELS = "aeiou"


class SynthFixture(NamedTuple):
    source: TripleStore
    target: TripleStore
    links: LinkTable
    gold: dict[str, tuple[str, Rating]]
    dictionary: dict[str, str]


def _unique(rng: random.Random, make, seen: set) -> str:
    while True:
        word = make(rng)
        if word not in seen:
            seen.add(word)
            return word


def _hangul(rng: random.Random) -> str:
    return "".join(chr(_HANGUL_BASE + rng.randrange(_HANGUL_COUNT)) for _ in range(rng.randint(2, 4)))


def _latin(rng: random.Random) -> str:
    return "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(rng.randint(2, 4)))


def synth_bilingual(seed: int, n_predicates: int, pairs_per_predicate: int,
                    link_coverage: float, confusable_fraction: float,
                    extra_ratio: float = 1.0) -> SynthFixture:
    """Generate a source/target graph pair with known predicate equivalences.

    Each source predicate gets ``pairs_per_predicate`` subject-object pairs that
    no other predicate uses. The target graph holds a gold-equivalent
    predicate over the images of those pairs plus target-only noise triples,
    and (when ``confusable_fraction > 0``) a confusable predicate sharing, on
    average, that fraction of the pairs, and four generic predicates shared by
    every predicate's pairs at half that rate. ``link_coverage`` of the source resources get a
    link, split between sameAs rows and the title chain. ``extra_ratio`` scales
    the number of target-only triples per predicate.
    """
    if n_predicates < 1 or pairs_per_predicate < 1:
        raise ValueError("n_predicates and pairs_per_predicate must be positive")
    if not (0.0 <= link_coverage <= 1.0 and 0.0 <= confusable_fraction <= 1.0):
        raise ValueError("link_coverage and confusable_fraction must lie in [0, 1]")

    rng = random.Random(seed)
    total_pairs = n_predicates * pairs_per_predicate
    n_entities = max(8, 2 * math.isqrt(total_pairs) + 2)

    hangul_seen: set = set()
    latin_seen: set = set()
    src_names = [_unique(rng, _hangul, hangul_seen) for _ in range(n_entities)]
    tgt_names = [
        _unique(rng, lambda r: f"{_latin(r).capitalize()}_{_latin(r).capitalize()}", latin_seen)
        for _ in range(n_entities)
    ]
    src_res = [IRI(f"{SOURCE_NS}resource/{name}") for name in src_names]
    tgt_res = [IRI(f"{TARGET_NS}resource/{name}") for name in tgt_names]
    image = dict(zip(src_res, tgt_res))

    used_pairs: set = set()
    next_literal = [1000]
    source_triples: list[Triple] = []
    target_triples: list[Triple] = []
    gold: dict[str, tuple[str, Rating]] = {}
    dictionary: dict[str, str] = {}
    noise_id = [0]

    def noise_triples(predicate: IRI, count: int):
        for _ in range(count):
            noise_id[0] += 1
            s = IRI(f"{TARGET_NS}resource/Extra_{noise_id[0]}")
            target_triples.append(Triple(s, predicate, IRI(f"{TARGET_NS}resource/Extra_{noise_id[0]}_o")))

    generic = [IRI(f"{TARGET_NS}property/{_unique(rng, _latin, latin_seen)}") for _ in range(4)]
    for _ in range(n_predicates):
        src_label = _unique(rng, _hangul, hangul_seen)
        tgt_label = _unique(rng, _latin, latin_seen)
        p_s = IRI(f"{SOURCE_NS}property/{src_label}")
        p_gold = IRI(f"{TARGET_NS}ontology/{tgt_label}")
        literal_objects = rng.random() < 0.1

        pairs = []
        while len(pairs) < pairs_per_predicate:
            a = rng.choice(src_res)
            if literal_objects:
                next_literal[0] += 1
                b = Literal(str(next_literal[0]), XSD + "integer")
            else:
                b = rng.choice(src_res)
                if a == b or (a, b) in used_pairs:
                    continue
            used_pairs.add((a, b))
            pairs.append((a, b))

        images = [(image[a], b if isinstance(b, Literal) else image[b]) for a, b in pairs]
        source_triples.extend(Triple(a, p_s, b) for a, b in pairs)
        target_triples.extend(Triple(a, p_gold, b) for a, b in images)
        noise_triples(p_gold, rng.randint(0, round(pairs_per_predicate * extra_ratio)))

        if confusable_fraction > 0:
            p_conf = IRI(f"{TARGET_NS}property/{_unique(rng, _latin, latin_seen)}")
            # per-predicate overlap varies around the requested fraction
            overlap = lambda: round(min(1.0, rng.uniform(0, 2 * confusable_fraction)) * len(images))
            target_triples.extend(Triple(a, p_conf, b) for a, b in rng.sample(images, overlap()))
            noise_triples(p_conf, rng.randint(0, round(3 * pairs_per_predicate * extra_ratio)))
            for g in generic:
                target_triples.extend(Triple(a, g, b) for a, b in rng.sample(images, overlap() // 2))

        gold[p_s.value] = (p_gold.value, Rating.EQUIVALENT)
        dictionary[src_label] = tgt_label

    order = list(range(n_entities))
    rng.shuffle(order)
    linked = set(order[: round(link_coverage * n_entities)])
    sameas, src_titles, inter, tgt_titles = [], [], [], []
    for i in range(n_entities):
        src_title, tgt_title = src_names[i], tgt_names[i].replace("_", " ")
        src_titles.append((src_title, src_res[i].value))
        tgt_titles.append((tgt_title, tgt_res[i].value))
        if i in linked:
            if rng.random() < 0.5:
                sameas.append((src_res[i].value, tgt_res[i].value))
            else:
                inter.append((src_title, tgt_title))

    return SynthFixture(
        source=TripleStore(source_triples, "ko"),
        target=TripleStore(target_triples, "en"),
        links=LinkTable.build(sameas, src_titles, inter, tgt_titles),
        gold=gold,
        dictionary=dictionary,
    )


def write_synth(fixture: SynthFixture, out_dir) -> list[Path]:
    """Write a fixture as N-Triples, link TSVs, gold.tsv and dictionary.tsv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "source.nt": fixture.source.serialize(),
        "target.nt": fixture.target.serialize(),
        **write_link_files(fixture.links),
        "gold.tsv": write_gold(fixture.gold),
        "dictionary.tsv": "".join(f"{k}\t{v}\n" for k, v in sorted(fixture.dictionary.items())),
    }
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)
    return written
