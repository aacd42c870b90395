"""Resolution of source-graph terms into the target graph.

A term is resolved through the first layer that succeeds:

1. datatyped (or numeric / ISO date looking) literals are kept as-is,
2. IRIs with an owl:sameAs entry follow it,
3. IRIs are turned into a title and chased through the title tables
   (source title -> inter-language title -> target IRI),
4. plain string literals are matched against source titles, then chased
   the same way.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional
from urllib.parse import unquote

from predmap.triple_store import IRI, Diagnostic, Literal, Term


class ConflictingLink(ValueError):
    def __init__(self, source: str, first: str, second: str):
        super().__init__(f"conflicting sameAs targets for {source}: {first} vs {second}")
        self.source = source
        self.targets = (first, second)


class EmptyLocalName(ValueError):
    pass


_NUMERIC_OR_DATE = re.compile(
    r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
    r"|-?\d{4,}-\d{2}-\d{2}(?:T\d{2}:\d{2}:\d{2}(?:\.\d+)?)?(?:Z|[+-]\d{2}:\d{2})?"
    r"|-?\d{4,}-\d{2}|\d{2}:\d{2}:\d{2}(?:\.\d+)?"
)


def normalize_title(text: str) -> str:
    """Lookup key for titles and labels.

    Percent-decodes, maps underscores to spaces, collapses whitespace, applies
    NFC and case-folds.
    """
    text = unquote(text).replace("_", " ")
    text = " ".join(text.split())
    return unicodedata.normalize("NFC", text).casefold()


def title_of(u: IRI | str) -> str:
    """Title derived from an IRI's final path segment (or fragment)."""
    value = u.value if isinstance(u, IRI) else u
    head, _, fragment = value.partition("#")
    segment = fragment or head.split("?", 1)[0].rsplit("/", 1)[-1]
    title = unquote(segment).replace("_", " ").strip()
    if not title:
        raise EmptyLocalName(f"no local name in {value!r}")
    return title


def is_identity_literal(term: Term) -> bool:
    return isinstance(term, Literal) and (
        term.datatype is not None or _NUMERIC_OR_DATE.fullmatch(term.lexical.strip()) is not None
    )


@dataclass(frozen=True)
class LinkTable:
    """Layered source -> target resource links.

    Title maps are keyed by ``normalize_title`` of the title; values keep the
    original casing.
    """

    sameas: Mapping[IRI, IRI] = field(default_factory=dict)
    source_titles: Mapping[str, IRI] = field(default_factory=dict)
    source_title_of: Mapping[IRI, str] = field(default_factory=dict)
    interlanguage_titles: Mapping[str, str] = field(default_factory=dict)
    target_titles: Mapping[str, IRI] = field(default_factory=dict)
    target_title_of: Mapping[IRI, str] = field(default_factory=dict)
    diagnostics: tuple = ()

    def __post_init__(self):
        for name in ("sameas", "source_titles", "source_title_of", "interlanguage_titles",
                     "target_titles", "target_title_of"):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))

    @classmethod
    def build(cls, sameas: Iterable[tuple[str, str]] = (), source_titles: Iterable[tuple[str, str]] = (),
              interlanguage: Iterable[tuple[str, str]] = (), target_titles: Iterable[tuple[str, str]] = (),
              diagnostics: Iterable[Diagnostic | tuple] = ()) -> "LinkTable":
        """Build from (key, value) rows as they appear in the TSV files."""
        diags = list(diagnostics)
        same: dict[IRI, IRI] = {}
        for src, tgt in sameas:
            s, t = IRI(src), IRI(tgt)
            if same.get(s, t) != t:
                raise ConflictingLink(src, same[s].value, tgt)
            same[s] = t
        src_titles, src_inv = _title_map(source_titles, diags, "source_titles")
        tgt_titles, tgt_inv = _title_map(target_titles, diags, "target_titles")
        inter: dict[str, str] = {}
        for a, b in interlanguage:
            inter.setdefault(normalize_title(a), b)
        return cls(same, src_titles, src_inv, inter, tgt_titles, tgt_inv, tuple(diags))


def _title_map(rows, diags, name):
    by_title: dict[str, IRI] = {}
    by_iri: dict[IRI, str] = {}
    for title, iri in rows:
        key = normalize_title(title)
        node = IRI(iri)
        if key in by_title and by_title[key] != node:
            diags.append(Diagnostic(0, f"{name}: title {title!r} already bound to {by_title[key]}"))
            continue
        by_title[key] = node
        by_iri.setdefault(node, title)
    return by_title, by_iri


def _read_tsv(text: str, name: str, diags: list) -> list[tuple[str, str]]:
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 2 or not cols[0].strip() or not cols[1].strip():
            diags.append(Diagnostic(lineno, f"{name}: expected 2 tab-separated columns"))
            continue
        rows.append((cols[0].strip(), cols[1].strip()))
    return rows


def _iri_rows(rows, columns, name, diags):
    ok = []
    for row in rows:
        try:
            for i in columns:
                IRI(row[i])
        except ValueError as exc:
            diags.append(Diagnostic(0, f"{name}: {exc}"))
            continue
        ok.append(row)
    return ok


def load_links(sameas: str, source_titles: str = "", interlanguage: str = "",
               target_titles: str = "") -> LinkTable:
    """Load a LinkTable from the four TSV documents (text, not paths).

    Malformed rows become diagnostics on the returned table. Raises
    ``ConflictingLink`` when one source IRI has two different sameAs targets.
    """
    diags: list[Diagnostic] = []
    same_rows = _iri_rows(_read_tsv(sameas, "sameas", diags), (0, 1), "sameas", diags)
    src_rows = _iri_rows(_read_tsv(source_titles, "source_titles", diags), (1,), "source_titles", diags)
    inter_rows = _read_tsv(interlanguage, "interlanguage", diags)
    tgt_rows = _iri_rows(_read_tsv(target_titles, "target_titles", diags), (1,), "target_titles", diags)
    return LinkTable.build(same_rows, src_rows, inter_rows, tgt_rows, diags)


def load_link_files(sameas, source_titles, interlanguage, target_titles) -> LinkTable:
    docs = []
    for path in (sameas, source_titles, interlanguage, target_titles):
        with open(path, encoding="utf-8") as fh:
            docs.append(fh.read())
    return load_links(*docs)


def write_link_files(links: LinkTable) -> dict[str, str]:
    """Serialize a LinkTable as the four TSV documents, keyed by file name."""
    original = {normalize_title(t): t for t in links.source_title_of.values()}
    inter_rows = [f"{original.get(k, k)}\t{t}\n" for k, t in links.interlanguage_titles.items()]
    return {
        "sameas.tsv": "".join(sorted(f"{s.value}\t{t.value}\n" for s, t in links.sameas.items())),
        "source_titles.tsv": "".join(sorted(f"{t}\t{i.value}\n" for i, t in links.source_title_of.items())),
        "interlanguage.tsv": "".join(sorted(inter_rows)),
        "target_titles.tsv": "".join(sorted(f"{t}\t{i.value}\n" for i, t in links.target_title_of.items())),
    }


# --------------------------------------------------------------------------
# Term mapping
# --------------------------------------------------------------------------

IDENTITY, SAMEAS, TITLE_CHAIN, LABEL_CHAIN, UNRESOLVED = (
    "identity", "sameas", "title_chain", "label_chain", "unresolved")


def _chase_title(title: str, links: LinkTable) -> Optional[IRI]:
    target_title = links.interlanguage_titles.get(normalize_title(title))
    if target_title is None:
        return None
    return links.target_titles.get(normalize_title(target_title))


def resolve_term(u: Term, links: LinkTable) -> tuple[Optional[Term], str]:
    """Like ``map_term`` but also reports which layer resolved the term."""
    if isinstance(u, Literal):
        if is_identity_literal(u):
            return u, IDENTITY
        key = normalize_title(u.lexical)
        if key and key in links.source_titles:
            hit = _chase_title(key, links)
            if hit is not None:
                return hit, LABEL_CHAIN
        return None, UNRESOLVED

    hit = links.sameas.get(u)
    if hit is not None:
        return hit, SAMEAS
    title = links.source_title_of.get(u)
    if title is None:
        try:
            title = title_of(u)
        except EmptyLocalName:
            return None, UNRESOLVED
        if normalize_title(title) not in links.source_titles:
            return None, UNRESOLVED
    hit = _chase_title(title, links)
    return (hit, TITLE_CHAIN) if hit is not None else (None, UNRESOLVED)


def map_term(u: Term, links: LinkTable) -> Optional[Term]:
    return resolve_term(u, links)[0]


@dataclass(frozen=True)
class PairSet:
    predicate: Optional[IRI]
    pairs: frozenset

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class PairMappingStats:
    kept: int
    dropped: int
    resolutions: Mapping[str, int]


def map_pair_set(src: PairSet, links: LinkTable) -> tuple[PairSet, PairMappingStats]:
    """Map every pair into the target graph; a pair survives only if both ends resolve."""
    tally: Counter = Counter()
    cache: dict = {}
    out = set()
    kept = dropped = 0
    for a, b in src.pairs:
        ends = []
        for term in (a, b):
            if term not in cache:
                cache[term] = resolve_term(term, links)
            mapped, how = cache[term]
            tally[how] += 1
            ends.append(mapped)
        if ends[0] is None or ends[1] is None:
            dropped += 1
            continue
        kept += 1
        out.add((ends[0], ends[1]))
    stats = PairMappingStats(kept, dropped, dict(sorted(tally.items())))
    return PairSet(src.predicate, frozenset(out)), stats
