"""N-Triples ingestion and an immutable, indexed in-memory triple store."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, NamedTuple, Optional, Union

XSD = "http://www.w3.org/2001/XMLSchema#"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"


@dataclass(frozen=True, slots=True)
class IRI:
    value: str

    def __post_init__(self):
        if not is_valid_iri(self.value):
            raise ValueError(f"not an absolute IRI: {self.value!r}")

    def __str__(self):
        return self.value


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: Optional[str] = None
    lang: Optional[str] = None

    def __post_init__(self):
        if self.datatype is not None and self.lang is not None:
            raise ValueError("a literal cannot carry both a datatype and a language tag")

    def __str__(self):
        return self.lexical


Term = Union[IRI, Literal]


class Triple(NamedTuple):
    subject: IRI
    predicate: IRI
    object: Term


class Diagnostic(NamedTuple):
    line: int
    reason: str


def is_valid_iri(value: str) -> bool:
    if not value or any(c in value for c in ' <>"{}|\\^`\n\r\t'):
        return False
    if value[:4].lower() == "urn:":
        return len(value.split(":", 2)) == 3 and all(value.split(":", 2))
    scheme, sep, rest = value.partition("://")
    return bool(sep and rest and re.fullmatch(r"[A-Za-z][A-Za-z0-9+.\-]*", scheme))


def term_key(term: Term) -> tuple:
    """Total order over terms: IRIs before literals, then lexically."""
    if isinstance(term, IRI):
        return (0, term.value, "", "")
    return (1, term.lexical, term.datatype or "", term.lang or "")


def pair_key(pair: tuple[Term, Term]) -> tuple:
    return term_key(pair[0]) + term_key(pair[1])


# --------------------------------------------------------------------------
# N-Triples parsing / serialization
# --------------------------------------------------------------------------

_IRI = r"<([^<>\"{}|^`\\\x00-\x20]*)>"
_LITERAL = r'"((?:[^"\\\n\r]|\\.)*)"(?:\^\^' + _IRI + r"|@([A-Za-z]+(?:-[A-Za-z0-9]+)*))?"
_BNODE = r"_:[A-Za-z0-9_][A-Za-z0-9_.\-]*"
_LINE = re.compile(
    r"\s*(?:" + _IRI + "|(" + _BNODE + r"))"
    r"\s*" + _IRI
    + r"\s*(?:" + _IRI + "|(" + _BNODE + ")|" + _LITERAL + r")"
    r"\s*\.\s*(?:#.*)?$"
)
_ESCAPE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))", re.DOTALL)
_SIMPLE_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(text: str) -> str:
    if "\\" not in text:
        return text

    def sub(m):
        if m.group(1) or m.group(2):
            return chr(int(m.group(1) or m.group(2), 16))
        ch = m.group(3)
        if ch not in _SIMPLE_ESCAPES:
            raise ValueError(f"invalid escape \\{ch}")
        return _SIMPLE_ESCAPES[ch]

    return _ESCAPE.sub(sub, text)


def parse_ntriples(text: str) -> tuple[list[Triple], list[Diagnostic]]:
    """Parse an N-Triples document.

    Blank-node statements and malformed lines are skipped, each producing a
    ``Diagnostic`` with its 1-based line number. Empty lines and comments are
    ignored silently.
    """
    triples: list[Triple] = []
    diagnostics: list[Diagnostic] = []
    # str.splitlines would also break on \x1c-\x1e, \x85, \u2028 inside literals
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _LINE.match(line)
        if m is None:
            diagnostics.append(Diagnostic(lineno, "malformed statement"))
            continue
        s_iri, s_bnode, p_iri, o_iri, o_bnode, lex, dtype, lang = m.groups()
        if s_bnode or o_bnode:
            diagnostics.append(Diagnostic(lineno, "blank node statement skipped"))
            continue
        try:
            subject = IRI(_unescape(s_iri))
            predicate = IRI(_unescape(p_iri))
            if o_iri is not None:
                obj: Term = IRI(_unescape(o_iri))
            else:
                obj = Literal(
                    _unescape(lex),
                    _unescape(dtype) if dtype is not None else None,
                    lang.lower() if lang else None,
                )
        except ValueError as exc:
            diagnostics.append(Diagnostic(lineno, str(exc)))
            continue
        triples.append(Triple(subject, predicate, obj))
    return triples, diagnostics


_NEEDS_ESCAPE = re.compile(r'[\\"\x00-\x1f\x7f\x85\u2028\u2029]')
_ESCAPE_OUT = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_literal(text: str) -> str:
    return _NEEDS_ESCAPE.sub(lambda m: _ESCAPE_OUT.get(m.group(), f"\\u{ord(m.group()):04X}"), text)


def format_term(term: Term) -> str:
    if isinstance(term, IRI):
        return f"<{term.value}>"
    out = f'"{_escape_literal(term.lexical)}"'
    if term.datatype is not None:
        out += f"^^<{term.datatype}>"
    elif term.lang is not None:
        out += f"@{term.lang}"
    return out


def serialize_ntriples(triples: Iterable[Triple]) -> str:
    """Serialize triples one per line, sorted so output is byte-stable."""
    ordered = sorted(triples, key=lambda t: (t.subject.value, t.predicate.value) + term_key(t.object))
    return "".join(f"{format_term(s)} {format_term(p)} {format_term(o)} .\n" for s, p, o in ordered)


# --------------------------------------------------------------------------
# Store
# --------------------------------------------------------------------------


class TripleStore:
    """Immutable indexed triple set.

    Three projections of the same triple set are kept: predicate -> pairs,
    (subject, object) -> predicates, and predicate -> triple count. All query
    methods are read-only, so a built store may be shared between threads.
    """

    __slots__ = ("label", "_triples", "_by_predicate", "_by_pair", "_counts", "_labels")

    def __init__(self, triples: Iterable[Triple] = (), label: Optional[str] = None):
        unique = frozenset(triples)
        by_predicate: dict[IRI, set] = defaultdict(set)
        by_pair: dict[tuple, set] = defaultdict(set)
        for s, p, o in unique:
            by_predicate[p].add((s, o))
            by_pair[(s, o)].add(p)
        self.label = label
        self._triples = unique
        self._by_predicate = MappingProxyType({p: frozenset(v) for p, v in by_predicate.items()})
        self._by_pair = MappingProxyType({k: frozenset(v) for k, v in by_pair.items()})
        self._counts = MappingProxyType({p: len(v) for p, v in self._by_predicate.items()})
        labels: dict[Term, set] = defaultdict(set)
        for s, o in self._by_predicate.get(IRI(RDFS_LABEL), ()):
            labels[s].add(o)
        self._labels = MappingProxyType({s: frozenset(v) for s, v in labels.items()})

    def __len__(self):
        return len(self._triples)

    def __iter__(self):
        return iter(self._triples)

    def __contains__(self, triple):
        return triple in self._triples

    def __repr__(self):
        return f"TripleStore(label={self.label!r}, triples={len(self)}, predicates={len(self._counts)})"

    @property
    def triples(self) -> frozenset:
        return self._triples

    def predicates(self) -> frozenset:
        return frozenset(self._counts)

    def pairs_for_predicate(self, p: IRI) -> frozenset:
        """Distinct (subject, object) pairs linked by ``p``; empty if absent."""
        return self._by_predicate.get(p, frozenset())

    def predicates_linking(self, a: Term, b: Term) -> frozenset:
        """All predicates ``p`` such that ``(a, p, b)`` is in the store."""
        return self._by_pair.get((a, b), frozenset())

    def predicate_count(self, p: IRI) -> int:
        return self._counts.get(p, 0)

    def predicates_by_frequency(self, k: Optional[int] = None) -> list[tuple[IRI, int]]:
        """Top-``k`` predicates by descending triple count, ties by ascending IRI.

        ``k=None`` returns every predicate.
        """
        if k is not None and k < 1:
            raise ValueError("k must be a positive integer")
        ranked = sorted(self._counts.items(), key=lambda item: (-item[1], item[0].value))
        return ranked if k is None else ranked[:k]

    def labels_of(self, subject: IRI) -> frozenset:
        """Objects of ``rdfs:label`` triples about ``subject``."""
        return self._labels.get(subject, frozenset())

    def serialize(self) -> str:
        return serialize_ntriples(self._triples)


def build_store(triples: Iterable[Triple], label: Optional[str] = None) -> TripleStore:
    return TripleStore(triples, label)


def load_store(path, label: Optional[str] = None) -> tuple[TripleStore, list[Diagnostic]]:
    with open(path, encoding="utf-8") as fh:
        triples, diagnostics = parse_ntriples(fh.read())
    return TripleStore(triples, label), diagnostics
