"""Translation + edit-distance fallback matcher."""

from __future__ import annotations

import math
import unicodedata
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Mapping, Optional

from predmap.interlink import EmptyLocalName, title_of
from predmap.triple_store import IRI, Literal, TripleStore


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit insert/delete/substitute costs."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def normalize_label(text: str) -> str:
    return unicodedata.normalize("NFC", " ".join(text.split())).casefold()


class TranslationProvider(ABC):
    @abstractmethod
    def lookup(self, text: str) -> Optional[str]:
        """Translation of ``text`` into the target language, or None."""


class DictionaryProvider(TranslationProvider):
    """Offline provider backed by a ``source \\t target`` dictionary."""

    def __init__(self, entries: Mapping[str, str] | None = None):
        self._entries: dict[str, str] = {}
        for src, tgt in (entries or {}).items():
            self._entries.setdefault(normalize_label(src), tgt)

    @classmethod
    def from_tsv(cls, text: str) -> "DictionaryProvider":
        entries = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ValueError(f"dictionary line {lineno}: expected 2 tab-separated columns")
            entries.setdefault(cols[0].strip(), cols[1].strip())
        return cls(entries)

    @classmethod
    def from_file(cls, path) -> "DictionaryProvider":
        with open(path, encoding="utf-8") as fh:
            return cls.from_tsv(fh.read())

    def lookup(self, text: str) -> Optional[str]:
        return self._entries.get(normalize_label(text))

    def __len__(self):
        return len(self._entries)


class HttpTranslationProvider(TranslationProvider):
    """Extension point for an online translation service. Not wired up."""

    def __init__(self, endpoint: str, source_lang: str, target_lang: str):
        self.endpoint = endpoint
        self.source_lang = source_lang
        self.target_lang = target_lang

    def lookup(self, text: str) -> Optional[str]:
        raise NotImplementedError("online translation is not available; use DictionaryProvider")


def predicate_label(store, p: IRI) -> str:
    """rdfs:label of ``p`` in ``store`` if it has one, else its IRI local name.

    Several labels are resolved deterministically (smallest lexical form).
    """
    labels = sorted(o.lexical for o in store.labels_of(p) if isinstance(o, Literal))
    if labels:
        return labels[0]
    try:
        return title_of(p)
    except EmptyLocalName:
        return p.value


class LabelIndex:
    """Target predicate labels, normalized and bucketed by length for pruning."""

    def __init__(self, labels: Mapping[IRI, str], counts: Mapping[IRI, int] | None = None):
        self.labels = dict(labels)
        self.counts = dict(counts or {})
        by_text: dict[str, list[IRI]] = {}
        for p, label in self.labels.items():
            by_text.setdefault(normalize_label(label), []).append(p)
        self._by_text = by_text
        self._by_length: dict[int, list[str]] = {}
        for text in sorted(by_text):
            self._by_length.setdefault(len(text), []).append(text)
        self._cache: dict[str, tuple] = {}

    @classmethod
    def from_store(cls, store) -> "LabelIndex":
        labels = {p: predicate_label(store, p) for p in store.predicates()}
        return cls(labels, {p: store.predicate_count(p) for p in labels})

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def closest_texts(self, query: str) -> tuple[int, list[str]]:
        """Minimum distance to ``query`` and every normalized label attaining it."""
        if query in self._cache:
            return self._cache[query]
        best = math.inf
        hits: list[str] = []
        # |len(a) - len(b)| is a lower bound on the distance
        for length in sorted(self._by_length, key=lambda n: (abs(n - len(query)), n)):
            if abs(length - len(query)) > best:
                break
            for text in self._by_length[length]:
                d = edit_distance(query, text)
                if d < best:
                    best, hits = d, [text]
                elif d == best:
                    hits.append(text)
        result = (int(best) if hits else -1, hits)
        self._cache[query] = result
        return result

    def predicates_for(self, text: str) -> list[IRI]:
        return self._by_text.get(text, [])


@dataclass(frozen=True)
class FallbackResult:
    predicate: Optional[IRI]
    source_label: str
    translation: Optional[str] = None
    distance: Optional[int] = None
    ties: int = 0
    reason: str = ""


def map_predicate_fallback(p_s: IRI, source, provider: TranslationProvider, labels: LabelIndex,
                           target=None) -> FallbackResult:
    """Closest target predicate to the translated label of ``p_s``.

    Ties on distance go to the most frequent target predicate (``log(n)`` is
    monotone, so comparing counts is equivalent), then to the smallest IRI.
    ``target`` supplies counts when the index was built without them.
    """
    label = predicate_label(source, p_s)
    translation = provider.lookup(label)
    if translation is None:
        return FallbackResult(None, label, reason="no translation")
    if not len(labels):
        return FallbackResult(None, label, translation, reason="no target labels")
    distance, texts = labels.closest_texts(normalize_label(translation))
    tied = [p for text in texts for p in labels.predicates_for(text)]

    def count(p):
        n = labels.counts.get(p)
        return n if n is not None or target is None else target.predicate_count(p)

    best = min(tied, key=lambda p: (-(count(p) or 0), p.value))
    return FallbackResult(best, label, translation, distance, len(tied))


def build_label_index(store: TripleStore) -> LabelIndex:
    return LabelIndex.from_store(store)
