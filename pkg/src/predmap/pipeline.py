"""Method orchestration: indirect links first, translation fallback on low confidence."""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from predmap.fallback import FallbackResult, LabelIndex, TranslationProvider, map_predicate_fallback
from predmap.indirect import IndirectResult, map_predicate_indirect
from predmap.interlink import LinkTable
from predmap.triple_store import IRI

OWL_EQUIVALENT_PROPERTY = "http://www.w3.org/2002/07/owl#equivalentProperty"
DEFAULT_THRESHOLD = 0.3


class Mode(enum.Enum):
    METHOD1_ONLY = "m1"
    METHOD2_ONLY = "m2"
    COMBINED = "combined"


class Method(enum.Enum):
    INDIRECT = "Indirect"
    FALLBACK = "Fallback"
    NONE = "None"


@dataclass(frozen=True)
class AlignConfig:
    threshold: float = DEFAULT_THRESHOLD
    mode: Mode = Mode.COMBINED
    source_lang: Optional[str] = None
    target_lang: Optional[str] = None
    parallelism: int = 1

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.threshold}")
        if self.parallelism < 1:
            raise ValueError("parallelism must be a positive integer")
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class MappingResult:
    source: IRI
    target: Optional[IRI]
    method: Method
    indirect: Optional[IndirectResult] = field(default=None, compare=False)
    fallback: Optional[FallbackResult] = field(default=None, compare=False)


@dataclass(frozen=True)
class Aligner:
    """The shared, read-only inputs of an alignment run."""

    source: object
    links: LinkTable
    target: object
    provider: Optional[TranslationProvider] = None
    labels: Optional[LabelIndex] = None

    def align_one(self, p_s: IRI, cfg: AlignConfig) -> MappingResult:
        return align_one(p_s, self.source, self.links, self.provider, self.labels, self.target, cfg)

    def align_all(self, predicates: Sequence[IRI], cfg: AlignConfig) -> list[MappingResult]:
        return align_all(predicates, self.source, self.links, self.provider, self.labels, self.target, cfg)


def _fallback(p_s, source, provider, labels, target) -> Optional[FallbackResult]:
    if provider is None or labels is None:
        return None
    return map_predicate_fallback(p_s, source, provider, labels, target)


def align_one(p_s: IRI, source, links: LinkTable, provider: Optional[TranslationProvider],
              labels: Optional[LabelIndex], target, cfg: AlignConfig) -> MappingResult:
    """Map one source predicate.

    In combined mode the indirect result is kept only when its confidence is
    strictly above the threshold; otherwise the fallback runs. Without a
    provider the fallback simply yields nothing.
    """
    indirect = None
    if cfg.mode is not Mode.METHOD2_ONLY:
        indirect = map_predicate_indirect(p_s, source, links, target)
        if indirect.best is not None and (
            cfg.mode is Mode.METHOD1_ONLY or indirect.confidence > cfg.threshold
        ):
            return MappingResult(p_s, indirect.best, Method.INDIRECT, indirect)
        if cfg.mode is Mode.METHOD1_ONLY:
            return MappingResult(p_s, None, Method.NONE, indirect)

    fallback = _fallback(p_s, source, provider, labels, target)
    if fallback is not None and fallback.predicate is not None:
        return MappingResult(p_s, fallback.predicate, Method.FALLBACK, indirect, fallback)
    return MappingResult(p_s, None, Method.NONE, indirect, fallback)


def align_all(predicates: Sequence[IRI], source, links: LinkTable, provider, labels, target,
              cfg: AlignConfig) -> list[MappingResult]:
    """``align_one`` over every predicate; results keep the input order."""
    if cfg.parallelism == 1 or len(predicates) < 2:
        return [align_one(p, source, links, provider, labels, target, cfg) for p in predicates]
    with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
        return list(pool.map(
            lambda p: align_one(p, source, links, provider, labels, target, cfg), predicates))


def write_mappings(results: Sequence[MappingResult], fmt: str = "tsv") -> str:
    """Render results as ``p_S \\t p_T \\t method`` rows or owl:equivalentProperty triples."""
    fmt = fmt.lower()
    if fmt == "tsv":
        return "".join(
            f"{r.source.value}\t{r.target.value if r.target is not None else 'N/A'}\t{r.method.value}\n"
            for r in results
        )
    if fmt in ("nt", "ntriples"):
        return "".join(
            f"<{r.source.value}> <{OWL_EQUIVALENT_PROPERTY}> <{r.target.value}> .\n"
            for r in results if r.target is not None
        )
    raise ValueError(f"unknown mapping format {fmt!r}")


def read_mappings(text: str) -> list[tuple[str, str, str]]:
    """Parse the TSV form written by ``write_mappings``."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ValueError(f"mappings line {lineno}: expected 3 tab-separated columns")
        rows.append((cols[0], cols[1], cols[2]))
    return rows
