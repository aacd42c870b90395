"""Remote ingestion over the SPARQL 1.1 protocol (HTTP GET, JSON results)."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Iterator, Optional

import requests

from predmap.triple_store import IRI, RDFS_LABEL, Literal, Term, format_term

log = logging.getLogger(__name__)

TIMEOUT_ENV = "PREDMAP_SPARQL_TIMEOUT"
RESULTS_JSON = "application/sparql-results+json"


class SparqlError(Exception):
    pass


class TransportError(SparqlError):
    """The endpoint could not be reached (or kept failing) after all retries."""


class ProtocolError(SparqlError):
    """The endpoint answered with something that is not SPARQL JSON results."""


class EndpointError(SparqlError):
    def __init__(self, status: int, body: str = ""):
        super().__init__(f"endpoint returned HTTP {status}: {body[:200]}")
        self.status = status


def default_timeout() -> float:
    return float(os.environ.get(TIMEOUT_ENV, "30"))


@dataclass(frozen=True)
class EndpointConfig:
    url: str
    page_size: int = 10000
    max_retries: int = 3
    timeout: float = None  # type: ignore[assignment]
    backoff: float = 0.5

    def __post_init__(self):
        if self.page_size < 1:
            raise ValueError("page_size must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.timeout is None:
            object.__setattr__(self, "timeout", default_timeout())


def parse_binding(value: dict) -> Term:
    kind = value.get("type")
    if kind == "uri":
        return IRI(value["value"])
    if kind in ("literal", "typed-literal"):
        return Literal(value["value"], value.get("datatype"), value.get("xml:lang"))
    raise ProtocolError(f"unsupported binding type {kind!r}")


def parse_results(payload: dict) -> list[dict[str, Term]]:
    try:
        variables = payload["head"]["vars"]
        bindings = payload["results"]["bindings"]
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"not a SPARQL JSON result: missing {exc}") from None
    rows = []
    for binding in bindings:
        rows.append({v: parse_binding(binding[v]) for v in variables if v in binding})
    return rows


def run_query(cfg: EndpointConfig, query: str, session: Optional[requests.Session] = None) -> list[dict]:
    """Issue one SELECT query, retrying transport failures and 5xx responses."""
    http = session or requests
    attempts = cfg.max_retries + 1
    last = None
    for attempt in range(attempts):
        if attempt:
            time.sleep(cfg.backoff * 2 ** (attempt - 1))
        try:
            resp = http.get(cfg.url, params={"query": query},
                            headers={"Accept": RESULTS_JSON}, timeout=cfg.timeout)
        except requests.RequestException as exc:
            last = f"{type(exc).__name__}: {exc}"
            log.warning("SPARQL request failed (attempt %d/%d): %s", attempt + 1, attempts, last)
            continue
        if resp.status_code >= 500 or resp.status_code == 429:
            last = f"HTTP {resp.status_code}"
            log.warning("SPARQL endpoint busy (attempt %d/%d): %s", attempt + 1, attempts, last)
            continue
        if resp.status_code != 200:
            raise EndpointError(resp.status_code, resp.text)
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"malformed JSON: {exc}") from None
        return parse_results(payload)
    raise TransportError(f"{cfg.url}: giving up after {attempts} attempts ({last})")


def paginate(cfg: EndpointConfig, query: str, session=None) -> Iterator[dict]:
    """Yield rows of an ordered query page by page until a short page."""
    offset = 0
    while True:
        rows = run_query(cfg, f"{query}\nLIMIT {cfg.page_size}\nOFFSET {offset}", session)
        yield from rows
        if len(rows) < cfg.page_size:
            return
        offset += cfg.page_size


def pairs_query(p: IRI) -> str:
    return f"SELECT DISTINCT ?a ?b WHERE {{ ?a {format_term(p)} ?b . }}\nORDER BY ?a ?b"


def linking_query(a: Term, b: Term) -> str:
    return f"SELECT DISTINCT ?p WHERE {{ {format_term(a)} ?p {format_term(b)} . }}\nORDER BY ?p"


def fetch_pairs(cfg: EndpointConfig, p: IRI, session=None) -> frozenset:
    return frozenset((row["a"], row["b"]) for row in paginate(cfg, pairs_query(p), session))


def fetch_linking_predicates(cfg: EndpointConfig, a: Term, b: Term, session=None) -> frozenset:
    if isinstance(a, Literal):
        return frozenset()  # literal subjects are not valid SPARQL triple patterns here
    return frozenset(row["p"] for row in paginate(cfg, linking_query(a, b), session))


class RemoteStore:
    """Store-shaped view of an endpoint, usable wherever a TripleStore is read.

    Counts and labels are cached because the alignment loop asks for the same
    predicate many times.
    """

    def __init__(self, cfg: EndpointConfig, label: Optional[str] = None):
        self.cfg = cfg
        self.label = label
        self._session = requests.Session()
        self._counts: dict[IRI, int] = {}

    def pairs_for_predicate(self, p: IRI) -> frozenset:
        return fetch_pairs(self.cfg, p, self._session)

    def predicates_linking(self, a: Term, b: Term) -> frozenset:
        return fetch_linking_predicates(self.cfg, a, b, self._session)

    def predicate_count(self, p: IRI) -> int:
        if p not in self._counts:
            rows = run_query(self.cfg, f"SELECT (COUNT(*) AS ?n) WHERE {{ ?s {format_term(p)} ?o . }}",
                             self._session)
            self._counts[p] = int(rows[0]["n"].lexical) if rows and "n" in rows[0] else 0
        return self._counts[p]

    def predicates_by_frequency(self, k: Optional[int] = None) -> list[tuple[IRI, int]]:
        if k is not None and k < 1:
            raise ValueError("k must be a positive integer")
        query = ("SELECT ?p (COUNT(*) AS ?n) WHERE { ?s ?p ?o . }\nGROUP BY ?p\nORDER BY DESC(?n) ?p")
        rows = list(paginate(self.cfg, query, self._session))
        ranked = sorted(((r["p"], int(r["n"].lexical)) for r in rows), key=lambda x: (-x[1], x[0].value))
        self._counts.update(ranked)
        return ranked if k is None else ranked[:k]

    def predicates(self) -> frozenset:
        return frozenset(p for p, _ in self.predicates_by_frequency())

    def labels_of(self, subject: IRI) -> frozenset:
        query = f"SELECT DISTINCT ?l WHERE {{ {format_term(subject)} <{RDFS_LABEL}> ?l . }}\nORDER BY ?l"
        return frozenset(row["l"] for row in paginate(self.cfg, query, self._session))
