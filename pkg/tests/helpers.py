"""Independent oracles and fixtures shared by the test modules.

Nothing here calls into the index structures or scoring code under test;
the oracles scan raw triple lists.
"""

from __future__ import annotations

import json
import math
import random
import re
import threading
from functools import lru_cache
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from predmap.interlink import LinkTable
from predmap.triple_store import IRI, XSD, Literal, Triple, TripleStore, term_key

# filled by the acceptance module, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

KO = "http://ko.dbpedia.org/resource/"
KOP = "http://ko.dbpedia.org/property/"
EN = "http://dbpedia.org/resource/"
ENO = "http://dbpedia.org/ontology/"


# --------------------------------------------------------------------------
# brute-force oracles
# --------------------------------------------------------------------------

def naive_pairs(triples, p):
    out = set()
    for s, q, o in triples:
        if q == p:
            out.add((s, o))
    return out


def naive_linking(triples, a, b):
    return {q for s, q, o in triples if s == a and o == b}


def naive_count(triples, p):
    return len({t for t in triples if t.predicate == p})


def naive_candidates(t_pairs, triples, log=math.log):
    """Double loop over mapped pairs x target triples."""
    unique = set(triples)
    coverage = {}
    for a, b in t_pairs:
        linked = set()
        for s, q, o in unique:
            if s == a and o == b:
                linked.add(q)
        for q in linked:
            coverage[q] = coverage.get(q, 0) + 1
    out = {}
    for q, c in coverage.items():
        n = sum(1 for t in unique if t.predicate == q)
        out[q] = (c, n, c * log(n))
    return out


def dp_edit_distance(a: str, b: str) -> int:
    """Top-down memoized recursion; deliberately unlike the iterative version."""

    @lru_cache(maxsize=None)
    def d(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        return min(d(i - 1, j) + 1, d(i, j - 1) + 1, d(i - 1, j - 1) + (a[i - 1] != b[j - 1]))

    return d(len(a), len(b))


def random_triples(rng: random.Random, n: int, n_nodes=12, n_preds=6, literal_rate=0.2):
    nodes = [IRI(f"http://ex.org/n{i}") for i in range(n_nodes)]
    preds = [IRI(f"http://ex.org/p{i}") for i in range(n_preds)]
    out = []
    for _ in range(n):
        s = rng.choice(nodes)
        if rng.random() < literal_rate:
            o = Literal(str(rng.randrange(5)), XSD + "integer")
        else:
            o = rng.choice(nodes)
        out.append(Triple(s, rng.choice(preds), o))
    return out


# --------------------------------------------------------------------------
# hand-built "genre" fixture
# --------------------------------------------------------------------------

def genre_fixture():
    """Source/target stores and links around one source predicate ``장르``.

    Target: t:genre links the three mapped pairs and has 10 triples, t:style
    links one mapped pair and has 2, t:name adds 2 unrelated triples (14 total).
    """
    s_genre = IRI(KOP + "장르")
    sA, sB, sC = IRI(KO + "가"), IRI(KO + "나"), IRI(KO + "다")
    sRock, sJazz = IRI(KO + "록"), IRI(KO + "재즈")
    source = TripleStore([
        Triple(sA, s_genre, sRock),
        Triple(sB, s_genre, sRock),
        Triple(sC, s_genre, sJazz),
        Triple(sA, IRI(KOP + "이름"), Literal("가", lang="ko")),
    ], "ko")

    tA, tB, tC = IRI(EN + "A"), IRI(EN + "B"), IRI(EN + "C")
    tRock, tJazz = IRI(EN + "Rock_music"), IRI(EN + "Jazz")
    genre, style, name = IRI(ENO + "genre"), IRI(ENO + "style"), IRI(ENO + "name")
    target_triples = [Triple(tA, genre, tRock), Triple(tB, genre, tRock), Triple(tC, genre, tJazz)]
    target_triples += [Triple(IRI(EN + f"X{i}"), genre, tRock) for i in range(7)]
    target_triples += [Triple(tA, style, tRock), Triple(IRI(EN + "Y"), style, tJazz)]
    target_triples += [Triple(tA, name, Literal("A")), Triple(tB, name, Literal("B"))]
    target = TripleStore(target_triples, "en")

    links = LinkTable.build(
        sameas=[(sA.value, tA.value), (sB.value, tB.value), (sC.value, tC.value), (sRock.value, tRock.value)],
        source_titles=[("재즈", sJazz.value)],
        interlanguage=[("재즈", "Jazz")],
        target_titles=[("Jazz", tJazz.value)],
    )
    return {
        "source": source, "target": target, "links": links, "p": s_genre,
        "genre": genre, "style": style, "name": name,
        "t_pairs": {(tA, tRock), (tB, tRock), (tC, tJazz)},
    }


# --------------------------------------------------------------------------
# stub SPARQL endpoint
# --------------------------------------------------------------------------

_TERM = r'(<[^>]*>|"(?:[^"\\]|\\.)*"(?:\^\^<[^>]*>|@[A-Za-z\-]+)?)'
_PAIRS = re.compile(r"SELECT DISTINCT \?a \?b WHERE \{ \?a " + _TERM + r" \?b \. \}")
_LINKING = re.compile(r"SELECT DISTINCT \?p WHERE \{ " + _TERM + r" \?p " + _TERM + r" \. \}")
_COUNT = re.compile(r"SELECT \(COUNT\(\*\) AS \?n\) WHERE \{ \?s " + _TERM + r" \?o \. \}")
_FREQ = re.compile(r"SELECT \?p \(COUNT\(\*\) AS \?n\) WHERE \{ \?s \?p \?o \. \}")
_LABEL = re.compile(r"SELECT DISTINCT \?l WHERE \{ " + _TERM + r" <[^>]*label> \?l \. \}")
_LIMIT = re.compile(r"LIMIT (\d+)\s+OFFSET (\d+)")


def _parse_term(text):
    from predmap.triple_store import parse_ntriples

    triples, _ = parse_ntriples(f"<http://stub/s> <http://stub/p> {text} .")
    return triples[0].object


def _binding(term):
    if isinstance(term, IRI):
        return {"type": "uri", "value": term.value}
    out = {"type": "literal", "value": term.lexical}
    if term.datatype:
        out["datatype"] = term.datatype
    if term.lang:
        out["xml:lang"] = term.lang
    return out


class StubEndpoint:
    """A tiny SPARQL endpoint answering exactly the query shapes predmap emits.

    ``failures`` is a list of HTTP status codes returned (in order) before
    normal service resumes. Every request's decoded query is kept in ``log``.
    """

    def __init__(self, triples, failures=()):
        self.triples = sorted(set(triples), key=lambda t: (t.subject.value, t.predicate.value) + term_key(t.object))
        self.failures = list(failures)
        self.log: list[str] = []
        self.raw_body: str | None = None
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_GET(self):
                query = parse_qs(urlparse(self.path).query).get("query", [""])[0]
                stub.log.append(query)
                if stub.failures:
                    self.send_response(stub.failures.pop(0))
                    self.send_header("Content-Length", "0")
                    self.end_headers()
                    return
                if stub.raw_body is not None:
                    body = stub.raw_body.encode()
                else:
                    body = json.dumps(stub.answer(query)).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/sparql-results+json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_address[1]}/sparql"
        self._thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()

    def answer(self, query):
        rows: list[dict]
        if m := _PAIRS.search(query):
            p = _parse_term(m.group(1))
            pairs = sorted({(s, o) for s, q, o in self.triples if q == p},
                           key=lambda x: term_key(x[0]) + term_key(x[1]))
            variables, rows = ["a", "b"], [{"a": _binding(a), "b": _binding(b)} for a, b in pairs]
        elif m := _LINKING.search(query):
            a, b = _parse_term(m.group(1)), _parse_term(m.group(2))
            preds = sorted({q for s, q, o in self.triples if s == a and o == b}, key=lambda q: q.value)
            variables, rows = ["p"], [{"p": _binding(q)} for q in preds]
        elif m := _COUNT.search(query):
            p = _parse_term(m.group(1))
            n = sum(1 for t in self.triples if t.predicate == p)
            variables = ["n"]
            rows = [{"n": {"type": "literal", "value": str(n), "datatype": XSD + "integer"}}]
        elif _FREQ.search(query):
            counts = {}
            for t in self.triples:
                counts[t.predicate] = counts.get(t.predicate, 0) + 1
            ranked = sorted(counts.items(), key=lambda x: (-x[1], x[0].value))
            variables = ["p", "n"]
            rows = [{"p": _binding(p), "n": {"type": "literal", "value": str(n), "datatype": XSD + "integer"}}
                    for p, n in ranked]
        elif m := _LABEL.search(query):
            s = _parse_term(m.group(1))
            labels = sorted({o for t_s, q, o in self.triples if t_s == s and q.value.endswith("label")},
                            key=term_key)
            variables, rows = ["l"], [{"l": _binding(o)} for o in labels]
        else:
            raise AssertionError(f"stub cannot answer: {query}")
        if lim := _LIMIT.search(query):
            limit, offset = int(lim.group(1)), int(lim.group(2))
            rows = rows[offset:offset + limit]
        return {"head": {"vars": variables}, "results": {"bindings": rows}}
