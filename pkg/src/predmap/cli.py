"""Command-line entry point: ``predmap {align,eval,stats,synth}``.

Exit codes: 0 success, 1 usage error, 2 data or processing error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from predmap.evaluation import (
    GoldFormatError, cohens_kappa, evaluate, load_gold, rate_mappings, synth_bilingual, write_synth,
)
from predmap.fallback import DictionaryProvider, LabelIndex
from predmap.interlink import ConflictingLink, load_link_files
from predmap.pipeline import DEFAULT_THRESHOLD, AlignConfig, Method, Mode, align_all, read_mappings, write_mappings
from predmap.sparql_client import EndpointConfig, RemoteStore, SparqlError
from predmap.triple_store import IRI, load_store

log = logging.getLogger("predmap")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _open_store(location: str, label: str):
    if location.startswith(("http://", "https://")):
        return RemoteStore(EndpointConfig(location), label)
    try:
        store, diagnostics = load_store(location, label)
    except OSError as exc:
        raise DataError(f"cannot read {location}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise DataError(f"{location} is not UTF-8: {exc}") from None
    for d in diagnostics[:20]:
        log.warning("%s:%d: %s", location, d.line, d.reason)
    if len(diagnostics) > 20:
        log.warning("%s: %d more skipped lines", location, len(diagnostics) - 20)
    return store


def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from None


def cmd_align(args) -> int:
    mode = {"combined": Mode.COMBINED, "m1": Mode.METHOD1_ONLY, "m2": Mode.METHOD2_ONLY}[args.mode]
    if mode is Mode.METHOD2_ONLY and not args.dict:
        raise UsageError("--mode m2 needs --dict")
    if not 0.0 <= args.threshold <= 1.0:
        raise UsageError("--threshold must lie in [0, 1]")
    if args.top_k is not None and args.top_k < 1:
        raise UsageError("--top-k must be positive")
    jobs = args.jobs or os.cpu_count() or 1
    if jobs < 1:
        raise UsageError("--jobs must be positive")

    source = _open_store(args.source, args.source_lang)
    target = _open_store(args.target, args.target_lang)
    try:
        links = load_link_files(args.sameas, args.titles_src, args.titles_inter, args.titles_tgt)
    except OSError as exc:
        raise DataError(f"cannot read link tables: {exc}") from None
    except ConflictingLink as exc:
        raise DataError(str(exc)) from None
    for d in links.diagnostics[:20]:
        log.warning("links:%d: %s", d.line, d.reason)

    provider = labels = None
    if args.dict and mode is not Mode.METHOD1_ONLY:
        try:
            provider = DictionaryProvider.from_tsv(_read(args.dict))
        except ValueError as exc:
            raise DataError(f"{args.dict}: {exc}") from None
        labels = LabelIndex.from_store(target)

    predicates = [p for p, _ in source.predicates_by_frequency(args.top_k)]
    cfg = AlignConfig(args.threshold, mode, args.source_lang, args.target_lang, jobs)
    results = align_all(predicates, source, links, provider, labels, target, cfg)

    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True)
    out.write_text(write_mappings(results, args.format), encoding="utf-8")

    counts = {m: sum(r.method is m for r in results) for m in Method}
    print(f"predicates attempted\t{len(results)}")
    print(f"indirect\t{counts[Method.INDIRECT]}")
    print(f"fallback\t{counts[Method.FALLBACK]}")
    print(f"n/a\t{counts[Method.NONE]}")
    return EXIT_OK


def _load_gold_file(path):
    try:
        return load_gold(_read(path))
    except GoldFormatError as exc:
        raise DataError(f"{path}: {exc}") from None


def cmd_eval(args) -> int:
    if (args.ratings_a is None) != (args.ratings_b is None):
        raise UsageError("--ratings-a and --ratings-b go together")
    try:
        rows = read_mappings(_read(args.mappings))
    except ValueError as exc:
        raise DataError(f"{args.mappings}: {exc}") from None
    gold = _load_gold_file(args.gold)
    ratings, missing = rate_mappings([(s, t) for s, t, _ in rows], gold)
    if missing:
        for source in missing:
            print(f"no gold rating for {source}", file=sys.stderr)
        return EXIT_DATA
    if not ratings:
        raise DataError(f"{args.mappings}: no mappings to evaluate")
    report = evaluate(ratings)
    sys.stdout.write(report.to_text())
    if args.report:
        Path(args.report).write_text(report.to_tsv(), encoding="utf-8")

    if args.ratings_a:
        a, b = _load_gold_file(args.ratings_a), _load_gold_file(args.ratings_b)
        if a.keys() != b.keys():
            raise DataError("rating files cover different source predicates")
        keys = sorted(a)
        kappa = cohens_kappa([a[k][1] for k in keys], [b[k][1] for k in keys])
        print(f"{'Cohen kappa':<26}{kappa:>8.4f}")
    return EXIT_OK


def cmd_stats(args) -> int:
    if args.top_k is not None and args.top_k < 1:
        raise UsageError("--top-k must be positive")
    store = _open_store(args.store, None)
    ranked = store.predicates_by_frequency(args.top_k)
    total = len(store) if hasattr(store, "__len__") else sum(n for _, n in store.predicates_by_frequency())
    running = 0
    for p, n in ranked:
        running += n
        print(f"{p.value}\t{n}\t{running / total:.3f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.predicates < 1 or args.pairs < 1:
        raise UsageError("--predicates and --pairs must be positive")
    if not (0.0 <= args.coverage <= 1.0 and 0.0 <= args.confusable <= 1.0):
        raise UsageError("--coverage and --confusable must lie in [0, 1]")
    fixture = synth_bilingual(args.seed, args.predicates, args.pairs, args.coverage, args.confusable)
    for path in write_synth(fixture, args.out_dir):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="predmap", description="Cross-lingual predicate alignment.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    align = sub.add_parser("align", help="map source predicates to target predicates")
    align.add_argument("--source", required=True, help="N-Triples dump or SPARQL endpoint URL")
    align.add_argument("--target", required=True, help="N-Triples dump or SPARQL endpoint URL")
    align.add_argument("--sameas", required=True)
    align.add_argument("--titles-src", required=True)
    align.add_argument("--titles-inter", required=True)
    align.add_argument("--titles-tgt", required=True)
    align.add_argument("--out", required=True)
    align.add_argument("--dict", help="sourceLabel<TAB>targetLabel dictionary; enables the fallback")
    align.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    align.add_argument("--mode", choices=("combined", "m1", "m2"), default="combined")
    align.add_argument("--top-k", type=int, help="only the k most frequent source predicates")
    align.add_argument("--format", choices=("tsv", "nt"), default="tsv")
    align.add_argument("--jobs", type=int, help="worker threads (default: CPU count)")
    align.add_argument("--source-lang", default=None)
    align.add_argument("--target-lang", default=None)
    align.set_defaults(func=cmd_align)

    ev = sub.add_parser("eval", help="score mappings against a gold sheet")
    ev.add_argument("--mappings", required=True)
    ev.add_argument("--gold", required=True)
    ev.add_argument("--ratings-a")
    ev.add_argument("--ratings-b")
    ev.add_argument("--report", help="also write metric<TAB>value rows here")
    ev.set_defaults(func=cmd_eval)

    st = sub.add_parser("stats", help="most frequent predicates with cumulative coverage")
    st.add_argument("--store", required=True)
    st.add_argument("--top-k", type=int)
    st.set_defaults(func=cmd_stats)

    sy = sub.add_parser("synth", help="write a synthetic bilingual fixture")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--predicates", type=int, required=True)
    sy.add_argument("--pairs", type=int, required=True)
    sy.add_argument("--coverage", type=float, default=1.0)
    sy.add_argument("--confusable", type=float, default=0.0)
    sy.add_argument("--out-dir", required=True)
    sy.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"predmap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SparqlError, ValueError) as exc:
        print(f"predmap: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
