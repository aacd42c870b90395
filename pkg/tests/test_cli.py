import filecmp
import subprocess
import sys

import pytest

from helpers import genre_fixture
from predmap.cli import main
from predmap.evaluation import Rating, evaluate_counts, write_gold
from predmap.interlink import write_link_files
from predmap.triple_store import IRI, Literal, Triple, TripleStore


def _write(dir_, name, text):
    path = dir_ / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _align_args(d, links=("sameas.tsv", "source_titles.tsv", "interlanguage.tsv", "target_titles.tsv")):
    return ["align", "--source", str(d / "source.nt"), "--target", str(d / "target.nt"),
            "--sameas", str(d / links[0]), "--titles-src", str(d / links[1]),
            "--titles-inter", str(d / links[2]), "--titles-tgt", str(d / links[3])]


@pytest.fixture
def genre_dir(tmp_path):
    fx = genre_fixture()
    _write(tmp_path, "source.nt", fx["source"].serialize())
    _write(tmp_path, "target.nt", fx["target"].serialize())
    for name, text in write_link_files(fx["links"]).items():
        _write(tmp_path, name, text)
    _write(tmp_path, "dict.tsv", "장르\tgenre\n")
    return tmp_path, fx


class TestAlign:
    def test_genre_row(self, genre_dir, capsys):
        d, fx = genre_dir
        out = d / "out.tsv"
        assert main(_align_args(d) + ["--out", str(out), "--jobs", "1"]) == 0
        rows = out.read_text(encoding="utf-8").splitlines()
        assert f"{fx['p'].value}\t{fx['genre'].value}\tIndirect" in rows
        assert "predicates attempted\t2" in capsys.readouterr().out

    def test_m2_requires_dict(self, genre_dir, capsys):
        d, _ = genre_dir
        assert main(_align_args(d) + ["--out", str(d / "o.tsv"), "--mode", "m2"]) == 1
        assert "--dict" in capsys.readouterr().err

    def test_m2_with_dict(self, genre_dir):
        d, fx = genre_dir
        out = d / "o.tsv"
        assert main(_align_args(d) + ["--out", str(out), "--mode", "m2", "--dict", str(d / "dict.tsv")]) == 0
        rows = out.read_text(encoding="utf-8").splitlines()
        assert f"{fx['p'].value}\t{fx['genre'].value}\tFallback" in rows

    def test_top_k(self, tmp_path):
        p, q = IRI("http://ko.x/p"), IRI("http://ko.x/q")
        source = TripleStore([Triple(IRI(f"http://ko.x/s{i}"), p if i < 3 else q, Literal("v")) for i in range(4)])
        _write(tmp_path, "source.nt", source.serialize())
        _write(tmp_path, "target.nt", "")
        for name in ("a", "b", "c", "e"):
            _write(tmp_path, name, "")
        out = tmp_path / "o.tsv"
        assert main(_align_args(tmp_path, ("a", "b", "c", "e")) + ["--out", str(out), "--top-k", "1"]) == 0
        assert out.read_text(encoding="utf-8") == "http://ko.x/p\tN/A\tNone\n"

    def test_nt_output(self, genre_dir):
        d, fx = genre_dir
        out = d / "o.nt"
        assert main(_align_args(d) + ["--out", str(out), "--format", "nt"]) == 0
        assert "equivalentProperty" in out.read_text(encoding="utf-8")

    def test_missing_file_is_data_error(self, genre_dir):
        d, _ = genre_dir
        args = _align_args(d) + ["--out", str(d / "o.tsv")]
        args[args.index("--source") + 1] = str(d / "nope.nt")
        assert main(args) == 2

    def test_bad_threshold(self, genre_dir):
        d, _ = genre_dir
        assert main(_align_args(d) + ["--out", str(d / "o.tsv"), "--threshold", "2"]) == 1

    def test_missing_required_flag(self):
        assert main(["align", "--source", "x"]) == 1


@pytest.fixture
def counts_files(tmp_path):
    # one mapping per rating so that the gold sheet yields the published counts
    counts = {Rating.EQUIVALENT: 500, Rating.SOURCE_SUBSUMED_BY_TARGET: 119,
              Rating.TARGET_SUBSUMED_BY_SOURCE: 20, Rating.UNRELATED: 267, Rating.NOT_AVAILABLE: 94}
    gold, rows, i = {}, [], 0
    for rating, n in counts.items():
        for _ in range(n):
            s, t = f"http://ko.x/p{i:04d}", f"http://en.x/q{i:04d}"
            if rating is Rating.NOT_AVAILABLE:
                gold[s] = ("N/A", rating)
                rows.append(f"{s}\tN/A\tNone")
            else:
                gold[s] = (t, rating)
                rows.append(f"{s}\t{t}\tIndirect")
            i += 1
    return (_write(tmp_path, "m.tsv", "\n".join(rows) + "\n"),
            _write(tmp_path, "gold.tsv", write_gold(gold)), tmp_path)


class TestEval:
    def test_counts(self, counts_files, capsys):
        mappings, gold, d = counts_files
        assert main(["eval", "--mappings", mappings, "--gold", gold, "--report", str(d / "r.tsv")]) == 0
        out = capsys.readouterr().out
        assert "0.500" in out and "0.639" in out
        report = (d / "r.tsv").read_text(encoding="utf-8")
        expected = evaluate_counts(500, 119, 20, 267, 94)
        assert f"{expected.precision1:.3f}" in report

    def test_kappa_identical(self, counts_files, capsys):
        mappings, gold, _ = counts_files
        assert main(["eval", "--mappings", mappings, "--gold", gold, "--ratings-a", gold, "--ratings-b", gold]) == 0
        assert "1.0000" in capsys.readouterr().out

    def test_kappa_flags_go_together(self, counts_files):
        mappings, gold, _ = counts_files
        assert main(["eval", "--mappings", mappings, "--gold", gold, "--ratings-a", gold]) == 1

    def test_missing_gold_row(self, tmp_path, capsys):
        mappings = _write(tmp_path, "m.tsv", "http://ko.x/a\thttp://en.x/a\tIndirect\nhttp://ko.x/zz\tN/A\tNone\n")
        gold = _write(tmp_path, "g.tsv", "http://ko.x/a\thttp://en.x/a\tEQ\n")
        assert main(["eval", "--mappings", mappings, "--gold", gold]) == 2
        assert "http://ko.x/zz" in capsys.readouterr().err

    def test_bad_gold_code(self, tmp_path):
        mappings = _write(tmp_path, "m.tsv", "http://ko.x/a\thttp://en.x/a\tIndirect\n")
        gold = _write(tmp_path, "g.tsv", "http://ko.x/a\thttp://en.x/a\tXX\n")
        assert main(["eval", "--mappings", mappings, "--gold", gold]) == 2


class TestStats:
    @pytest.fixture
    def store_path(self, tmp_path):
        triples = []
        for name, n in (("p", 97), ("q", 2), ("r", 1)):
            triples += [Triple(IRI(f"http://x/s{i}"), IRI(f"http://x/{name}"), Literal("v")) for i in range(n)]
        return _write(tmp_path, "s.nt", TripleStore(triples).serialize())

    def test_top1(self, store_path, capsys):
        assert main(["stats", "--store", store_path, "--top-k", "1"]) == 0
        assert capsys.readouterr().out == "http://x/p\t97\t0.970\n"

    def test_all(self, store_path, capsys):
        assert main(["stats", "--store", store_path, "--top-k", "3"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert [line.split("\t")[0] for line in lines] == ["http://x/p", "http://x/q", "http://x/r"]
        assert lines[-1].endswith("\t1.000")

    def test_empty_store(self, tmp_path, capsys):
        assert main(["stats", "--store", _write(tmp_path, "e.nt", "")]) == 0
        assert capsys.readouterr().out == ""


class TestSynth:
    def test_reproducible(self, tmp_path):
        for name in ("a", "b"):
            assert main(["synth", "--seed", "42", "--predicates", "20", "--pairs", "10",
                         "--coverage", "0.6", "--confusable", "0.3", "--out-dir", str(tmp_path / name)]) == 0
        names = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
        match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
        assert len(match) == 8 and mismatch == errors == []

    def test_zero_coverage_all_na(self, tmp_path, capsys):
        d = tmp_path / "fx"
        assert main(["synth", "--seed", "1", "--predicates", "10", "--pairs", "5",
                     "--coverage", "0", "--out-dir", str(d)]) == 0
        out = d / "m.tsv"
        assert main(_align_args(d) + ["--out", str(out), "--mode", "m1"]) == 0
        rows = out.read_text(encoding="utf-8").splitlines()
        assert len(rows) == 10 and all(r.split("\t")[1] == "N/A" for r in rows)

    @pytest.mark.parametrize("bad", [["--predicates", "0", "--pairs", "5"],
                                     ["--predicates", "5", "--pairs", "5", "--coverage", "1.5"]])
    def test_invalid(self, tmp_path, bad):
        assert main(["synth", "--out-dir", str(tmp_path)] + bad) == 1


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "predmap", "stats", "--store", _write(tmp_path, "e.nt", "")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "predmap"], capture_output=True, text=True)
    assert proc.returncode == 1
