from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fix_1, fix_cross, fix_triangle, seg_instances
from hvseg import gen, jsonio
from hvseg import pqtree as pq
from hvseg import reduce as rd
from hvseg.cli import EXIT_ERROR, EXIT_NO, EXIT_YES, main
from hvseg.core import (
    LevelWitness,
    OrderWitness,
    SegWitness,
    SeqPQInstance,
    check_witness,
)


def write(tmp_path, name, inst):
    path = tmp_path / name
    path.write_text(jsonio.dumps(jsonio.instance_to_dict(inst)))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSolve:
    def test_fix_cross_writes_witness(self, tmp_path, capsys):
        w = tmp_path / "w.json"
        code, out, _ = run(capsys, "solve", write(tmp_path, "cross.json", fix_cross()), "--witness", str(w))
        assert code == EXIT_YES and "yes" in out
        witness = jsonio.witness_from_dict(json.loads(w.read_text()))
        assert check_witness(fix_cross(), witness)

    def test_fix_triangle(self, tmp_path, capsys):
        assert run(capsys, "solve", write(tmp_path, "tri.json", fix_triangle()))[0] == EXIT_NO

    def test_fully_fixed_cross(self, tmp_path, capsys):
        code, out, _ = run(capsys, "solve", write(tmp_path, "ff.json", fix_cross(("a", "b", "c"))))
        assert code == EXIT_NO and "cross at (h2, b)" in out

    def test_fully_fixed_json(self, tmp_path, capsys):
        code, out, _ = run(capsys, "solve", "--json", write(tmp_path, "ff.json", fix_cross(("a", "b", "c"))))
        assert code == EXIT_NO and json.loads(out)["cross"] == ["h2", "b"]

    def test_malformed(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(capsys, "solve", str(bad))[0] == EXIT_ERROR

    def test_invalid_instance_names_invariant(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"problem": "sfhvseg", "horizontals": ["h1"], "verticals": ["v"],
                                   "edges": [["h1", "w"]], "sigma_h": ["h1"]}))
        code, out, err = run(capsys, "solve", str(bad))
        assert code == EXIT_ERROR and "w" in out + err

    def test_problem_override(self, tmp_path, capsys):
        data = jsonio.instance_to_dict(fix_1())
        del data["problem"]
        path = tmp_path / "untagged.json"
        path.write_text(json.dumps(data))
        assert run(capsys, "solve", str(path))[0] == EXIT_ERROR
        assert run(capsys, "solve", "--problem", "sfhvseg", str(path))[0] == EXIT_YES

    @pytest.mark.parametrize("method", ["search", "sat"])
    def test_methods(self, tmp_path, capsys, method):
        path = write(tmp_path, "pq.json", gen.gen_planted_seqpq(10, 4, 1))
        code, out, _ = run(capsys, "solve", "--json", "--method", method, path)
        assert code == EXIT_YES and json.loads(out)["engine"] == method

    def test_budget_exhausted_is_error(self, tmp_path, capsys):
        path = write(tmp_path, "pq.json", gen.gen_planted_seqpq(30, 10, 1))
        assert run(capsys, "solve", "--method", "search", "--budget", "1", path)[0] == EXIT_ERROR

    def test_level_instance(self, tmp_path, capsys):
        image = rd.hvseg_to_tlp(fix_cross()).target
        w = tmp_path / "w.json"
        assert run(capsys, "solve", write(tmp_path, "lvl.json", image), "--witness", str(w))[0] == EXIT_YES
        assert check_witness(image, jsonio.witness_from_dict(json.loads(w.read_text())))

    def test_quiet(self, tmp_path, capsys):
        code, out, _ = run(capsys, "solve", "--quiet", write(tmp_path, "c.json", fix_cross()))
        assert code == EXIT_YES and out == ""


class TestBatch:
    def make_dir(self, tmp_path):
        d = tmp_path / "batch"
        d.mkdir()
        for seed in range(6):
            inst = gen.mutate(gen.gen_arrangement(5, 5, 0.6, seed), 3, seed)
            write(d, f"i{seed}.json", inst)
        (d / "notes.txt").write_text("ignored")
        return d

    def test_jobs_match_sequential(self, tmp_path, capsys):
        d = self.make_dir(tmp_path)
        seq = run(capsys, "solve", "--json", str(d), "--witness", str(tmp_path / "w1"))
        par = run(capsys, "solve", "--json", "--jobs", "2", str(d), "--witness", str(tmp_path / "w2"))
        assert seq[0] == par[0]
        assert seq[1].replace(str(tmp_path / "w1"), "") == par[1].replace(str(tmp_path / "w2"), "")
        names = sorted(p.name for p in (tmp_path / "w1").iterdir())
        assert names == sorted(p.name for p in (tmp_path / "w2").iterdir())
        for name in names:
            assert (tmp_path / "w1" / name).read_text() == (tmp_path / "w2" / name).read_text()

    def test_worst_exit_code(self, tmp_path, capsys):
        d = tmp_path / "mixed"
        d.mkdir()
        write(d, "a.json", fix_cross())
        write(d, "b.json", fix_triangle())
        assert run(capsys, "solve", str(d))[0] == EXIT_NO
        (d / "c.json").write_text("[]")
        assert run(capsys, "solve", "--jobs", "2", str(d))[0] == EXIT_ERROR

    def test_empty_directory(self, tmp_path, capsys):
        (tmp_path / "empty").mkdir()
        assert run(capsys, "solve", str(tmp_path / "empty"))[0] == EXIT_ERROR


class TestReduce:
    def test_to_tlp(self, tmp_path, capsys):
        out = tmp_path / "t.json"
        code, _, err = run(capsys, "reduce", write(tmp_path, "c.json", fix_cross()), "--to", "tlp", "-o", str(out))
        assert code == EXIT_YES and "vertices=5" in err
        target = jsonio.instance_from_dict(json.loads(out.read_text()))
        assert target.num_levels == 3

    def test_tlp_to_simpq(self, tmp_path, capsys):
        image = rd.hvseg_to_tlp(fix_cross()).target
        out = tmp_path / "s.json"
        assert run(capsys, "reduce", write(tmp_path, "t.json", image), "--to", "simpq", "-o", str(out))[0] == EXIT_YES
        s = jsonio.instance_from_dict(json.loads(out.read_text()))
        assert s.max_degree() <= 2 and not s.problems()

    def test_seqpq_to_hvseg(self, tmp_path, capsys):
        trees = tuple(pq.from_constraints("abc", [c]) for c in ({"a", "b"}, {"b", "c"}))
        inst = SeqPQInstance(tuple("abc"), trees)
        out = tmp_path / "h.json"
        assert run(capsys, "reduce", write(tmp_path, "q.json", inst), "--to", "hvseg", "-o", str(out))[0] == EXIT_YES
        assert run(capsys, "solve", str(out))[0] == EXIT_YES

    def test_unsupported_pair(self, tmp_path, capsys):
        code, _, err = run(capsys, "reduce", write(tmp_path, "c.json", fix_cross()), "--to", "matching")
        assert code == EXIT_ERROR and "no reduction from sfhvseg to matching" in err
        assert run(capsys, "reduce", write(tmp_path, "c.json", fix_cross()), "--to", "bogus")[0] == EXIT_ERROR

    def test_json_stats(self, tmp_path, capsys):
        code, out, _ = run(capsys, "reduce", "--json", write(tmp_path, "c.json", fix_cross()), "--to", "tlp",
                           "-o", str(tmp_path / "t.json"))
        assert code == EXIT_YES and json.loads(out)["problem"] == "tlp"


class TestCheckOracleRender:
    def test_check_inline(self, tmp_path, capsys):
        path = write(tmp_path, "c.json", fix_cross())
        assert run(capsys, "check", path, "--witness", "(b,a,c)")[0] == EXIT_YES
        code, out, _ = run(capsys, "check", path, "--witness", "a,b,c")
        assert code == EXIT_NO and "(h2, b)" in out

    def test_check_bad_witness(self, tmp_path, capsys):
        assert run(capsys, "check", write(tmp_path, "c.json", fix_cross()), "--witness", "a,b")[0] == EXIT_ERROR

    def test_oracle(self, tmp_path, capsys):
        code, out, _ = run(capsys, "oracle", write(tmp_path, "t.json", fix_triangle()))
        assert code == EXIT_NO and out.strip() == "no"
        code, out, _ = run(capsys, "oracle", "--all", write(tmp_path, "c.json", fix_cross()))
        assert code == EXIT_YES and len(out.strip().splitlines()) == 5

    def test_oracle_cap(self, tmp_path, capsys):
        assert run(capsys, "oracle", "--cap", "1", write(tmp_path, "c.json", fix_cross()))[0] == EXIT_ERROR

    def test_render_fix_1(self, tmp_path, capsys):
        out = tmp_path / "one.svg"
        assert run(capsys, "render", write(tmp_path, "one.json", fix_1()), "--witness", "v1", "-o", str(out))[0] == EXIT_YES
        assert out.read_text().count("<line") == 2

    def test_render_invalid_witness(self, tmp_path, capsys):
        out = tmp_path / "bad.svg"
        code, _, _ = run(capsys, "render", write(tmp_path, "c.json", fix_cross()), "--witness", "a,b,c", "-o", str(out))
        assert code == EXIT_NO and out.read_text().count('class="unwanted"') == 1

    def test_render_solves_when_no_witness(self, tmp_path, capsys):
        out = tmp_path / "c.svg"
        assert run(capsys, "render", write(tmp_path, "c.json", fix_cross()), "-o", str(out))[0] == EXIT_YES
        assert 'class="unwanted"' not in out.read_text()

    def test_render_no_instance(self, tmp_path, capsys):
        out = tmp_path / "t.svg"
        assert run(capsys, "render", write(tmp_path, "t.json", fix_triangle()), "-o", str(out))[0] == EXIT_ERROR
        assert not out.exists()


class TestGen:
    def test_deterministic_file(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            assert run(capsys, "gen", "arrangement", "--n", "6", "--seed", "3", "-o", str(out))[0] == EXIT_YES
        assert a.read_text() == b.read_text()
        assert jsonio.instance_from_dict(json.loads(a.read_text())) == gen.gen_arrangement(6, 6, 0.3, 3)

    @pytest.mark.parametrize("kind", ["arrangement", "random-seg", "planted-seqpq", "random-seqpq", "random-level"])
    def test_kinds_round_trip(self, capsys, kind):
        code, out, _ = run(capsys, "gen", kind, "--n", "5", "--k", "3", "--seed", "1")
        assert code == EXIT_YES
        jsonio.instance_from_dict(json.loads(out))

    def test_mutate(self, capsys):
        code, out, _ = run(capsys, "gen", "arrangement", "--n", "4", "--mutate", "2", "--seed", "5")
        assert code == EXIT_YES
        base = gen.gen_arrangement(4, 4, 0.3, 5)
        assert len(jsonio.instance_from_dict(json.loads(out)).edges ^ base.edges) == 2

    def test_mutate_wrong_kind(self, capsys):
        assert run(capsys, "gen", "planted-seqpq", "--mutate", "1")[0] == EXIT_ERROR


class TestExitContract:
    @pytest.mark.parametrize(
        "argv",
        [[], ["frobnicate"], ["solve"], ["solve", "/nonexistent.json"], ["gen", "arrangement", "--n", "0"],
         ["gen", "arrangement", "--density", "2"], ["check", "/nonexistent.json", "--witness", "a"]],
    )
    def test_errors_exit_2(self, capsys, argv):
        assert main(argv) == EXIT_ERROR

    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == EXIT_YES

    def test_entry_point(self, tmp_path):
        path = write(tmp_path, "c.json", fix_cross())
        proc = subprocess.run([sys.executable, "-m", "hvseg", "solve", path], capture_output=True, text=True)
        assert proc.returncode == EXIT_YES and "yes" in proc.stdout


@pytest.mark.parametrize("target", ["tlp", "seqpq", "simpq", "hvseg"])
def test_reduce_output_independent_of_hash_seed(tmp_path, target):
    image = rd.hvseg_to_tlp(fix_cross()).target
    source = fix_cross() if target != "hvseg" else image
    path = write(tmp_path, "src.json", source)
    outputs = set()
    for seed in ("1", "2", "3"):
        env = {**os.environ, "PYTHONHASHSEED": seed}
        proc = subprocess.run([sys.executable, "-m", "hvseg", "reduce", path, "--to", target, "--quiet"],
                              capture_output=True, text=True, env=env)
        assert proc.returncode == EXIT_YES, proc.stderr
        outputs.add(proc.stdout)
    assert len(outputs) == 1


class TestJsonRoundTrip:
    @given(seg_instances(), st.booleans(), st.data())
    def test_segments(self, inst, with_sigma, data):
        if with_sigma:
            inst = inst.with_sigma_v(tuple(data.draw(st.permutations(inst.verticals))))
        assert jsonio.instance_from_dict(json.loads(jsonio.dumps(jsonio.instance_to_dict(inst)))) == inst
        w = SegWitness(tuple(data.draw(st.permutations(inst.verticals))))
        assert jsonio.witness_from_dict(jsonio.witness_to_dict(w)) == w

    @given(st.integers(0, 10_000))
    def test_generated_instances(self, seed):
        insts = [gen.random_level(7, 4, 0.3, seed), gen.random_seqpq(6, 4, seed)]
        insts.append(rd.seqpq_to_simpq(insts[1]))
        for inst in insts:
            assert jsonio.instance_from_dict(jsonio.loads(jsonio.dumps(jsonio.instance_to_dict(inst)))) == inst

    def test_witnesses(self):
        for w in (LevelWitness({1: ("a", "b"), 2: ("c",)}), OrderWitness((("a", "b"), ("b", "c")), ("a", "b", "c"))):
            assert jsonio.witness_from_dict(jsonio.loads(jsonio.dumps(jsonio.witness_to_dict(w)))) == w

    @pytest.mark.parametrize(
        "doc",
        [[], {"problem": "nope"}, {"problem": "sfhvseg"}, {"problem": "tlp", "levels": [{"vertex": "a"}]},
         {"problem": "tlp", "levels": [], "level_edges": [], "constraints": {"x": []}},
         {"problem": "tlp", "levels": [], "level_edges": [], "constraints": {"1": [[]]}},
         {"problem": "seqpq", "ground": ["a"], "trees": 3}],
    )
    def test_malformed(self, doc):
        with pytest.raises(jsonio.FormatError):
            jsonio.instance_from_dict(doc)
