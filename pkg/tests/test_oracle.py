from __future__ import annotations

import itertools

import pytest

from conftest import FIX_PQ_CONSTRAINTS, FIX_PQ_GROUND, fix_1, fix_cross, fix_triangle
from hvseg import gen, oracle
from hvseg import pqtree as pq
from hvseg import reduce as rd
from hvseg.core import LevelInstance, SegWitness, SeqPQInstance, check_witness, find_cross


class TestBruteSfhvseg:
    def test_fix_cross_witness_set(self):
        res = oracle.brute_sfhvseg(fix_cross())
        # b must sit at either end; a and c are free among themselves.
        assert [w.sigma_v for w in res.witnesses] == [
            ("a", "c", "b"),
            ("b", "a", "c"),
            ("b", "c", "a"),
            ("c", "a", "b"),
        ]

    def test_witness_set_is_filter(self):
        inst = fix_cross()
        expected = [p for p in itertools.permutations(sorted(inst.verticals)) if find_cross(inst, p) is None]
        assert [w.sigma_v for w in oracle.brute_sfhvseg(inst).witnesses] == expected

    def test_fix_triangle(self):
        res = oracle.brute_sfhvseg(fix_triangle())
        assert not res and res.witness is None

    def test_fix_1(self):
        assert oracle.brute_sfhvseg(fix_1()).witnesses == (SegWitness(("v1",)),)

    def test_first_only(self):
        assert len(oracle.brute_sfhvseg(fix_cross(), first_only=True).witnesses) == 1

    def test_cap(self):
        with pytest.raises(oracle.OracleCapExceeded):
            oracle.brute_sfhvseg(fix_cross(), cap=2)


class TestBruteTlp:
    def test_empty_graph(self):
        assert oracle.brute_tlp(LevelInstance({"a": 1, "b": 2}, set())).yes

    def test_fix_triangle_image(self):
        assert not oracle.brute_tlp(rd.hvseg_to_tlp(fix_triangle()).target).yes

    def test_fix_cross_image(self):
        image = rd.hvseg_to_tlp(fix_cross()).target
        res = oracle.brute_tlp(image)
        assert res.yes and check_witness(image, res.witness)

    def test_cap(self):
        with pytest.raises(oracle.OracleCapExceeded):
            oracle.brute_tlp(LevelInstance({x: 1 for x in "abcdef"}, set()), cap=3)


class TestBruteSeqpq:
    def test_universal(self):
        assert oracle.brute_seqpq(SeqPQInstance(tuple("abc"), (pq.universal("abc"),))).yes

    def test_pair_triangle(self):
        trees = tuple(pq.from_constraints("abc", [c]) for c in ({"a", "b"}, {"b", "c"}, {"a", "c"}))
        assert not oracle.brute_seqpq(SeqPQInstance(tuple("abc"), trees)).yes

    def test_fix_pq(self):
        inst = SeqPQInstance(FIX_PQ_GROUND, (pq.from_constraints(FIX_PQ_GROUND, FIX_PQ_CONSTRAINTS),))
        res = oracle.brute_seqpq(inst)
        assert res.yes and check_witness(inst, res.witness)

    def test_matches_permutation_filter(self):
        for seed in range(60):
            inst = gen.random_seqpq(5, 3, seed)
            expected = any(
                all(pq.satisfies(t, p) for t in inst.trees) for p in itertools.permutations(inst.ground)
            )
            assert oracle.brute_seqpq(inst).yes == expected

    def test_cap(self):
        with pytest.raises(oracle.OracleCapExceeded):
            oracle.brute_seqpq(SeqPQInstance(tuple("abcde"), (pq.universal("abcde"),)), cap=2)


def test_decide_dispatch():
    assert oracle.decide(fix_1()).yes
    with pytest.raises(TypeError):
        oracle.decide("not an instance")


def test_oracles_agree_across_reductions():
    for seed in range(40):
        inst = gen.random_seg(2 + seed % 2, 3, 0.5, seed)
        if not all(any(v == w for _, w in inst.edges) for v in inst.verticals):
            continue
        image = rd.hvseg_to_tlp(inst).target
        assert oracle.decide(inst).yes == oracle.decide(image).yes == oracle.decide(rd.tlp_to_seqpq(image).target).yes
