from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIX_PQ_CONSTRAINTS, FIX_PQ_GROUND
from hvseg import pqtree as pq


def consecutive(order, subset) -> bool:
    pos = [i for i, x in enumerate(order) if x in subset]
    return not pos or pos[-1] - pos[0] + 1 == len(pos)


def brute(ground, constraints) -> set[tuple[str, ...]]:
    """Permutation filter: every order of ``ground`` with all sets consecutive."""
    return {p for p in itertools.permutations(sorted(ground)) if all(consecutive(p, c) for c in constraints)}


def family(tree) -> set[tuple[str, ...]]:
    return set(pq.enumerate_orders(tree))


def fix_pq():
    return pq.from_constraints(FIX_PQ_GROUND, FIX_PQ_CONSTRAINTS)


families = st.integers(1, 6).flatmap(
    lambda n: st.tuples(
        st.just(tuple("abcdef"[:n])),
        st.lists(st.sets(st.sampled_from("abcdef"[:n]), min_size=1), max_size=5),
    )
)


class TestUniversal:
    def test_single_leaf(self):
        assert pq.universal({"a"}) == pq.Leaf("a")

    def test_three_leaves(self):
        t = pq.universal({"a", "b", "c"})
        assert isinstance(t, pq.PNode) and pq.count_orders(t) == 6

    def test_two_leaves(self):
        assert pq.count_orders(pq.universal({"a", "b"})) == 2

    def test_empty_rejected(self):
        with pytest.raises(pq.PQTreeError):
            pq.universal(set())


class TestReduce:
    def test_pair_in_triple(self):
        t = pq.reduce(pq.universal("abc"), {"a", "b"})
        assert family(t) == {tuple("abc"), tuple("bac"), tuple("cab"), tuple("cba")}

    def test_whole_set_is_noop(self):
        t = fix_pq()
        assert pq.reduce(t, t.leaves) == t

    def test_fix_pq_then_bce_is_null(self):
        t = fix_pq()
        assert not pq.is_null(t)
        assert pq.is_null(pq.reduce(t, {"b", "c", "e"}))
        assert brute(FIX_PQ_GROUND, [*FIX_PQ_CONSTRAINTS, {"b", "c", "e"}]) == set()

    def test_subset_outside_leaves_rejected(self):
        with pytest.raises(pq.PQTreeError):
            pq.reduce(pq.universal("ab"), {"z"})

    @given(families)
    def test_idempotent(self, fam):
        ground, constraints = fam
        t = pq.from_constraints(ground, constraints)
        for c in constraints:
            if not pq.is_null(t):
                assert family(pq.reduce(pq.reduce(t, c), c)) == family(pq.reduce(t, c))


class TestFromConstraints:
    def test_fix_pq_orders(self):
        # The four constraints chain a-b-c-d-e up to the {a, b} swap.
        expected = brute(FIX_PQ_GROUND, FIX_PQ_CONSTRAINTS)
        assert len(expected) == 4
        assert family(fix_pq()) == expected

    def test_pairwise_triangle_is_null(self):
        assert pq.is_null(pq.from_constraints("abc", [{"a", "b"}, {"b", "c"}, {"a", "c"}]))

    def test_no_constraints(self):
        assert pq.from_constraints("abc", []) == pq.make_p([pq.Leaf(x) for x in "abc"])

    @given(families)
    def test_matches_permutation_filter(self, fam):
        ground, constraints = fam
        assert family(pq.from_constraints(ground, constraints)) == brute(ground, constraints)

    @given(families, st.randoms())
    def test_constraint_order_irrelevant(self, fam, rnd):
        ground, constraints = fam
        shuffled = list(constraints)
        rnd.shuffle(shuffled)
        assert pq.from_constraints(ground, constraints) == pq.from_constraints(ground, shuffled)

    @given(families)
    def test_closed_under_reversal(self, fam):
        orders = family(pq.from_constraints(*fam))
        assert {o[::-1] for o in orders} == orders


class TestRepresents:
    def test_p_node(self):
        assert pq.represents(pq.universal("abc"), tuple("bca"))

    def test_q_node(self):
        q = pq.make_q([pq.Leaf(x) for x in "abc"])
        assert not pq.represents(q, tuple("bac"))
        assert pq.represents(q, tuple("cba"))

    def test_satisfies_with_extra_element(self):
        assert pq.satisfies(fix_pq(), tuple("edcbax"))

    def test_count_matches_enumeration(self):
        t = fix_pq()
        assert pq.count_orders(t) == len(pq.enumerate_orders(t))


class TestEnumerate:
    def test_p_pair(self):
        assert sorted(pq.enumerate_orders(pq.universal("ab"))) == [("a", "b"), ("b", "a")]

    def test_q_triple(self):
        q = pq.make_q([pq.Leaf(x) for x in "abc"])
        assert sorted(pq.enumerate_orders(q)) == [tuple("abc"), tuple("cba")]

    def test_null(self):
        assert pq.enumerate_orders(pq.NULL_TREE) == []

    def test_cap(self):
        with pytest.raises(pq.PQTreeError):
            pq.enumerate_orders(pq.universal("abcdef"), cap=10)


class TestProject:
    def test_q_drop_one(self):
        q = pq.make_q([pq.Leaf(x) for x in "abcd"])
        assert pq.project(q, {"a", "c", "d"}) == pq.make_q([pq.Leaf(x) for x in "acd"])

    def test_identity(self):
        t = fix_pq()
        assert pq.project(t, t.leaves) == t

    def test_q_shrinks_to_p(self):
        t = pq.make_p([pq.make_q([pq.Leaf(x) for x in "abc"]), pq.Leaf("d")])
        projected = pq.project(t, {"a", "b", "d"})
        restricted = {tuple(x for x in o if x != "c") for o in pq.enumerate_orders(t)}
        assert family(projected) == restricted
        # Q(a, b) normalizes to P(a, b) and the result is still a block {a, b} next to d.
        assert family(projected) == brute("abd", [{"a", "b"}])

    def test_empty_keep_rejected(self):
        with pytest.raises(pq.PQTreeError):
            pq.project(fix_pq(), set())

    @given(families, st.data())
    def test_equals_restriction(self, fam, data):
        t = pq.from_constraints(*fam)
        if pq.is_null(t):
            return
        keep = data.draw(st.sets(st.sampled_from(sorted(t.leaves)), min_size=1))
        expected = {tuple(x for x in o if x in keep) for o in pq.enumerate_orders(t)}
        assert family(pq.project(t, keep)) == expected


class TestToConstraints:
    def test_q_triple(self):
        q = pq.make_q([pq.Leaf(x) for x in "abc"])
        assert set(pq.to_constraints(q)) == {frozenset("abc"), frozenset("ab"), frozenset("bc")}

    def test_root_p(self):
        t = pq.universal("abc")
        assert set(pq.to_constraints(t)) <= {frozenset("abc")}
        assert pq.from_constraints("abc", pq.to_constraints(t)) == t

    def test_fix_pq_round_trip(self):
        t = fix_pq()
        assert family(pq.from_constraints(t.leaves, pq.to_constraints(t))) == family(t)

    @given(families)
    def test_round_trip(self, fam):
        t = pq.from_constraints(*fam)
        if not pq.is_null(t):
            assert pq.from_constraints(t.leaves, pq.to_constraints(t)) == t

    def test_null_rejected(self):
        with pytest.raises(pq.PQTreeError):
            pq.to_constraints(pq.NULL_TREE)


class TestLaminarSplit:
    def test_fix_pq_split(self):
        first, second = pq.laminar_split_sets(fix_pq())
        nontrivial = lambda sets: {s for s in sets if 1 < len(s) < 5}  # noqa: E731
        assert nontrivial(first) == {frozenset("ab"), frozenset("abc"), frozenset("de")}
        assert nontrivial(second) == {frozenset("cd")}

    def test_p_node_split(self):
        t1, t2 = pq.laminar_split(pq.universal("abc"))
        assert t1 == t2 == pq.universal("abc")

    def test_q_four(self):
        q = pq.make_q([pq.Leaf(x) for x in "abcd"])
        first, second = pq.laminar_split_sets(q)
        assert {frozenset("ab"), frozenset("cd")} <= set(first)
        assert frozenset("bc") in set(second)
        t1, t2 = pq.laminar_split(q)
        assert family(t1) & family(t2) == {tuple("abcd"), tuple("dcba")}

    @given(families)
    def test_split_properties(self, fam):
        t = pq.from_constraints(*fam)
        if pq.is_null(t):
            return
        t1, t2 = pq.laminar_split(t)
        assert t1.leaves == t2.leaves == t.leaves
        assert pq.is_laminar_tree(t1) and pq.is_laminar_tree(t2)
        assert family(t1) & family(t2) == family(t)


class TestCanonicalForm:
    def test_two_child_q_is_p(self):
        assert pq.make_q([pq.Leaf("a"), pq.Leaf("b")]) == pq.make_p([pq.Leaf("b"), pq.Leaf("a")])

    def test_reversed_q_equal(self):
        forward = pq.make_q([pq.Leaf(x) for x in "abcd"])
        backward = pq.make_q([pq.Leaf(x) for x in "dcba"])
        assert forward == backward and hash(forward) == hash(backward)

    def test_duplicate_leaves_rejected(self):
        with pytest.raises(pq.PQTreeError):
            pq.make_p([pq.Leaf("a"), pq.Leaf("a")])

    @given(families)
    def test_json_round_trip(self, fam):
        t = pq.from_constraints(*fam)
        assert pq.from_json(pq.to_json(t)) == t


def test_intersect_is_family_intersection():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(2, 5)
        ground = "abcde"[:n]
        a = [set(rng.sample(ground, rng.randint(1, n))) for _ in range(rng.randint(0, 3))]
        b = [set(rng.sample(ground, rng.randint(1, n))) for _ in range(rng.randint(0, 3))]
        t = pq.intersect(pq.from_constraints(ground, a), pq.from_constraints(ground, b))
        assert family(t) == brute(ground, a + b)
