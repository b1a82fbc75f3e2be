"""Exact deciders with certificates for the three problem formulations.

The sequential PQ-ordering search sweeps the trees left to right. After
tree i it holds one PQ-tree ``R`` over ``L(T_i)`` whose orders all extend
to a consistent prefix; only ``R`` projected onto the overlap with the
next tree matters for the future, so the search state is that projection.
Elements entering at tree i+1 are inserted one at a time, branching over
every place the new leaf can attach, which makes the union of branches
exact. Branches sharing a projected state are explored once. The worst
case is exponential; a node budget bounds the work when asked to.

The search can stall on long sequences where many elements enter in
unconstrained positions. ``method="auto"`` therefore hands the instance
to an exact propositional encoding once the search passes a node budget:
one variable per pair of elements sharing a tree, transitivity inside
every tree, and one auxiliary "before the block" variable per constraint
set and outside element. Pairs sharing a tree share it over an interval
of trees, so a single variable per pair is exactly the agreement of
adjacent orders, and the per-tree orders then merge to a global order.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence

from pysat.solvers import Solver

from . import pqtree as pq
from .core import (
    CheckResult,
    InstanceError,
    LevelInstance,
    LevelWitness,
    MergeError,
    OrderWitness,
    SegInstance,
    SegWitness,
    SeqPQInstance,
    check_witness,
    find_cross,
    merge_orders,
    require_valid,
    restrict,
)
from .reduce import hvseg_to_tlp, tlp_to_seqpq

__all__ = [
    "SearchBudgetExceeded",
    "SolveResult",
    "METHODS",
    "HANDOFF_NODES",
    "Lemma4Report",
    "solve_seqpq",
    "solve_tlp",
    "solve_sfhvseg",
    "check_lemma4",
    "merge_orders",
    "MergeError",
    "recognize_fixed_both",
]


class SearchBudgetExceeded(RuntimeError):
    """The node budget ran out before the search finished."""


@dataclass(frozen=True)
class SolveResult:
    yes: bool
    witness: object = None
    nodes: int = 0
    engine: str = "search"

    def __bool__(self) -> bool:
        return self.yes


# ---------------------------------------------------------------------------
# leaf insertion
# ---------------------------------------------------------------------------


def _with_child(node: pq.Node, idx: int, child: pq.Node) -> pq.Node:
    kids = list(node.children)
    kids[idx] = child
    return pq.PNode(tuple(kids)) if isinstance(node, pq.PNode) else pq.QNode(tuple(kids))


def _attachments(node: pq.Node, x: pq.Leaf, root: bool) -> Iterator[pq.Node]:
    """Every tree over ``node``'s leaves plus ``x`` whose orders restrict to
    orders of ``node``, least committed placements first."""
    if isinstance(node, pq.Leaf):
        if root:
            yield pq.PNode((node, x))
        return
    kids = node.children
    if isinstance(node, pq.PNode):
        yield pq.PNode(kids + (x,))
    else:
        if root:
            yield pq.QNode((x,) + kids)
            yield pq.QNode(kids + (x,))
        for j in range(1, len(kids)):
            yield pq.QNode(kids[:j] + (x,) + kids[j:])
    for idx, child in enumerate(kids):
        for variant in _attachments(child, x, False):
            yield _with_child(node, idx, variant)


def _replace_leaf(node: pq.Node, label: str, new: pq.Node) -> pq.Node:
    if isinstance(node, pq.Leaf):
        return new if node.label == label else node
    for idx, child in enumerate(node.children):
        if label in child.leaves:
            return _with_child(node, idx, _replace_leaf(child, label, new))
    return node


def _within(small: pq.PQTree, big: pq.PQTree) -> bool:
    """Whether every order of ``small`` is an order of ``big``."""
    return pq.intersect(small, big) == small


def _reduce_all(tree: pq.PQTree, sets) -> pq.PQTree:
    for s in sets:
        if pq.is_null(tree):
            break
        tree = pq.reduce(tree, s)
    return tree


# ---------------------------------------------------------------------------
# sequential PQ-ordering
# ---------------------------------------------------------------------------


_EXHAUSTED = object()


def _root_blocks(tree: pq.PQTree) -> list[frozenset[str]]:
    if isinstance(tree, pq.PNode):
        return [c.leaves for c in tree.children]
    return [tree.leaves]


def _floating(instance: SeqPQInstance) -> list[frozenset[str]]:
    """Per tree, the elements left out of the search state.

    An element floats at tree m when it is a leaf child of T_m's root
    P-node, every other root child meets the next tree in at most one
    element, and the element was born at m or already floated at m-1. Its
    position then never matters at m: given the neighbors it gets later,
    it can always be slotted in right after its predecessor's root block.
    """
    trees = instance.trees
    out: list[frozenset[str]] = []
    prev_leaves: frozenset[str] = frozenset()
    prev_float: frozenset[str] = frozenset()
    for m, tree in enumerate(trees):
        nxt = trees[m + 1].leaves if m + 1 < len(trees) else frozenset()
        here: frozenset[str] = frozenset()
        if isinstance(tree, (pq.PNode, pq.Leaf)):
            blocks = _root_blocks(tree)
            if all(len(b) == 1 or len(b & nxt) <= 1 for b in blocks):
                here = frozenset(
                    x for b in blocks if len(b) == 1
                    for x in b if x not in prev_leaves or x in prev_float
                )
        out.append(here)
        prev_leaves, prev_float = tree.leaves, here
    return out


class _Search:
    def __init__(self, instance: SeqPQInstance, budget: int | None) -> None:
        self.inst = instance
        self.trees = instance.trees
        self.budget = budget
        self.nodes = 0
        self._proj: dict = {}
        self.floating = _floating(instance)
        self.eff: list[pq.PQTree | None] = [
            pq.project(t, t.leaves - f) if t.leaves - f else None
            for t, f in zip(self.trees, self.floating)
        ]
        self.cons = [
            sorted((c for c in pq.to_constraints(t) if len(c) > 1), key=lambda c: (len(c), sorted(c)))
            if t is not None else []
            for t in self.eff
        ]
        k = instance.k
        self.carry = [
            (self.eff[i].leaves & self.trees[i + 1].leaves) if i + 1 < k and self.eff[i] is not None else frozenset()
            for i in range(k)
        ]

    def _future_ok(self, i: int, r: pq.PQTree) -> bool:
        """Pairwise lookahead: the elements of ``r`` alive at a later tree
        must be orderable the way both ``r`` and that tree allow. Alive
        sets only shrink going right, so the scan stops once they are too
        small to carry a constraint."""
        for j in range(i + 1, self.inst.k):
            z = r.leaves & self.trees[j].leaves
            if len(z) < 3:
                break
            key = (j, z)
            theirs = self._proj.get(key)
            if theirs is None:
                theirs = self._proj[key] = pq.project(self.trees[j], z)
            if pq.is_null(pq.intersect(pq.project(r, z), theirs)):
                return False
        return True

    def _tick(self) -> None:
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise SearchBudgetExceeded(f"node budget {self.budget} exhausted")

    def _key(self, i: int, r: pq.PQTree | None):
        o = self.carry[i]
        return (i, pq.project(r, o) if o else None)

    def candidates(self, i: int, state: pq.PQTree | None) -> Iterator[pq.PQTree | None]:
        tree = self.eff[i]
        if state is None:
            if tree is None or self._future_ok(i, tree):
                yield tree
            return
        present = state.leaves
        cons = self.cons[i]
        state = _reduce_all(state, (c & present for c in cons if len(c & present) > 1))
        if pq.is_null(state):
            return
        newborn = tree.leaves - present
        if not newborn:
            r = _reduce_all(state, cons)
            if not pq.is_null(r) and self._future_ok(i, r):
                yield r
            return
        greedy = _reduce_all(tree, pq.to_constraints(state))
        if not pq.is_null(greedy) and self._future_ok(i, greedy):
            yield greedy
        yield from self._insert(i, state, newborn)

    def _next_newborn(self, i: int, present: frozenset[str], newborn: frozenset[str]):
        best = None
        for x in sorted(newborn):
            size = len(self.eff[i].leaves) + 1
            partner = None
            for c in self.cons[i]:
                if x in c and c & present:
                    size = len(c)
                    if len(c) == 2:
                        partner = next(iter(c - {x}))
                    break
            if best is None or size < best[0]:
                best = (size, x, partner)
        return best[1], best[2]

    def _insert(self, i: int, tree: pq.Node, newborn: frozenset[str]) -> Iterator[pq.PQTree]:
        if not newborn:
            r = _reduce_all(tree, self.cons[i])
            if not pq.is_null(r) and self._future_ok(i, r):
                yield r
            return
        present = tree.leaves
        x, partner = self._next_newborn(i, present, newborn)
        rest = newborn - {x}
        grown = present | {x}
        # The new leaf may split a block it is not part of, so every
        # constraint touching the grown set is re-applied.
        relevant = [c & grown for c in self.cons[i] if 1 < len(c & grown) < len(grown)]
        leaf = pq.Leaf(x)
        if partner is not None:
            variants: Iterator[pq.Node] = iter([_replace_leaf(tree, partner, pq.PNode((pq.Leaf(partner), leaf)))])
        else:
            variants = _attachments(tree, leaf, True)
        # A branch contained in an exhausted sibling cannot succeed.
        tried: list[pq.PQTree] = []
        for variant in variants:
            self._tick()
            r = _reduce_all(variant, relevant)
            if pq.is_null(r) or any(_within(r, t) for t in tried) or not self._future_ok(i, r):
                continue
            tried.append(r)
            yield from self._insert(i, r, rest)

    def run(self) -> list[pq.PQTree | None] | None:
        k = self.inst.k
        if k == 0:
            return []
        visited = set()
        failed: dict[int, list[pq.PQTree]] = {}
        path: list[pq.PQTree | None] = []
        frames = [self.candidates(0, None)]
        while frames:
            i = len(frames) - 1
            r = next(frames[-1], _EXHAUSTED)
            if r is _EXHAUSTED:
                frames.pop()
                if path:
                    path.pop()
                continue
            self._tick()
            key = self._key(i, r)
            if key in visited:
                continue
            if key[1] is not None and any(_within(key[1], t) for t in failed.get(i, ())):
                continue
            visited.add(key)
            if key[1] is not None:
                failed.setdefault(i, []).append(key[1])
            path.append(r)
            if i + 1 == k:
                return path
            frames.append(self.candidates(i + 1, key[1]))
        return None

    def witness(self, path: Sequence[pq.PQTree | None]) -> OrderWitness:
        k = len(path)
        orders: list[tuple[str, ...]] = [()] * k
        for m in range(k - 1, -1, -1):
            after = orders[m + 1] if m + 1 < k else ()
            r = path[m]
            if r is None:
                base: tuple[str, ...] = ()
            elif m + 1 < k:
                base = pq.order_extending(r, restrict(after, self.carry[m]))
                assert base is not None, "projection of a search state must extend"
            else:
                base = pq.any_order(r)
            orders[m] = self._slot_floating(m, base, after)
        return OrderWitness(tuple(orders), merge_orders(orders))

    def _slot_floating(self, m: int, base: tuple[str, ...], after: tuple[str, ...]) -> tuple[str, ...]:
        floating = self.floating[m]
        if not floating:
            return base
        block = {}
        for n, b in enumerate(_root_blocks(self.trees[m])):
            for x in b:
                block[x] = n
        # Anchor each surviving floating element to its predecessor in the
        # next tree's order; the rest go last.
        anchored: dict[str | None, list[str]] = {}
        pred = None
        for x in after:
            if x in floating:
                anchored.setdefault(pred, []).append(x)
            elif x in block:
                pred = x
        placed = {x for xs in anchored.values() for x in xs}
        tail = sorted(floating - placed)
        out = list(anchored.get(None, []))
        end_of: dict[int, int] = {}
        for p, x in enumerate(base):
            end_of[block[x]] = p
        inserts: dict[int, list[str]] = {}
        for p_elem, xs in anchored.items():
            if p_elem is not None:
                inserts.setdefault(end_of[block[p_elem]], []).extend(xs)
        for p, x in enumerate(base):
            out.append(x)
            out.extend(inserts.get(p, ()))
        return tuple(out + tail)


# ---------------------------------------------------------------------------
# propositional encoding
# ---------------------------------------------------------------------------


class _PairVars:
    def __init__(self) -> None:
        self.ids: dict[tuple[str, str], int] = {}

    def before(self, a: str, b: str) -> int:
        """Literal for "a precedes b"."""
        if a > b:
            return -self.before(b, a)
        key = (a, b)
        if key not in self.ids:
            self.ids[key] = len(self.ids) + 1
        return self.ids[key]


def _encode(instance: SeqPQInstance) -> tuple[_PairVars, list[list[int]]]:
    pairs = _PairVars()
    leaves = [sorted(t.leaves) for t in instance.trees]
    for lv in leaves:
        for a, b in combinations(lv, 2):
            pairs.before(a, b)
    nxt = len(pairs.ids) + 1
    clauses: list[list[int]] = []
    seen: set[tuple[str, str, str]] = set()
    for t, lv in zip(instance.trees, leaves):
        for tri in combinations(lv, 3):
            if tri in seen:
                continue
            seen.add(tri)
            a, b, c = tri
            ab, bc, ac = pairs.before(a, b), pairs.before(b, c), pairs.before(a, c)
            clauses.append([-ab, -bc, ac])
            clauses.append([ab, bc, -ac])
        for block in pq.to_constraints(t):
            if len(block) < 2 or len(block) >= len(lv):
                continue
            for c in lv:
                if c in block:
                    continue
                first, nxt = nxt, nxt + 1
                for a in block:
                    clauses.append([-first, pairs.before(c, a)])
                    clauses.append([first, pairs.before(a, c)])
    return pairs, clauses


def _solve_sat(instance: SeqPQInstance) -> OrderWitness | None:
    pairs, clauses = _encode(instance)
    with Solver(name="cd19", bootstrap_with=clauses) as solver:
        if not solver.solve():
            return None
        true = {lit for lit in solver.get_model() if lit > 0}

    def cmp(a: str, b: str) -> int:
        lit = pairs.before(a, b)
        return -1 if (lit in true if lit > 0 else -lit not in true) else 1

    per_tree = tuple(tuple(sorted(t.leaves, key=functools.cmp_to_key(cmp))) for t in instance.trees)
    return OrderWitness(per_tree, merge_orders(per_tree))


METHODS = ("auto", "search", "sat")
HANDOFF_NODES = 1000


def solve_seqpq(
    instance: SeqPQInstance,
    *,
    budget: int | None = None,
    method: str = "auto",
) -> SolveResult:
    """Decide a sequential PQ-ordering instance; on yes the witness holds
    per-tree orders and a merged global order.

    ``method="search"`` runs only the tree search (``budget`` caps its
    nodes); ``"sat"`` runs only the encoding; ``"auto"`` searches up to
    ``budget`` or :data:`HANDOFF_NODES` nodes, whichever is smaller, and
    then switches to the encoding. All three are exact.
    """
    require_valid(instance)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    nodes = 0
    if method != "sat":
        cap = budget
        if method == "auto":
            cap = HANDOFF_NODES if budget is None else min(budget, HANDOFF_NODES)
        search = _Search(instance, cap)
        try:
            path = search.run()
        except SearchBudgetExceeded:
            if method == "search":
                raise
            path = _EXHAUSTED
        nodes = search.nodes
        if path is not _EXHAUSTED:
            if path is None:
                return SolveResult(False, None, nodes, "search")
            witness = search.witness(path)
            assert check_witness(instance, witness), "solver produced a rejected witness"
            return SolveResult(True, witness, nodes, "search")
    witness = _solve_sat(instance)
    if witness is None:
        return SolveResult(False, None, nodes, "sat")
    assert check_witness(instance, witness), "encoding produced a rejected witness"
    return SolveResult(True, witness, nodes, "sat")


# ---------------------------------------------------------------------------
# per-tree order families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lemma4Report:
    """Which trees reject their order and which adjacent pairs disagree on
    their shared elements (1-based indices)."""

    unrepresented: tuple[int, ...] = ()
    disagreeing: tuple[tuple[int, int], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.unrepresented and not self.disagreeing

    def __bool__(self) -> bool:
        return self.ok


def check_lemma4(instance: SeqPQInstance, per_tree: Sequence[Sequence[str]]) -> Lemma4Report:
    """Check per-tree orders: each represented by its tree, adjacent ones
    agreeing on common elements."""
    if len(per_tree) != instance.k:
        raise InstanceError(f"{len(per_tree)} orders for {instance.k} trees")
    for i, (t, o) in enumerate(zip(instance.trees, per_tree)):
        if len(o) != len(t.leaves) or set(o) != t.leaves:
            raise InstanceError(f"order {i + 1} does not match the leaves of tree {i + 1}")
    bad = tuple(i + 1 for i, (t, o) in enumerate(zip(instance.trees, per_tree)) if not pq.represents(t, o))
    pairs = []
    for i in range(instance.k - 1):
        shared = instance.trees[i].leaves & instance.trees[i + 1].leaves
        if restrict(per_tree[i], shared) != restrict(per_tree[i + 1], shared):
            pairs.append((i + 1, i + 2))
    return Lemma4Report(bad, tuple(pairs))


# ---------------------------------------------------------------------------
# level planarity and segments
# ---------------------------------------------------------------------------


def solve_tlp(instance: LevelInstance, *, budget: int | None = None, method: str = "auto") -> SolveResult:
    red = tlp_to_seqpq(instance)
    res = solve_seqpq(red.target, budget=budget, method=method)
    if not res:
        return SolveResult(False, None, res.nodes, res.engine)
    witness = red.pull_witness(res.witness)
    assert check_witness(instance, witness), "pulled-back level witness rejected"
    return SolveResult(True, witness, res.nodes, res.engine)


def solve_sfhvseg(instance: SegInstance, *, budget: int | None = None, method: str = "auto") -> SolveResult:
    """Find a left-to-right order of the verticals making the ordered
    adjacency matrix cross-free, if one exists."""
    require_valid(instance)
    touched = {v for _, v in instance.edges}
    used = tuple(v for v in instance.verticals if v in touched)
    isolated = tuple(sorted(v for v in instance.verticals if v not in touched))
    if not used:
        return SolveResult(True, SegWitness(isolated), 0)
    core = SegInstance(instance.horizontals, used, instance.edges, instance.sigma_h)
    red = hvseg_to_tlp(core)
    res = solve_tlp(red.target, budget=budget, method=method)
    if not res:
        return SolveResult(False, None, res.nodes, res.engine)
    sigma = red.pull_witness(res.witness).sigma_v + isolated
    witness = SegWitness(sigma)
    assert check_witness(instance, witness), "pulled-back segment witness rejected"
    return SolveResult(True, witness, res.nodes, res.engine)


def recognize_fixed_both(instance: SegInstance, sigma_v: Sequence[str] | None = None) -> CheckResult:
    """Fully fixed variant: both orders given; no exactly when the ordered
    matrix contains a cross, reported as ``detail = "h,v"``."""
    sigma = tuple(sigma_v) if sigma_v is not None else instance.sigma_v
    if sigma is None:
        raise InstanceError("the fully fixed variant needs sigma_v")
    require_valid(instance.with_sigma_v(sigma))
    cross = find_cross(instance, sigma)
    if cross is None:
        return CheckResult(True)
    return CheckResult(False, f"{cross[0]},{cross[1]}")

