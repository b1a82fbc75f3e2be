"""Reductions between the three formulations, with witness pull-back.

Every reduction returns a :class:`Reduction` holding the target instance
and a function mapping a witness of the target back to a witness of the
source. Vertices created by replication are named ``orig#level#copy``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

from . import pqtree as pq
from .core import (
    InstanceError,
    LevelInstance,
    LevelWitness,
    OrderWitness,
    SegInstance,
    SegWitness,
    SeqPQInstance,
    level_structure,
    merge_orders,
    require_valid,
    restrict,
)


@dataclass(frozen=True)
class Reduction:
    source: object
    target: object
    pull_witness: Callable = field(repr=False, compare=False)

    def then(self, nxt: Reduction | Callable[[object], Reduction]) -> Reduction:
        """Compose with a reduction whose source is this target, or with a
        reduction function applied to this target."""
        if not isinstance(nxt, Reduction):
            nxt = nxt(self.target)
        first, second = self.pull_witness, nxt.pull_witness
        return Reduction(self.source, nxt.target, lambda w: first(second(w)))


def _mangle(v: str, level: int, copy: int) -> str:
    return f"{v}#{level}#{copy}"


# ---------------------------------------------------------------------------
# segments -> level planarity
# ---------------------------------------------------------------------------


def hvseg_to_tlp(instance: SegInstance) -> Reduction:
    """One level per horizontal, one level-monotone path per vertical over
    its lifespan, and a single constraint per level grouping the
    intersecting verticals."""
    ls = level_structure(instance)
    k = len(instance.sigma_h)
    level: dict[str, int] = {}
    origin: dict[str, str] = {}
    edges = set()
    for v, (lo, hi) in ls.lifespan.items():
        for i in range(lo, hi + 1):
            name = _mangle(v, i, 0)
            level[name] = i
            origin[name] = v
            if i < hi:
                edges.add((name, _mangle(v, i + 1, 0)))
    constraints = {
        i: {frozenset(_mangle(v, i, 0) for v in hits)}
        for i, hits in ls.intersecting.items()
        if hits
    }
    target = LevelInstance(level, frozenset(edges), constraints, num_levels=k)

    def pull(w: LevelWitness) -> SegWitness:
        per_level = [tuple(origin[x] for x in w.orders.get(i, ())) for i in range(1, k + 1)]
        sigma = merge_orders([o for o in per_level if o])
        missing = sorted(set(instance.verticals) - set(sigma))
        return SegWitness(sigma + tuple(missing))

    return Reduction(instance, target, pull)


# ---------------------------------------------------------------------------
# level planarity -> matching
# ---------------------------------------------------------------------------


def tlp_to_matching(instance: LevelInstance) -> Reduction:
    """Explode every vertex of degree d >= 2 into d degree-1 copies that
    are kept consecutive by one extra constraint."""
    require_valid(instance)
    adj = instance.adjacency()
    copies: dict[str, list[str]] = {}
    copy_for: dict[tuple[str, str], str] = {}
    level: dict[str, int] = {}
    origin: dict[str, str] = {}
    for v, nbrs in adj.items():
        lv = instance.level[v]
        if len(nbrs) <= 1:
            names = [v]
        else:
            names = [_mangle(v, lv, j) for j in range(1, len(nbrs) + 1)]
        copies[v] = names
        for name in names:
            level[name] = lv
            origin[name] = v
        for nbr, name in zip(nbrs, names if len(nbrs) > 1 else names * len(nbrs)):
            copy_for[(v, nbr)] = name
    edges = frozenset((copy_for[(u, v)], copy_for[(v, u)]) for u, v in instance.edges)
    constraints: dict[int, set[frozenset[str]]] = {}
    for i, family in instance.constraints.items():
        constraints[i] = {frozenset(x for v in c for x in copies[v]) for c in family}
    for v, names in copies.items():
        if len(names) > 1:
            constraints.setdefault(instance.level[v], set()).add(frozenset(names))
    target = LevelInstance(level, edges, constraints, num_levels=instance.num_levels)

    def pull(w: LevelWitness) -> LevelWitness:
        orders = {}
        for i, order in w.orders.items():
            merged: list[str] = []
            for x in order:
                v = origin[x]
                if not merged or merged[-1] != v:
                    merged.append(v)
            orders[i] = tuple(dict.fromkeys(merged))
        return LevelWitness(orders)

    return Reduction(instance, target, pull)


# ---------------------------------------------------------------------------
# one constraint per level
# ---------------------------------------------------------------------------


def _family_order(family) -> list[frozenset[str]]:
    return sorted(family, key=lambda c: (-len(c), sorted(c)))


def tlp_split_levels(instance: LevelInstance) -> Reduction:
    """Split every level carrying m >= 2 constraints into m levels joined
    by parallel paths, one constraint per new level."""
    require_valid(instance)
    if not instance.is_matching():
        raise InstanceError("tlp_split_levels needs a matching; run tlp_to_matching first")
    k = instance.num_levels
    width = {i: max(1, len(instance.family(i))) for i in range(1, k + 1)}
    base: dict[int, int] = {}
    nxt = 1
    for i in range(1, k + 1):
        base[i] = nxt
        nxt += width[i]
    total = nxt - 1

    def copy(v: str, j: int) -> str:
        i = instance.level[v]
        return v if width[i] == 1 else _mangle(v, i, j)

    level: dict[str, int] = {}
    edges = set()
    for v, i in instance.level.items():
        for j in range(1, width[i] + 1):
            level[copy(v, j)] = base[i] + j - 1
            if j > 1:
                edges.add((copy(v, j - 1), copy(v, j)))
    for u, v in instance.edges:
        edges.add((copy(u, width[instance.level[u]]), copy(v, 1)))
    constraints: dict[int, set[frozenset[str]]] = {}
    for i, family in instance.constraints.items():
        for j, c in enumerate(_family_order(family), start=1):
            constraints[base[i] + j - 1] = {frozenset(copy(v, j) for v in c)}
    target = LevelInstance(level, frozenset(edges), constraints, num_levels=total)

    def pull(w: LevelWitness) -> LevelWitness:
        orders = {}
        for i in range(1, k + 1):
            sub = w.orders.get(base[i], ())
            orders[i] = tuple(x if width[i] == 1 else x.rsplit("#", 2)[0] for x in sub)
        return LevelWitness(orders)

    return Reduction(instance, target, pull)


# ---------------------------------------------------------------------------
# level planarity -> segments
# ---------------------------------------------------------------------------


def _paths(instance: LevelInstance) -> list[list[str]]:
    up = {u: v for u, v in instance.edges}
    has_down = {v for _, v in instance.edges}
    starts = sorted(v for v in instance.level if v not in has_down)
    paths = []
    for s in starts:
        path = [s]
        while path[-1] in up:
            path.append(up[path[-1]])
        paths.append(path)
    return paths


def _tlp_to_hvseg_direct(instance: LevelInstance) -> Reduction:
    k = instance.num_levels
    paths = _paths(instance)
    pid = {p[0]: p for p in paths}
    on_path = {v: p[0] for p in paths for v in p}
    single: dict[int, frozenset[str]] = {}
    for i in range(1, k + 1):
        fam = instance.family(i)
        single[i] = next(iter(fam)) if fam else frozenset()

    # A path whose end vertex is outside its level's constraint would lose
    # that level from its lifespan; a helper horizontal touching every path
    # on the level keeps it (and adds no restriction of its own). Paths in
    # no constraint at all become isolated verticals instead and are moved
    # to the far right when a witness is pulled back.
    touched = {on_path[v] for c in single.values() for v in c}
    need_lo = {instance.level[p[0]] for p in paths if p[0] in touched and p[0] not in single[instance.level[p[0]]]}
    need_hi = {instance.level[p[-1]] for p in paths if p[0] in touched and p[-1] not in single[instance.level[p[-1]]]}
    sigma_h: list[str] = []
    edges = set()
    for i in range(1, k + 1):
        present = [on_path[v] for v in instance.vertices_on(i) if on_path[v] in touched]
        if i in need_lo:
            sigma_h.append(f"L{i}-")
            edges.update((f"L{i}-", p) for p in present)
        sigma_h.append(f"L{i}")
        edges.update((f"L{i}", on_path[v]) for v in single[i])
        if i in need_hi:
            sigma_h.append(f"L{i}+")
            edges.update((f"L{i}+", p) for p in present)
    target = SegInstance(tuple(sigma_h), tuple(sorted(pid)), frozenset(edges), tuple(sigma_h))

    def pull(w: SegWitness) -> LevelWitness:
        ranked = [p for p in w.sigma_v if p in touched] + [p for p in w.sigma_v if p not in touched]
        rank = {p: r for r, p in enumerate(ranked)}
        orders = {}
        for i in range(1, k + 1):
            orders[i] = tuple(sorted(instance.vertices_on(i), key=lambda v: rank[on_path[v]]))
        return LevelWitness(orders)

    return Reduction(instance, target, pull)


def tlp_to_hvseg(instance: LevelInstance) -> Reduction:
    """Paths become verticals and levels become horizontals. Inputs that
    are not already a union of level-monotone paths with at most one
    constraint per level go through :func:`tlp_to_matching` and
    :func:`tlp_split_levels` first."""
    require_valid(instance)
    direct = instance.is_path_union() and all(len(f) <= 1 for f in instance.constraints.values())
    if direct:
        return _tlp_to_hvseg_direct(instance)
    chain = tlp_to_matching(instance)
    chain = chain.then(tlp_split_levels(chain.target))
    return chain.then(_tlp_to_hvseg_direct(chain.target))


# ---------------------------------------------------------------------------
# sequential PQ-ordering <-> level planarity
# ---------------------------------------------------------------------------


def _nontrivial_sets(tree: pq.PQTree) -> set[frozenset[str]]:
    return {c for c in pq.to_constraints(tree) if 1 < len(c) < len(tree.leaves)}


def seqpq_to_tlp(instance: SeqPQInstance) -> Reduction:
    """Two levels per tree carrying the two laminar halves of the tree,
    with same-element vertices joined across adjacent levels."""
    require_valid(instance)
    k = instance.k
    level: dict[str, int] = {}
    edges = set()
    constraints: dict[int, set[frozenset[str]]] = {}
    for i, tree in enumerate(instance.trees, start=1):
        first, second = pq.laminar_split(tree)
        lo, hi = 2 * i - 1, 2 * i
        for x in tree.leaves:
            level[_mangle(x, i, 1)] = lo
            level[_mangle(x, i, 2)] = hi
            edges.add((_mangle(x, i, 1), _mangle(x, i, 2)))
        constraints[lo] = {frozenset(_mangle(x, i, 1) for x in c) for c in _nontrivial_sets(first)}
        constraints[hi] = {frozenset(_mangle(x, i, 2) for x in c) for c in _nontrivial_sets(second)}
        if i < k:
            for x in tree.leaves & instance.trees[i].leaves:
                edges.add((_mangle(x, i, 2), _mangle(x, i + 1, 1)))
    target = LevelInstance(level, frozenset(edges), constraints, num_levels=2 * k)

    def pull(w: LevelWitness) -> OrderWitness:
        per_tree = tuple(
            tuple(x.rsplit("#", 2)[0] for x in w.orders.get(2 * i - 1, ()))
            for i in range(1, k + 1)
        )
        return OrderWitness(per_tree, merge_orders(per_tree))

    return Reduction(instance, target, pull)


def tlp_to_seqpq(instance: LevelInstance) -> Reduction:
    """Ground elements are the edges of the exploded matching (plus the
    isolated vertices); each non-empty level contributes one PQ-tree."""
    require_valid(instance)
    to_matching = tlp_to_matching(instance)
    m = to_matching.target
    element: dict[str, str] = {v: v for v in m.level}
    for u, v in m.edges:
        element[u] = element[v] = f"{u}~{v}"
    trees = []
    tree_level = []
    for i in range(1, m.num_levels + 1):
        verts = m.vertices_on(i)
        if not verts:
            continue
        constraints = [frozenset(element[v] for v in c) for c in _family_order(m.family(i))]
        tree = pq.from_constraints((element[v] for v in verts), constraints)
        assert not pq.is_null(tree), "a laminar family is always satisfiable"
        trees.append(tree)
        tree_level.append(i)
    ground = set(element.values())
    target = SeqPQInstance(tuple(sorted(ground)), tuple(trees))

    def pull(w: OrderWitness) -> LevelWitness:
        orders = {}
        for i, order in zip(tree_level, w.per_tree):
            back = {element[v]: v for v in m.vertices_on(i)}
            orders[i] = tuple(back[x] for x in order)
        return to_matching.pull_witness(LevelWitness(orders))

    return Reduction(instance, target, pull)


# ---------------------------------------------------------------------------
# sequential -> simultaneous PQ-ordering
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Arc:
    """Arc of a simultaneous PQ-ordering DAG; ``mapping`` injects the
    target tree's leaves into the source tree's leaves."""

    source: int
    target: int
    mapping: Mapping[str, str]


@dataclass(frozen=True)
class SimPQInstance:
    trees: tuple[pq.PQTree, ...]
    arcs: tuple[Arc, ...]

    def degrees(self) -> list[int]:
        deg = [0] * len(self.trees)
        for a in self.arcs:
            deg[a.source] += 1
            deg[a.target] += 1
        return deg

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def problems(self) -> list[str]:
        """Violated structural invariants (empty when well formed)."""
        out = []
        for n, a in enumerate(self.arcs):
            src, tgt = self.trees[a.source], self.trees[a.target]
            if set(a.mapping) != set(tgt.leaves):
                out.append(f"arc {n}: map domain is not the target's leaf set")
            if len(set(a.mapping.values())) != len(a.mapping):
                out.append(f"arc {n}: map is not injective")
            if not set(a.mapping.values()) <= src.leaves:
                out.append(f"arc {n}: map leaves the source's leaf set")
        indeg = [0] * len(self.trees)
        succ: dict[int, list[int]] = {}
        for a in self.arcs:
            indeg[a.target] += 1
            succ.setdefault(a.source, []).append(a.target)
        queue = [i for i, d in enumerate(indeg) if d == 0]
        seen = 0
        while queue:
            i = queue.pop()
            seen += 1
            for j in succ.get(i, ()):
                indeg[j] -= 1
                if indeg[j] == 0:
                    queue.append(j)
        if seen != len(self.trees):
            out.append("arcs contain a cycle")
        return out

    def accepts(self, orders: list[tuple[str, ...]]) -> bool:
        """Whether per-tree orders solve the instance: each represented by
        its tree, each source order inducing its targets' orders."""
        for t, o in zip(self.trees, orders):
            if not pq.represents(t, o):
                return False
        for a in self.arcs:
            back = {s: t for t, s in a.mapping.items()}
            induced = tuple(back[x] for x in orders[a.source] if x in back)
            if induced != tuple(orders[a.target]):
                return False
        return True


def seqpq_to_simpq(instance: SeqPQInstance) -> SimPQInstance:
    """Interleave the trees with one P-node per adjacent overlap.

    Trees are laid out along the path T_1, S_1, T_2, ..., T_k. Arcs run
    from T_i and from T_{i+1} to S_i, each mapping the leaves of S_i to
    the common elements. Adjacent trees without common elements get no
    S_i (there is nothing to synchronize).
    """
    require_valid(instance)
    trees: list[pq.PQTree] = []
    arcs: list[Arc] = []
    for i, tree in enumerate(instance.trees):
        trees.append(tree)
        if i + 1 == instance.k:
            break
        shared = tree.leaves & instance.trees[i + 1].leaves
        if not shared:
            continue
        here = len(trees) - 1
        trees.append(pq.universal(shared))
        s = len(trees) - 1
        identity = {x: x for x in sorted(shared)}
        arcs.append(Arc(here, s, identity))
        arcs.append(Arc(s + 1, s, identity))
    return SimPQInstance(tuple(trees), tuple(arcs))
