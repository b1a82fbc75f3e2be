"""Instance and witness types shared by every other module.

Three problem formulations live here:

* :class:`SegInstance` -- a bipartite graph on horizontal and vertical
  segments together with the bottom-to-top order of the horizontals
  (and, for the fully fixed variant, the left-to-right order of the
  verticals).
* :class:`LevelInstance` -- a proper level graph with a laminar family of
  consecutivity constraints on every level.
* :class:`SeqPQInstance` -- a sequence of PQ-trees in which the trees
  containing any one element are consecutive.

All values are treated as immutable once built.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from . import pqtree as pq


class InstanceError(ValueError):
    """An operation was handed an instance violating its preconditions."""


class WitnessError(ValueError):
    """Witness and instance do not fit together (type or domain)."""


class MergeError(ValueError):
    """Per-tree orders disagree, so no global order extends them all."""


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SegInstance:
    horizontals: tuple[str, ...]
    verticals: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    sigma_h: tuple[str, ...]
    sigma_v: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "horizontals", tuple(self.horizontals))
        object.__setattr__(self, "verticals", tuple(self.verticals))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        object.__setattr__(self, "sigma_h", tuple(self.sigma_h))
        if self.sigma_v is not None:
            object.__setattr__(self, "sigma_v", tuple(self.sigma_v))

    def neighbors_of_vertical(self, v: str) -> list[str]:
        return [h for h, w in self.edges if w == v]

    def degree(self, v: str) -> int:
        return sum(1 for _, w in self.edges if w == v)

    def with_sigma_v(self, sigma_v: Sequence[str] | None) -> SegInstance:
        return SegInstance(self.horizontals, self.verticals, self.edges, self.sigma_h, sigma_v)


@dataclass(frozen=True)
class LevelInstance:
    """Proper level graph with per-level laminar consecutivity constraints.

    ``level`` maps each vertex to a level in ``1..num_levels``; ``edges``
    are stored as (lower, upper) pairs; ``constraints`` maps a level to
    its family of constraint sets (levels without constraints omitted).
    """

    level: Mapping[str, int]
    edges: frozenset[tuple[str, str]]
    constraints: Mapping[int, frozenset[frozenset[str]]] = field(default_factory=dict)
    num_levels: int | None = None

    def __post_init__(self) -> None:
        level = dict(self.level)
        edges = set()
        for u, v in self.edges:
            if u in level and v in level and level[u] > level[v]:
                u, v = v, u
            edges.add((u, v))
        constraints = {}
        for i, family in self.constraints.items():
            family = frozenset(frozenset(c) for c in family if len(c) > 0)
            if family:
                constraints[int(i)] = family
        num = self.num_levels
        if num is None:
            num = max(level.values(), default=0)
        object.__setattr__(self, "level", level)
        object.__setattr__(self, "edges", frozenset(edges))
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "num_levels", int(num))

    def vertices_on(self, i: int) -> list[str]:
        return sorted(v for v, lv in self.level.items() if lv == i)

    def family(self, i: int) -> frozenset[frozenset[str]]:
        return self.constraints.get(i, frozenset())

    def adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {v: [] for v in self.level}
        for u, v in sorted(self.edges):
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_matching(self) -> bool:
        return all(len(n) <= 1 for n in self.adjacency().values())

    def is_path_union(self) -> bool:
        """Disjoint union of level-monotone paths: at most one neighbor
        above and one below every vertex."""
        up: dict[str, int] = {}
        down: dict[str, int] = {}
        for u, v in self.edges:
            up[u] = up.get(u, 0) + 1
            down[v] = down.get(v, 0) + 1
        return all(c <= 1 for c in up.values()) and all(c <= 1 for c in down.values())


@dataclass(frozen=True)
class SeqPQInstance:
    ground: tuple[str, ...]
    trees: tuple[pq.PQTree, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ground", tuple(sorted(set(self.ground))))
        object.__setattr__(self, "trees", tuple(self.trees))

    @property
    def k(self) -> int:
        return len(self.trees)

    def lifespan(self, x: str) -> list[int]:
        return [i for i, t in enumerate(self.trees) if x in t.leaves]


Instance = Union[SegInstance, LevelInstance, SeqPQInstance]


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SegWitness:
    sigma_v: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sigma_v", tuple(self.sigma_v))


@dataclass(frozen=True)
class LevelWitness:
    orders: Mapping[int, tuple[str, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "orders", {int(i): tuple(o) for i, o in self.orders.items() if len(o) > 0}
        )


@dataclass(frozen=True)
class OrderWitness:
    per_tree: tuple[tuple[str, ...], ...]
    global_order: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_tree", tuple(tuple(o) for o in self.per_tree))
        object.__setattr__(self, "global_order", tuple(self.global_order))


Witness = Union[SegWitness, LevelWitness, OrderWitness]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _is_permutation(order: Sequence[str], domain: Iterable[str]) -> bool:
    domain = list(domain)
    return len(order) == len(domain) and set(order) == set(domain) and len(set(order)) == len(order)


def _validate_seg(inst: SegInstance) -> list[str]:
    out = []
    H, V = inst.horizontals, inst.verticals
    if len(set(H)) != len(H):
        out.append("duplicate horizontal ids")
    if len(set(V)) != len(V):
        out.append("duplicate vertical ids")
    if set(H) & set(V):
        out.append(f"ids shared by H and V: {sorted(set(H) & set(V))}")
    hs, vs = set(H), set(V)
    for h, v in sorted(inst.edges):
        if h not in hs or v not in vs:
            out.append(f"edge ({h}, {v}) does not join H to V")
    if not _is_permutation(inst.sigma_h, H):
        out.append("sigma_h is not a permutation of H")
    if inst.sigma_v is not None and not _is_permutation(inst.sigma_v, V):
        out.append("sigma_v is not a permutation of V")
    return out


def _validate_level(inst: LevelInstance) -> list[str]:
    out = []
    for v, lv in sorted(inst.level.items()):
        if not isinstance(lv, int) or not 1 <= lv <= inst.num_levels:
            out.append(f"vertex {v} has level {lv} outside 1..{inst.num_levels}")
    for u, v in sorted(inst.edges):
        if u not in inst.level or v not in inst.level:
            out.append(f"edge ({u}, {v}) references an unknown vertex")
        elif inst.level[v] != inst.level[u] + 1:
            out.append(f"not proper: edge ({u}, {v}) joins levels {inst.level[u]} and {inst.level[v]}")
    for i, family in sorted(inst.constraints.items()):
        on_level = set(inst.vertices_on(i))
        for c in sorted(family, key=sorted):
            if not c <= on_level:
                out.append(f"constraint {sorted(c)} on level {i} leaves the level")
        if not pq.is_laminar_family(family):
            out.append(f"constraints on level {i} are not laminar")
    return out


def _validate_seqpq(inst: SeqPQInstance) -> list[str]:
    out = []
    union: set[str] = set()
    for i, t in enumerate(inst.trees):
        if pq.is_null(t):
            out.append(f"tree {i + 1} is the null tree")
        union |= t.leaves
    if union != set(inst.ground):
        out.append("ground set differs from the union of the leaf sets")
    for x in sorted(union):
        span = inst.lifespan(x)
        if span and span[-1] - span[0] + 1 != len(span):
            out.append(f"lifespan not consecutive for {x}: trees {[i + 1 for i in span]}")
    return out


def validate(instance: Instance) -> ValidationReport:
    """Collect every violated precondition; never raises."""
    if isinstance(instance, SegInstance):
        return ValidationReport(tuple(_validate_seg(instance)))
    if isinstance(instance, LevelInstance):
        return ValidationReport(tuple(_validate_level(instance)))
    if isinstance(instance, SeqPQInstance):
        return ValidationReport(tuple(_validate_seqpq(instance)))
    return ValidationReport((f"unknown instance type {type(instance).__name__}",))


def require_valid(instance: Instance) -> None:
    report = validate(instance)
    if not report.ok:
        raise InstanceError("; ".join(report.violations))


# ---------------------------------------------------------------------------
# level structure of a segment instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelStructure:
    level: Mapping[str, int]
    lifespan: Mapping[str, tuple[int, int]]
    active: Mapping[int, frozenset[str]]
    intersecting: Mapping[int, frozenset[str]]

    @property
    def k(self) -> int:
        return len(self.level)


def level_structure(instance: SegInstance, *, allow_isolated: bool = False) -> LevelStructure:
    """Levels, lifespans, active and intersecting verticals per level.

    Isolated verticals have no lifespan; they are rejected unless
    ``allow_isolated`` is set, in which case they are simply absent from
    ``lifespan`` and from every active set.
    """
    require_valid(instance)
    level = {h: i + 1 for i, h in enumerate(instance.sigma_h)}
    k = len(level)
    hits: dict[str, list[int]] = {v: [] for v in instance.verticals}
    for h, v in instance.edges:
        hits[v].append(level[h])
    lifespan = {}
    for v in instance.verticals:
        if not hits[v]:
            if not allow_isolated:
                raise InstanceError(
                    f"vertical {v} has no neighbor; isolated verticals must be stripped first"
                )
            continue
        lifespan[v] = (min(hits[v]), max(hits[v]))
    active = {i: frozenset(v for v, (a, b) in lifespan.items() if a <= i <= b) for i in range(1, k + 1)}
    by_level: dict[int, set[str]] = {i: set() for i in range(1, k + 1)}
    for h, v in instance.edges:
        by_level[level[h]].add(v)
    intersecting = {i: frozenset(s) for i, s in by_level.items()}
    return LevelStructure(level, lifespan, active, intersecting)


# ---------------------------------------------------------------------------
# orders
# ---------------------------------------------------------------------------


def merge_orders(per_tree: Sequence[Sequence[str]]) -> tuple[str, ...]:
    """A global order extending every given order.

    Builds the union of the orders as a directed graph and returns its
    lexicographically smallest topological order. Raises
    :class:`MergeError` when the union has a cycle.
    """
    succ: dict[str, set[str]] = {}
    indeg: dict[str, int] = {}
    for order in per_tree:
        for x in order:
            succ.setdefault(x, set())
            indeg.setdefault(x, 0)
        for a, b in zip(order, order[1:]):
            if b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    heap = [x for x, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        x = heapq.heappop(heap)
        out.append(x)
        for y in succ[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                heapq.heappush(heap, y)
    if len(out) != len(indeg):
        stuck = sorted(x for x, d in indeg.items() if d > 0)
        raise MergeError(f"orders are inconsistent; cycle through {stuck[:6]}")
    return tuple(out)


def restrict(order: Sequence[str], keep: Iterable[str]) -> tuple[str, ...]:
    keep = set(keep)
    return tuple(x for x in order if x in keep)


def is_consecutive(order: Sequence[str], subset: Iterable[str]) -> bool:
    subset = set(subset)
    idx = [i for i, x in enumerate(order) if x in subset]
    return not idx or idx[-1] - idx[0] + 1 == len(idx)


# ---------------------------------------------------------------------------
# witness checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def find_cross(instance: SegInstance, sigma_v: Sequence[str]) -> tuple[str, str] | None:
    """First (h, v) zero cell of the (sigma_h, sigma_v)-ordered matrix with
    a one strictly left and right of it in its row and strictly above and
    below it in its column; None when the matrix has no such cross."""
    rows = {h: i for i, h in enumerate(instance.sigma_h)}
    cols = {v: j for j, v in enumerate(sigma_v)}
    row_span: dict[str, tuple[int, int]] = {}
    col_span: dict[str, tuple[int, int]] = {}
    for h, v in instance.edges:
        r, c = rows[h], cols[v]
        lo, hi = row_span.get(h, (c, c))
        row_span[h] = (min(lo, c), max(hi, c))
        lo, hi = col_span.get(v, (r, r))
        col_span[v] = (min(lo, r), max(hi, r))
    for h in instance.sigma_h:
        if h not in row_span:
            continue
        left, right = row_span[h]
        r = rows[h]
        for v in sigma_v[left + 1:right]:
            if (h, v) in instance.edges or v not in col_span:
                continue
            below, above = col_span[v]
            if below < r < above:
                return h, v
    return None


def _check_seg(inst: SegInstance, w: SegWitness) -> CheckResult:
    if not _is_permutation(w.sigma_v, inst.verticals):
        raise WitnessError("sigma_v is not a permutation of the verticals")
    cross = find_cross(inst, w.sigma_v)
    if cross is not None:
        return CheckResult(False, f"cross at ({cross[0]}, {cross[1]})")
    return CheckResult(True)


def level_order_violations(inst: LevelInstance, orders: Mapping[int, Sequence[str]]) -> list[str]:
    """Constraint and edge-consistency violations of per-level orders."""
    out = []
    pos: dict[str, int] = {}
    for i, order in orders.items():
        for p, v in enumerate(order):
            pos[v] = p
    for i, family in sorted(inst.constraints.items()):
        order = orders.get(i, ())
        for c in sorted(family, key=sorted):
            if not is_consecutive(order, c):
                out.append(f"constraint {sorted(c)} not consecutive on level {i}")
    by_level: dict[int, list[tuple[str, str]]] = {}
    for u, v in inst.edges:
        by_level.setdefault(inst.level[u], []).append((u, v))
    for i, edges in sorted(by_level.items()):
        edges.sort()
        for (a, b), (u, v) in itertools.combinations(edges, 2):
            if a == u or b == v:
                continue
            if (pos[a] < pos[u]) != (pos[b] < pos[v]):
                out.append(f"edges ({a}, {b}) and ({u}, {v}) cross between levels {i} and {i + 1}")
    return out


def _check_level(inst: LevelInstance, w: LevelWitness) -> CheckResult:
    for i in range(1, inst.num_levels + 1):
        if not _is_permutation(w.orders.get(i, ()), inst.vertices_on(i)):
            raise WitnessError(f"order for level {i} is not a permutation of its vertices")
    if set(w.orders) - set(range(1, inst.num_levels + 1)):
        raise WitnessError("witness mentions levels outside the instance")
    problems = level_order_violations(inst, w.orders)
    return CheckResult(not problems, "; ".join(problems[:5]))


def _check_order(inst: SeqPQInstance, w: OrderWitness) -> CheckResult:
    if len(w.per_tree) != inst.k:
        raise WitnessError(f"{len(w.per_tree)} per-tree orders for {inst.k} trees")
    for i, (t, o) in enumerate(zip(inst.trees, w.per_tree)):
        if not _is_permutation(o, t.leaves):
            raise WitnessError(f"order {i + 1} is not a permutation of tree {i + 1}'s leaves")
    if not _is_permutation(w.global_order, inst.ground):
        raise WitnessError("global order is not a permutation of the ground set")
    for i, (t, o) in enumerate(zip(inst.trees, w.per_tree)):
        if not pq.represents(t, o):
            return CheckResult(False, f"order {i + 1} is not represented by tree {i + 1}")
    for i in range(inst.k - 1):
        shared = inst.trees[i].leaves & inst.trees[i + 1].leaves
        if restrict(w.per_tree[i], shared) != restrict(w.per_tree[i + 1], shared):
            return CheckResult(False, f"orders {i + 1} and {i + 2} disagree on shared elements")
    for i, o in enumerate(w.per_tree):
        if restrict(w.global_order, o) != o:
            return CheckResult(False, f"global order does not extend order {i + 1}")
    return CheckResult(True)


def check_witness(instance: Instance, witness: Witness) -> CheckResult:
    """Decide whether ``witness`` certifies ``instance`` as a yes-instance."""
    if isinstance(instance, SegInstance) and isinstance(witness, SegWitness):
        return _check_seg(instance, witness)
    if isinstance(instance, LevelInstance) and isinstance(witness, LevelWitness):
        return _check_level(instance, witness)
    if isinstance(instance, SeqPQInstance) and isinstance(witness, OrderWitness):
        return _check_order(instance, witness)
    raise WitnessError(
        f"{type(witness).__name__} does not fit a {type(instance).__name__}"
    )
