"""Brute-force reference deciders.

These enumerate orders directly and share no search logic with
:mod:`hvseg.solve`. Prefixes are abandoned as soon as they can no longer
be completed, which keeps the exhaustive suites fast without changing
the answer. Every decider counts the prefixes it extends and raises
:class:`OracleCapExceeded` once the count passes ``cap``, so a test can
never silently give up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import pqtree as pq
from .core import (
    LevelInstance,
    LevelWitness,
    OrderWitness,
    SegInstance,
    SegWitness,
    SeqPQInstance,
    find_cross,
    require_valid,
    restrict,
)

DEFAULT_CAP = 1_000_000


class OracleCapExceeded(RuntimeError):
    """The enumeration grew past its cap."""


@dataclass(frozen=True)
class OracleResult:
    yes: bool
    witnesses: tuple = ()

    @property
    def witness(self):
        return self.witnesses[0] if self.witnesses else None

    def __bool__(self) -> bool:
        return self.yes


class _Counter:
    def __init__(self, cap: int) -> None:
        self.cap = cap
        self.n = 0

    def tick(self) -> None:
        self.n += 1
        if self.n > self.cap:
            raise OracleCapExceeded(f"more than {self.cap} prefixes enumerated")


class _Blocks:
    """Prefix test for consecutivity: once a set has been entered and left
    it may not be entered again."""

    def __init__(self, sets: Iterable[frozenset[str]]) -> None:
        self.sets = [s for s in sets if len(s) > 1]

    def ok(self, prefix: Sequence[str], x: str) -> bool:
        if not prefix:
            return True
        last = prefix[-1]
        for s in self.sets:
            if x in s and last not in s and any(y in s for y in prefix):
                return False
        return True


# ---------------------------------------------------------------------------
# segments
# ---------------------------------------------------------------------------


def brute_sfhvseg(instance: SegInstance, cap: int = DEFAULT_CAP, *, first_only: bool = False) -> OracleResult:
    """Every left-to-right order of the verticals whose ordered matrix has
    no cross, sorted."""
    require_valid(instance)
    counter = _Counter(cap)
    verticals = sorted(instance.verticals)
    found: list[SegWitness] = []

    def extend(prefix: list[str], rest: list[str]) -> bool:
        if not rest:
            found.append(SegWitness(tuple(prefix)))
            return first_only
        for j, v in enumerate(rest):
            counter.tick()
            prefix.append(v)
            # A cross among placed columns survives every extension.
            placed = set(prefix)
            sub = SegInstance(
                instance.horizontals,
                tuple(prefix),
                frozenset(e for e in instance.edges if e[1] in placed),
                instance.sigma_h,
            )
            if find_cross(sub, prefix) is None and extend(prefix, rest[:j] + rest[j + 1:]):
                return True
            prefix.pop()
        return False

    extend([], verticals)
    return OracleResult(bool(found), tuple(found))


# ---------------------------------------------------------------------------
# level planarity
# ---------------------------------------------------------------------------


def brute_tlp(instance: LevelInstance, cap: int = DEFAULT_CAP) -> OracleResult:
    """Per-level orders such that every constraint is consecutive and every
    two disjoint edges between adjacent levels are ordered alike."""
    require_valid(instance)
    counter = _Counter(cap)
    k = instance.num_levels
    down: dict[str, list[str]] = {v: [] for v in instance.level}
    for u, v in instance.edges:
        down[v].append(u)
    blocks = {i: _Blocks(instance.family(i)) for i in range(1, k + 1)}
    has_up = {u for u, _ in instance.edges}
    orders: dict[int, tuple[str, ...]] = {}
    # Higher levels see a level only through the order of its vertices
    # with an edge upward, so a failed such order never needs a retry.
    dead: set[tuple[int, tuple[str, ...]]] = set()

    def consistent(i: int, prefix: Sequence[str], x: str) -> bool:
        if i == 1 or not down[x]:
            return True
        pos = {v: p for p, v in enumerate(orders[i - 1])}
        for y in prefix:
            for a in down[y]:
                for b in down[x]:
                    if a != b and pos[a] > pos[b]:
                        return False
        return True

    def level(i: int) -> bool:
        if i > k:
            return True
        verts = instance.vertices_on(i)

        def place(prefix: list[str], rest: list[str]) -> bool:
            if not rest:
                key = (i, tuple(v for v in prefix if v in has_up))
                if key in dead:
                    return False
                orders[i] = tuple(prefix)
                if level(i + 1):
                    return True
                dead.add(key)
                return False
            for j, x in enumerate(rest):
                counter.tick()
                if blocks[i].ok(prefix, x) and consistent(i, prefix, x):
                    prefix.append(x)
                    if place(prefix, rest[:j] + rest[j + 1:]):
                        return True
                    prefix.pop()
            return False

        return place([], verts)

    if level(1):
        return OracleResult(True, (LevelWitness(dict(orders)),))
    return OracleResult(False)


# ---------------------------------------------------------------------------
# sequential PQ-ordering
# ---------------------------------------------------------------------------


def brute_seqpq(instance: SeqPQInstance, cap: int = DEFAULT_CAP) -> OracleResult:
    """A global order of the ground set whose restriction to every tree's
    leaves is represented by that tree."""
    require_valid(instance)
    counter = _Counter(cap)
    checks = [(t.leaves, _Blocks(pq.to_constraints(t))) for t in instance.trees]

    def fits(prefix: Sequence[str], x: str) -> bool:
        for leaves, blocks in checks:
            if x in leaves and not blocks.ok([y for y in prefix if y in leaves], x):
                return False
        return True

    def extend(prefix: list[str], rest: list[str]) -> tuple[str, ...] | None:
        if not rest:
            if all(pq.satisfies(t, prefix) for t in instance.trees):
                return tuple(prefix)
            return None
        for j, x in enumerate(rest):
            counter.tick()
            if fits(prefix, x):
                prefix.append(x)
                out = extend(prefix, rest[:j] + rest[j + 1:])
                if out is not None:
                    return out
                prefix.pop()
        return None

    order = extend([], list(instance.ground))
    if order is None:
        return OracleResult(False)
    per_tree = tuple(restrict(order, t.leaves) for t in instance.trees)
    return OracleResult(True, (OrderWitness(per_tree, order),))


def decide(instance, cap: int = DEFAULT_CAP) -> OracleResult:
    if isinstance(instance, SegInstance):
        return brute_sfhvseg(instance, cap)
    if isinstance(instance, LevelInstance):
        return brute_tlp(instance, cap)
    if isinstance(instance, SeqPQInstance):
        return brute_seqpq(instance, cap)
    raise TypeError(f"no oracle for {type(instance).__name__}")
