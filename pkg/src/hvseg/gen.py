"""Seeded instance generators.

All randomness comes from :class:`Rng`, a portable 64-bit generator fixed
by its recurrence so streams are reproducible in any language:

* seeding (SplitMix64): ``z = seed + 0x9E3779B97F4A7C15``;
  ``z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9``;
  ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``; ``state = z ^ (z >> 31)``
  (state 0 is replaced by 1);
* step (xorshift64*): ``x ^= x >> 12; x ^= x << 25; x ^= x >> 27``;
  output ``x * 0x2545F4914F6CDD1D``;

all arithmetic modulo 2**64. ``below(n)`` draws by rejection from the
largest multiple of n below 2**64.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

from . import pqtree as pq
from .core import (
    InstanceError,
    LevelInstance,
    SegInstance,
    SegWitness,
    SeqPQInstance,
    require_valid,
)

_MASK = (1 << 64) - 1
T = TypeVar("T")


class Rng:
    def __init__(self, seed: int) -> None:
        z = (seed + 0x9E3779B97F4A7C15) & _MASK
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        self.state = (z ^ (z >> 31)) or 1

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in ``lo..hi`` inclusive."""
        return lo + self.below(hi - lo + 1)

    def random(self) -> float:
        return (self.next_u64() >> 11) / float(1 << 53)

    def shuffle(self, items: list[T]) -> list[T]:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def sample(self, items: Sequence[T], m: int) -> list[T]:
        return self.shuffle(list(items))[:m]


# ---------------------------------------------------------------------------
# segment arrangements
# ---------------------------------------------------------------------------


def planted_arrangement(n_h: int, n_v: int, density: float, seed: int) -> tuple[SegInstance, SegWitness]:
    """Random arrangement together with the x-order of its verticals.

    On a grid of side N = n_h + n_v every segment sits on its own integer
    line and covers max(1, round(density * N)) consecutive integer
    positions, with endpoints half a unit beyond them, so all crossings
    are proper.
    """
    if n_h < 1 or n_v < 1:
        raise InstanceError("need at least one horizontal and one vertical")
    if not 0.0 <= density <= 1.0:
        raise InstanceError("density must lie in [0, 1]")
    rng = Rng(seed)
    n = n_h + n_v
    length = max(1, round(density * n))
    ys = rng.sample(range(1, n + 1), n_h)
    xs = rng.sample(range(1, n + 1), n_v)
    h_cover = [(s, s + length - 1) for s in (rng.between(1, n - length + 1) for _ in range(n_h))]
    v_cover = [(s, s + length - 1) for s in (rng.between(1, n - length + 1) for _ in range(n_v))]
    hs = [f"h{i + 1}" for i in range(n_h)]
    vs = [f"v{j + 1}" for j in range(n_v)]
    edges = set()
    for i, h in enumerate(hs):
        for j, v in enumerate(vs):
            if h_cover[i][0] <= xs[j] <= h_cover[i][1] and v_cover[j][0] <= ys[i] <= v_cover[j][1]:
                edges.add((h, v))
    sigma_h = tuple(h for _, h in sorted(zip(ys, hs)))
    sigma_v = tuple(v for _, v in sorted(zip(xs, vs)))
    inst = SegInstance(tuple(hs), tuple(vs), frozenset(edges), sigma_h)
    return inst, SegWitness(sigma_v)


def gen_arrangement(n_h: int, n_v: int, density: float, seed: int) -> SegInstance:
    """Yes-instance read off a random axis-parallel arrangement."""
    return planted_arrangement(n_h, n_v, density, seed)[0]


def mutate(instance: SegInstance, flips: int, seed: int) -> SegInstance:
    """Toggle ``flips`` distinct random (h, v) adjacencies."""
    if flips < 1:
        raise InstanceError("flips must be at least 1")
    cells = [(h, v) for h in instance.horizontals for v in instance.verticals]
    if flips > len(cells):
        raise InstanceError(f"cannot flip {flips} of {len(cells)} cells")
    edges = set(instance.edges)
    for cell in Rng(seed).sample(cells, flips):
        edges ^= {cell}
    out = SegInstance(instance.horizontals, instance.verticals, frozenset(edges), instance.sigma_h)
    require_valid(out)
    return out


def random_seg(n_h: int, n_v: int, p: float, seed: int) -> SegInstance:
    """Uniform random bipartite graph with edge probability ``p``."""
    rng = Rng(seed)
    hs = tuple(f"h{i + 1}" for i in range(n_h))
    vs = tuple(f"v{j + 1}" for j in range(n_v))
    edges = frozenset((h, v) for h in hs for v in vs if rng.random() < p)
    return SegInstance(hs, vs, edges, hs)


# ---------------------------------------------------------------------------
# sequential PQ-ordering
# ---------------------------------------------------------------------------


def _lifespans(rng: Rng, names: Sequence[str], k: int, max_span: int | None) -> dict[str, tuple[int, int]]:
    span = {}
    for x in names:
        a = rng.below(k)
        width = rng.below(k - a if max_span is None else min(k - a, max_span))
        span[x] = (a, a + width)
    for i in range(k):
        if not any(a <= i <= b for a, b in span.values()):
            x = names[rng.below(len(names))]
            a, b = span[x]
            span[x] = (min(a, i), max(b, i))
    return span


def gen_planted_seqpq(n: int, k: int, seed: int, *, max_constraints: int = 3) -> SeqPQInstance:
    """Yes-instance built around a hidden order of the ground set.

    Every element gets a random interval of trees; each tree's constraint
    sets are random intervals of the hidden order restricted to its leaves.
    """
    if n < 1 or k < 1:
        raise InstanceError("need n >= 1 and k >= 1")
    rng = Rng(seed)
    width = len(str(n))
    names = [f"x{i:0{width}d}" for i in range(1, n + 1)]
    hidden = rng.shuffle(list(names))
    span = _lifespans(rng, names, k, None)
    trees = []
    for i in range(k):
        live = [x for x in hidden if span[x][0] <= i <= span[x][1]]
        constraints = []
        if len(live) > 2:
            for _ in range(rng.below(max_constraints + 1)):
                a = rng.below(len(live) - 1)
                b = rng.between(a + 1, len(live) - 1)
                constraints.append(live[a:b + 1])
        tree = pq.from_constraints(live, constraints)
        assert not pq.is_null(tree)
        trees.append(tree)
    return SeqPQInstance(tuple(names), tuple(trees))


def random_seqpq(n: int, k: int, seed: int, *, max_constraints: int = 3) -> SeqPQInstance:
    """Unplanted instance: constraint sets are arbitrary subsets, so the
    answer may be either way. Unsatisfiable trees are redrawn."""
    rng = Rng(seed)
    names = [f"x{i}" for i in range(1, n + 1)]
    span = _lifespans(rng, names, k, None)
    trees = []
    for i in range(k):
        live = [x for x in names if span[x][0] <= i <= span[x][1]]
        while True:
            constraints = []
            if len(live) > 2:
                for _ in range(rng.below(max_constraints + 1)):
                    size = rng.between(2, len(live) - 1)
                    constraints.append(rng.sample(live, size))
            tree = pq.from_constraints(live, constraints)
            if not pq.is_null(tree):
                break
        trees.append(tree)
    return SeqPQInstance(tuple(names), tuple(trees))


# ---------------------------------------------------------------------------
# level graphs
# ---------------------------------------------------------------------------


def _random_laminar(rng: Rng, items: list[str], out: list[frozenset[str]] | None = None, depth: int = 0) -> list[frozenset[str]]:
    """Random laminar family over ``items`` (nested blocks of a shuffled list)."""
    if out is None:
        out = []
    if len(items) < 2 or depth > 2:
        return out
    order = rng.shuffle(list(items))
    for _ in range(rng.below(3)):
        a = rng.below(len(order) - 1)
        b = rng.between(a + 1, len(order) - 1)
        block = frozenset(order[a:b + 1])
        if block not in out and all(not (block & s) or block <= s or s <= block for s in out):
            out.append(block)
            _random_laminar(rng, sorted(block), out, depth + 1)
    return out


def random_level(n: int, k: int, p: float, seed: int) -> LevelInstance:
    """Random proper level graph on ``n`` vertices over ``k`` levels with
    edge probability ``p`` between adjacent levels and random laminar
    constraint families."""
    rng = Rng(seed)
    level = {f"u{j + 1}": rng.between(1, k) for j in range(n)}
    by_level: dict[int, list[str]] = {}
    for v, i in sorted(level.items()):
        by_level.setdefault(i, []).append(v)
    edges = set()
    for i in range(1, k):
        for a in by_level.get(i, []):
            for b in by_level.get(i + 1, []):
                if rng.random() < p:
                    edges.add((a, b))
    constraints = {}
    for i, verts in sorted(by_level.items()):
        fam = [s for s in _random_laminar(rng, verts) if len(s) >= 2]
        if fam:
            constraints[i] = frozenset(fam)
    inst = LevelInstance(level, frozenset(edges), constraints, num_levels=k)
    require_valid(inst)
    return inst
