"""PQ-trees over string leaves.

Trees are immutable and always kept in canonical form: no unary inner
nodes, no Q-node with two children (that is a P-node), P-node children
sorted by their smallest leaf, and Q-nodes oriented so that the first
child's smallest leaf is below the last child's. Structural equality is
therefore equality of represented order families.

Reduction follows the bottom-up template idea of Booth and Lueker but is
written recursively over immutable nodes; it costs O(n) per constraint,
which is plenty at the sizes this package targets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union


class PQTreeError(ValueError):
    """Raised on malformed trees or invalid arguments to tree operations."""


@dataclass(frozen=True)
class Leaf:
    label: str

    @cached_property
    def leaves(self) -> frozenset[str]:
        return frozenset((self.label,))

    @property
    def min_leaf(self) -> str:
        return self.label

    def __str__(self) -> str:
        return self.label


def _check_children(children: tuple, minimum: int, kind: str) -> None:
    if len(children) < minimum:
        raise PQTreeError(f"{kind}-node needs at least {minimum} children, got {len(children)}")
    seen: set[str] = set()
    for c in children:
        if not isinstance(c, (Leaf, PNode, QNode)):
            raise PQTreeError(f"invalid child {c!r}")
        if seen & c.leaves:
            raise PQTreeError(f"duplicate leaves {sorted(seen & c.leaves)}")
        seen |= c.leaves


@dataclass(frozen=True)
class PNode:
    children: tuple

    def __post_init__(self) -> None:
        children = tuple(self.children)
        _check_children(children, 2, "P")
        object.__setattr__(self, "children", tuple(sorted(children, key=lambda c: c.min_leaf)))

    @cached_property
    def leaves(self) -> frozenset[str]:
        return frozenset().union(*(c.leaves for c in self.children))

    @property
    def min_leaf(self) -> str:
        return self.children[0].min_leaf

    def __str__(self) -> str:
        return "P(" + ", ".join(map(str, self.children)) + ")"


@dataclass(frozen=True)
class QNode:
    children: tuple

    def __post_init__(self) -> None:
        children = tuple(self.children)
        _check_children(children, 3, "Q")
        if children[-1].min_leaf < children[0].min_leaf:
            children = children[::-1]
        object.__setattr__(self, "children", children)

    @cached_property
    def leaves(self) -> frozenset[str]:
        return frozenset().union(*(c.leaves for c in self.children))

    @cached_property
    def min_leaf(self) -> str:
        return min(c.min_leaf for c in self.children)

    def __str__(self) -> str:
        return "Q[" + ", ".join(map(str, self.children)) + "]"


@dataclass(frozen=True)
class NullTree:
    """The tree representing no order at all."""

    leaves: frozenset = field(default=frozenset(), init=False)

    def __str__(self) -> str:
        return "NULL"


NULL_TREE = NullTree()

Node = Union[Leaf, PNode, QNode]
PQTree = Union[Leaf, PNode, QNode, NullTree]


def is_null(tree: PQTree) -> bool:
    return isinstance(tree, NullTree)


def make_p(children: Sequence[Node]) -> Node:
    """Group ``children`` under a P-node, collapsing a single child."""
    children = tuple(children)
    if len(children) == 1:
        return children[0]
    return PNode(children)


def make_q(children: Sequence[Node]) -> Node:
    """Chain ``children`` under a Q-node; two children become a P-node."""
    children = tuple(children)
    if len(children) == 1:
        return children[0]
    if len(children) == 2:
        return PNode(children)
    return QNode(children)


def leaves(tree: PQTree) -> frozenset[str]:
    return tree.leaves


def pretty(tree: PQTree) -> str:
    return str(tree)


def universal(labels: Iterable[str]) -> Node:
    """The tree over ``labels`` that permits every order."""
    labels = sorted(set(labels))
    if not labels:
        raise PQTreeError("universal tree needs at least one leaf")
    return make_p([Leaf(x) for x in labels])


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------

_EMPTY, _FULL, _PARTIAL = 0, 1, 2


def _label(node: Node, s: frozenset[str]) -> int:
    k = len(node.leaves & s)
    if k == 0:
        return _EMPTY
    if k == len(node.leaves):
        return _FULL
    return _PARTIAL


def _partial_chain(node: Node, s: frozenset[str]) -> list[Node] | None:
    """Rewrite a partial non-root node as a chain running from its empty
    side to its full side, or None if the full leaves cannot sit at one end."""
    if isinstance(node, PNode):
        empty, full, partial = [], [], []
        for c in node.children:
            (empty, full, partial)[_label(c, s)].append(c)
        if len(partial) > 1:
            return None
        chain: list[Node] = []
        if empty:
            chain.append(make_p(empty))
        if partial:
            sub = _partial_chain(partial[0], s)
            if sub is None:
                return None
            chain.extend(sub)
        if full:
            chain.append(make_p(full))
        return chain

    assert isinstance(node, QNode)
    labels = [_label(c, s) for c in node.children]
    for seq, labs in ((node.children, labels), (node.children[::-1], labels[::-1])):
        if _is_empty_then_full(labs):
            chain = []
            for c, lab in zip(seq, labs):
                if lab == _PARTIAL:
                    sub = _partial_chain(c, s)
                    if sub is None:
                        return None
                    chain.extend(sub)
                else:
                    chain.append(c)
            return chain
    return None


def _is_empty_then_full(labels: list[int]) -> bool:
    # pattern EMPTY* PARTIAL? FULL*
    phase = 0
    for lab in labels:
        if lab == _EMPTY:
            if phase != 0:
                return False
        elif lab == _PARTIAL:
            if phase != 0:
                return False
            phase = 1
        else:
            phase = 1
    return True


def _reduce_root(node: Node, s: frozenset[str]) -> PQTree:
    if isinstance(node, PNode):
        empty, full, partial = [], [], []
        for c in node.children:
            (empty, full, partial)[_label(c, s)].append(c)
        if len(partial) > 2:
            return NULL_TREE
        if not partial:
            return make_p(empty + [make_p(full)])
        mid = _partial_chain(partial[0], s)
        if mid is None:
            return NULL_TREE
        if full:
            mid.append(make_p(full))
        if len(partial) == 2:
            other = _partial_chain(partial[1], s)
            if other is None:
                return NULL_TREE
            mid.extend(reversed(other))
        chain = make_q(mid)
        return make_p(empty + [chain]) if empty else chain

    assert isinstance(node, QNode)
    labels = [_label(c, s) for c in node.children]
    busy = [i for i, lab in enumerate(labels) if lab != _EMPTY]
    first, last = busy[0], busy[-1]
    if any(labels[i] != _FULL for i in range(first + 1, last)):
        return NULL_TREE
    out: list[Node] = list(node.children[:first])
    for i in range(first, last + 1):
        c = node.children[i]
        if labels[i] == _PARTIAL:
            sub = _partial_chain(c, s)
            if sub is None:
                return NULL_TREE
            out.extend(sub if i == first else reversed(sub))
        else:
            out.append(c)
    out.extend(node.children[last + 1:])
    return make_q(out)


def _reduce_at(node: Node, s: frozenset[str]) -> PQTree:
    if not isinstance(node, Leaf):
        for i, c in enumerate(node.children):
            if s <= c.leaves:
                if s == c.leaves:
                    return node
                sub = _reduce_at(c, s)
                if is_null(sub):
                    return NULL_TREE
                children = node.children[:i] + (sub,) + node.children[i + 1:]
                return PNode(children) if isinstance(node, PNode) else QNode(children)
    return _reduce_root(node, s)


def reduce(tree: PQTree, subset: Iterable[str]) -> PQTree:
    """Restrict ``tree`` to the orders in which ``subset`` is consecutive."""
    if is_null(tree):
        raise PQTreeError("cannot reduce the null tree")
    s = frozenset(subset)
    if not s <= tree.leaves:
        raise PQTreeError(f"constraint {sorted(s - tree.leaves)} not among the leaves")
    if len(s) <= 1 or s == tree.leaves:
        return tree
    return _reduce_at(tree, s)


def from_constraints(ground: Iterable[str], constraints: Iterable[Iterable[str]]) -> PQTree:
    """PQ-tree over ``ground`` representing exactly the orders in which
    every constraint set is consecutive; NULL_TREE if there is none."""
    tree: PQTree = universal(ground)
    for c in constraints:
        tree = reduce(tree, c)
        if is_null(tree):
            return NULL_TREE
    return tree


def intersect(tree: PQTree, other: PQTree) -> PQTree:
    """Orders represented by both trees (same leaf set required)."""
    if is_null(tree) or is_null(other):
        return NULL_TREE
    if tree.leaves != other.leaves:
        raise PQTreeError("intersect needs identical leaf sets")
    for c in to_constraints(other):
        tree = reduce(tree, c)
        if is_null(tree):
            break
    return tree


# ---------------------------------------------------------------------------
# semantics
# ---------------------------------------------------------------------------


def _span(node: Node, pos: dict[str, int]) -> tuple[int, int] | None:
    if isinstance(node, Leaf):
        p = pos[node.label]
        return p, p
    spans = []
    for c in node.children:
        sp = _span(c, pos)
        if sp is None:
            return None
        spans.append(sp)
    lo = min(a for a, _ in spans)
    hi = max(b for _, b in spans)
    if hi - lo + 1 != len(node.leaves):
        return None
    if isinstance(node, QNode):
        starts = [a for a, _ in spans]
        if starts != sorted(starts) and starts != sorted(starts, reverse=True):
            return None
    return lo, hi


def represents(tree: PQTree, order: Sequence[str]) -> bool:
    """True iff ``order`` (a permutation of the leaves) is represented."""
    if is_null(tree):
        if order:
            raise PQTreeError("order given for the null tree")
        return False
    if len(order) != len(tree.leaves) or set(order) != tree.leaves:
        raise PQTreeError("order is not a permutation of the tree's leaves")
    pos = {x: i for i, x in enumerate(order)}
    return _span(tree, pos) is not None


def satisfies(tree: PQTree, order: Sequence[str]) -> bool:
    """True iff ``order``, restricted to the tree's leaves, is represented."""
    if is_null(tree):
        return False
    restricted = [x for x in order if x in tree.leaves]
    if len(restricted) != len(tree.leaves):
        raise PQTreeError("order does not cover the tree's leaves")
    return represents(tree, restricted)


def count_orders(tree: PQTree) -> int:
    if is_null(tree):
        return 0
    if isinstance(tree, Leaf):
        return 1
    sub = math.prod(count_orders(c) for c in tree.children)
    if isinstance(tree, PNode):
        return sub * math.factorial(len(tree.children))
    return sub * 2


def _orders(node: Node) -> Iterator[tuple[str, ...]]:
    if isinstance(node, Leaf):
        yield (node.label,)
        return
    if isinstance(node, PNode):
        arrangements: Iterable[tuple] = itertools.permutations(node.children)
    else:
        arrangements = (node.children, node.children[::-1])
    for arrangement in arrangements:
        for parts in itertools.product(*(list(_orders(c)) for c in arrangement)):
            yield tuple(itertools.chain.from_iterable(parts))


def enumerate_orders(tree: PQTree, cap: int = 100_000) -> list[tuple[str, ...]]:
    """All represented orders, sorted; raises if there are more than ``cap``."""
    n = count_orders(tree)
    if n > cap:
        raise PQTreeError(f"tree represents {n} orders, more than cap={cap}")
    if n == 0:
        return []
    return sorted(_orders(tree))


def any_order(tree: PQTree) -> tuple[str, ...]:
    """One represented order (the stored child order)."""
    if is_null(tree):
        raise PQTreeError("the null tree represents no order")
    if isinstance(tree, Leaf):
        return (tree.label,)
    return tuple(itertools.chain.from_iterable(any_order(c) for c in tree.children))


def order_extending(tree: PQTree, partial: Sequence[str]) -> tuple[str, ...] | None:
    """A represented order whose restriction to ``partial``'s elements is
    exactly ``partial``; None if the tree allows no such order."""
    if is_null(tree):
        return None
    rank = {x: i for i, x in enumerate(partial)}
    if not set(rank) <= tree.leaves:
        raise PQTreeError("partial order mentions foreign leaves")
    arranged = _arrange(tree, rank)
    if arranged is None:
        return None
    anchored = [x for x in arranged if x in rank]
    return arranged if anchored == list(partial) else None


def _arrange(node: Node, rank: dict[str, int]) -> tuple[str, ...] | None:
    if isinstance(node, Leaf):
        return (node.label,)
    parts = []
    for c in node.children:
        sub = _arrange(c, rank)
        if sub is None:
            return None
        key = min((rank[x] for x in sub if x in rank), default=None)
        parts.append((key, sub))
    if isinstance(node, PNode):
        anchored = sorted((p for p in parts if p[0] is not None), key=lambda p: p[0])
        free = [p for p in parts if p[0] is None]
        parts = anchored + free
    else:
        keys = [k for k, _ in parts if k is not None]
        if keys != sorted(keys):
            if keys == sorted(keys, reverse=True):
                parts = parts[::-1]
            else:
                return None
    return tuple(itertools.chain.from_iterable(sub for _, sub in parts))


# ---------------------------------------------------------------------------
# structural operations
# ---------------------------------------------------------------------------


def _project(node: Node, keep: frozenset[str]) -> Node | None:
    if isinstance(node, Leaf):
        return node if node.label in keep else None
    if node.leaves <= keep:
        return node
    kids = [k for k in (_project(c, keep) for c in node.children) if k is not None]
    if not kids:
        return None
    if isinstance(node, PNode):
        return make_p(kids)
    return make_q(kids)


def project(tree: PQTree, keep: Iterable[str]) -> PQTree:
    """Tree representing the restrictions of the represented orders to ``keep``."""
    keep = frozenset(keep)
    if not keep:
        raise PQTreeError("projection onto the empty set")
    if is_null(tree):
        return NULL_TREE
    if not keep <= tree.leaves:
        raise PQTreeError(f"cannot keep foreign leaves {sorted(keep - tree.leaves)}")
    out = _project(tree, keep)
    assert out is not None
    return out


def _inner_nodes(node: Node) -> Iterator[Node]:
    if isinstance(node, Leaf):
        return
    yield node
    for c in node.children:
        yield from _inner_nodes(c)


def to_constraints(tree: PQTree) -> list[frozenset[str]]:
    """Consecutivity constraints whose PQ-tree is ``tree``: every inner
    node's leaf set, plus the union of each adjacent child pair of a Q-node."""
    if is_null(tree):
        raise PQTreeError("the null tree has no constraint family")
    out: list[frozenset[str]] = []
    seen: set[frozenset[str]] = set()

    def add(s: frozenset[str]) -> None:
        if s not in seen:
            seen.add(s)
            out.append(s)

    for node in _inner_nodes(tree):
        add(node.leaves)
        if isinstance(node, QNode):
            for a, b in zip(node.children, node.children[1:]):
                add(a.leaves | b.leaves)
    return out


def laminar_split_sets(tree: PQTree) -> tuple[list[frozenset[str]], list[frozenset[str]]]:
    """The two laminar constraint families behind :func:`laminar_split`.

    P-node leaf sets go to the first family; the adjacent-pair unions of
    each Q-node alternate between the two, starting with the first.
    """
    if is_null(tree):
        raise PQTreeError("cannot split the null tree")
    first: list[frozenset[str]] = []
    second: list[frozenset[str]] = []
    for node in _inner_nodes(tree):
        if isinstance(node, PNode):
            first.append(node.leaves)
        else:
            for j, (a, b) in enumerate(zip(node.children, node.children[1:])):
                (first if j % 2 == 0 else second).append(a.leaves | b.leaves)
    return first, second


def laminar_split(tree: PQTree) -> tuple[PQTree, PQTree]:
    """Two laminar PQ-trees over the same leaves whose common orders are
    exactly the orders of ``tree``."""
    first, second = laminar_split_sets(tree)
    return from_constraints(tree.leaves, first), from_constraints(tree.leaves, second)


def is_laminar_family(sets: Iterable[Iterable[str]]) -> bool:
    sets = [frozenset(s) for s in sets]
    for a, b in itertools.combinations(sets, 2):
        if a & b and not (a <= b or b <= a):
            return False
    return True


def is_laminar_tree(tree: PQTree) -> bool:
    """A tree encodes a laminar family iff it has no Q-node."""
    return not is_null(tree) and not any(isinstance(n, QNode) for n in _inner_nodes(tree))


# ---------------------------------------------------------------------------
# JSON encoding
# ---------------------------------------------------------------------------


def to_json(tree: PQTree) -> dict:
    if is_null(tree):
        return {"type": "null"}
    if isinstance(tree, Leaf):
        return {"type": "leaf", "leaf": tree.label}
    return {
        "type": "P" if isinstance(tree, PNode) else "Q",
        "children": [to_json(c) for c in tree.children],
    }


def from_json(data: dict) -> PQTree:
    try:
        kind = data["type"]
        if kind == "null":
            return NULL_TREE
        if kind == "leaf":
            label = data["leaf"]
            if not isinstance(label, str):
                raise PQTreeError("leaf ids must be strings")
            return Leaf(label)
        children = [from_json(c) for c in data["children"]]
    except (KeyError, TypeError) as exc:
        raise PQTreeError(f"malformed PQ-tree JSON: {exc}") from exc
    if any(is_null(c) for c in children):
        raise PQTreeError("null tree cannot be a child")
    if kind == "P":
        return make_p(children)
    if kind == "Q":
        return make_q(children)
    raise PQTreeError(f"unknown node type {kind!r}")
