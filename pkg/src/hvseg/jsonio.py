"""JSON form of instances and witnesses.

Every document carries a ``"problem"`` tag: ``sfhvseg``, ``tlp``,
``seqpq`` or ``simpq``. Field names:

* sfhvseg: ``horizontals``, ``verticals``, ``edges`` (``[h, v]`` pairs),
  ``sigma_h``, optional ``sigma_v``;
* tlp: ``levels`` (``{"vertex", "level"}`` objects), ``level_edges``
  (``[lower, upper]`` pairs), ``constraints`` (level -> forest of nested
  arrays, each array standing for the set of vertices below it), optional
  ``num_levels``;
* seqpq: ``ground``, ``trees`` (PQ-tree node objects);
* simpq: ``trees``, ``arcs`` (``{"source", "target", "map"}``).

Witnesses use the same tag plus ``sigma_v`` (sfhvseg), ``orders`` (tlp,
level -> order) or ``per_tree`` and ``global`` (seqpq).
"""

from __future__ import annotations

import json
from typing import Any

from . import pqtree as pq
from .core import (
    Instance,
    InstanceError,
    LevelInstance,
    LevelWitness,
    OrderWitness,
    SegInstance,
    SegWitness,
    SeqPQInstance,
    Witness,
)
from .reduce import Arc, SimPQInstance

PROBLEMS = ("sfhvseg", "tlp", "seqpq", "simpq")


class FormatError(ValueError):
    """A document does not follow the JSON schema."""


def problem_of(obj: Any) -> str:
    if isinstance(obj, (SegInstance, SegWitness)):
        return "sfhvseg"
    if isinstance(obj, (LevelInstance, LevelWitness)):
        return "tlp"
    if isinstance(obj, (SeqPQInstance, OrderWitness)):
        return "seqpq"
    if isinstance(obj, SimPQInstance):
        return "simpq"
    raise TypeError(f"no JSON form for {type(obj).__name__}")


# ---------------------------------------------------------------------------
# laminar families as nested arrays
# ---------------------------------------------------------------------------


def _forest(family: frozenset[frozenset[str]]) -> list:
    sets = sorted(family, key=lambda s: (-len(s), sorted(s)))
    children: dict[frozenset[str] | None, list[frozenset[str]]] = {None: []}
    for s in sets:
        parent = None
        for t in sets:
            if len(t) > len(s) and s <= t and (parent is None or len(t) < len(parent)):
                parent = t
        children.setdefault(parent, []).append(s)
        children.setdefault(s, [])

    def node(s: frozenset[str]) -> list:
        kids = children[s]
        covered = frozenset().union(*kids) if kids else frozenset()
        items: list = [node(k) for k in kids]
        items.extend(sorted(s - covered))
        return items

    return [node(s) for s in children[None]]


def _family(forest: Any) -> frozenset[frozenset[str]]:
    out: set[frozenset[str]] = set()

    def walk(item: Any) -> frozenset[str]:
        if isinstance(item, str):
            return frozenset([item])
        if not isinstance(item, list):
            raise FormatError("constraint forests hold strings and nested arrays only")
        leaves = frozenset().union(*(walk(x) for x in item)) if item else frozenset()
        if not leaves:
            raise FormatError("empty constraint set")
        out.add(leaves)
        return leaves

    if not isinstance(forest, list):
        raise FormatError("a level's constraints must be an array")
    for item in forest:
        walk(item)
    return frozenset(out)


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------


def instance_to_dict(instance: Instance | SimPQInstance) -> dict:
    tag = problem_of(instance)
    if isinstance(instance, SegInstance):
        out = {
            "problem": tag,
            "horizontals": list(instance.horizontals),
            "verticals": list(instance.verticals),
            "edges": [list(e) for e in sorted(instance.edges)],
            "sigma_h": list(instance.sigma_h),
        }
        if instance.sigma_v is not None:
            out["sigma_v"] = list(instance.sigma_v)
        return out
    if isinstance(instance, LevelInstance):
        return {
            "problem": tag,
            "levels": [{"vertex": v, "level": lv} for v, lv in sorted(instance.level.items())],
            "level_edges": [list(e) for e in sorted(instance.edges)],
            "constraints": {str(i): _forest(f) for i, f in sorted(instance.constraints.items())},
            "num_levels": instance.num_levels,
        }
    if isinstance(instance, SeqPQInstance):
        return {"problem": tag, "ground": list(instance.ground), "trees": [pq.to_json(t) for t in instance.trees]}
    return {
        "problem": tag,
        "trees": [pq.to_json(t) for t in instance.trees],
        "arcs": [
            {"source": a.source, "target": a.target, "map": dict(sorted(a.mapping.items()))}
            for a in instance.arcs
        ],
    }


def witness_to_dict(witness: Witness) -> dict:
    tag = problem_of(witness)
    if isinstance(witness, SegWitness):
        return {"problem": tag, "sigma_v": list(witness.sigma_v)}
    if isinstance(witness, LevelWitness):
        return {"problem": tag, "orders": {str(i): list(o) for i, o in sorted(witness.orders.items())}}
    return {"problem": tag, "per_tree": [list(o) for o in witness.per_tree], "global": list(witness.global_order)}


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------


def _strings(data: dict, key: str, *, optional: bool = False) -> tuple[str, ...] | None:
    if key not in data:
        if optional:
            return None
        raise FormatError(f"missing field {key!r}")
    value = data[key]
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise FormatError(f"field {key!r} must be an array of strings")
    return tuple(value)


def _pairs(data: dict, key: str) -> frozenset[tuple[str, str]]:
    value = data.get(key)
    if not isinstance(value, list):
        raise FormatError(f"field {key!r} must be an array of pairs")
    out = set()
    for e in value:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise FormatError(f"field {key!r} must hold two-element string arrays")
        out.add((e[0], e[1]))
    return frozenset(out)


def _tag(data: Any, problem: str | None) -> str:
    if not isinstance(data, dict):
        raise FormatError("document must be a JSON object")
    tag = problem or data.get("problem")
    if tag not in PROBLEMS:
        raise FormatError(f"unknown or missing problem tag {tag!r}")
    return tag


def instance_from_dict(data: Any, problem: str | None = None) -> Instance | SimPQInstance:
    """Decode an instance; ``problem`` overrides the document's tag."""
    tag = _tag(data, problem)
    try:
        if tag == "sfhvseg":
            return SegInstance(
                _strings(data, "horizontals"),
                _strings(data, "verticals"),
                _pairs(data, "edges"),
                _strings(data, "sigma_h"),
                _strings(data, "sigma_v", optional=True),
            )
        if tag == "tlp":
            levels = data.get("levels")
            if not isinstance(levels, list):
                raise FormatError("field 'levels' must be an array")
            level = {}
            for item in levels:
                if not (isinstance(item, dict) and isinstance(item.get("vertex"), str)
                        and isinstance(item.get("level"), int) and not isinstance(item.get("level"), bool)):
                    raise FormatError("levels entries need a string 'vertex' and an integer 'level'")
                if item["vertex"] in level:
                    raise FormatError(f"vertex {item['vertex']!r} listed twice")
                level[item["vertex"]] = item["level"]
            raw = data.get("constraints", {})
            if not isinstance(raw, dict):
                raise FormatError("field 'constraints' must map levels to forests")
            constraints = {}
            for key, forest in raw.items():
                try:
                    i = int(key)
                except ValueError as exc:
                    raise FormatError(f"constraint level {key!r} is not an integer") from exc
                constraints[i] = _family(forest)
            num = data.get("num_levels")
            if num is not None and (not isinstance(num, int) or isinstance(num, bool)):
                raise FormatError("field 'num_levels' must be an integer")
            return LevelInstance(level, _pairs(data, "level_edges"), constraints, num)
        if tag == "seqpq":
            trees = data.get("trees")
            if not isinstance(trees, list):
                raise FormatError("field 'trees' must be an array")
            return SeqPQInstance(_strings(data, "ground"), tuple(pq.from_json(t) for t in trees))
        trees = data.get("trees")
        arcs = data.get("arcs")
        if not isinstance(trees, list) or not isinstance(arcs, list):
            raise FormatError("simpq needs 'trees' and 'arcs' arrays")
        decoded = []
        for a in arcs:
            if not (isinstance(a, dict) and isinstance(a.get("map"), dict)):
                raise FormatError("arcs need 'source', 'target' and a 'map' object")
            decoded.append(Arc(int(a["source"]), int(a["target"]), dict(a["map"])))
        return SimPQInstance(tuple(pq.from_json(t) for t in trees), tuple(decoded))
    except (pq.PQTreeError, InstanceError, KeyError, TypeError) as exc:
        raise FormatError(str(exc)) from exc


def witness_from_dict(data: Any, problem: str | None = None) -> Witness:
    tag = _tag(data, problem)
    if tag == "sfhvseg":
        return SegWitness(_strings(data, "sigma_v"))
    if tag == "tlp":
        orders = data.get("orders")
        if not isinstance(orders, dict):
            raise FormatError("field 'orders' must map levels to arrays")
        out = {}
        for key, order in orders.items():
            if not isinstance(order, list) or not all(isinstance(x, str) for x in order):
                raise FormatError(f"order for level {key!r} must be an array of strings")
            try:
                out[int(key)] = tuple(order)
            except ValueError as exc:
                raise FormatError(f"level {key!r} is not an integer") from exc
        return LevelWitness(out)
    if tag == "seqpq":
        per = data.get("per_tree")
        if not isinstance(per, list) or not all(isinstance(o, list) for o in per):
            raise FormatError("field 'per_tree' must be an array of arrays")
        return OrderWitness(tuple(tuple(o) for o in per), _strings(data, "global"))
    raise FormatError("simpq instances have no witness format")


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
