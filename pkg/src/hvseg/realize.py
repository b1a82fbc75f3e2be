"""Geometry from witnesses: segment arrangements, level drawings, SVG.

Coordinates are exact. Segment lines sit on integer ranks and segment
ends on half-integers, so an endpoint can never lie on another segment
and every intersection is a proper crossing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .core import (
    LevelInstance,
    LevelWitness,
    SegInstance,
    WitnessError,
    check_witness,
    require_valid,
)

HALF = Fraction(1, 2)
DEFAULT_SCALE = 40


# ---------------------------------------------------------------------------
# segment arrangements
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Axis-parallel segment: ``at`` is the fixed coordinate (y for a
    horizontal, x for a vertical) and [lo, hi] the covered range."""

    name: str
    horizontal: bool
    at: Fraction
    lo: Fraction
    hi: Fraction

    def crosses(self, other: Segment) -> bool:
        if self.horizontal == other.horizontal:
            return False
        h, v = (self, other) if self.horizontal else (other, self)
        return h.lo < v.at < h.hi and v.lo < h.at < v.hi


@dataclass(frozen=True)
class SegmentArrangement:
    horizontals: tuple[Segment, ...]
    verticals: tuple[Segment, ...]
    intersections: frozenset[tuple[str, str]]

    def unwanted(self, edges: frozenset[tuple[str, str]]) -> frozenset[tuple[str, str]]:
        return self.intersections - edges

    def missing(self, edges: frozenset[tuple[str, str]]) -> frozenset[tuple[str, str]]:
        return edges - self.intersections

    def represents(self, instance: SegInstance) -> bool:
        return self.intersections == instance.edges


def realize_segments(instance: SegInstance, sigma_v: Sequence[str]) -> SegmentArrangement:
    """Place horizontal h on y = rank of h in sigma_h and vertical v on
    x = rank of v in sigma_v, each spanning half a unit beyond its extreme
    neighbors. Segments without neighbors become half-unit stubs in a
    margin band past every rank. The caller compares the resulting
    intersection set with the edges."""
    require_valid(instance)
    if sorted(sigma_v) != sorted(instance.verticals):
        raise WitnessError("sigma_v is not a permutation of the verticals")
    row = {h: i + 1 for i, h in enumerate(instance.sigma_h)}
    col = {v: j + 1 for j, v in enumerate(sigma_v)}
    h_cols: dict[str, list[int]] = {h: [] for h in instance.horizontals}
    v_rows: dict[str, list[int]] = {v: [] for v in instance.verticals}
    for h, v in instance.edges:
        h_cols[h].append(col[v])
        v_rows[v].append(row[h])
    # Work in half units so every coordinate is an exact integer.
    x_band = 2 * (len(sigma_v) + 1)
    y_band = 2 * (len(instance.sigma_h) + 1)
    h_span = {h: (2 * min(cs) - 1, 2 * max(cs) + 1) if cs else (x_band, x_band + 1) for h, cs in h_cols.items()}
    v_span = {v: (2 * min(rs) - 1, 2 * max(rs) + 1) if rs else (y_band, y_band + 1) for v, rs in v_rows.items()}
    crossing = frozenset(
        (h, v)
        for h in instance.sigma_h
        for v in sigma_v
        if h_span[h][0] < 2 * col[v] < h_span[h][1] and v_span[v][0] < 2 * row[h] < v_span[v][1]
    )
    hs = tuple(Segment(h, True, Fraction(row[h]), Fraction(h_span[h][0], 2), Fraction(h_span[h][1], 2)) for h in instance.sigma_h)
    vs = tuple(Segment(v, False, Fraction(col[v]), Fraction(v_span[v][0], 2), Fraction(v_span[v][1], 2)) for v in sigma_v)
    return SegmentArrangement(hs, vs, crossing)


# ---------------------------------------------------------------------------
# level drawings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelDrawing:
    """Vertex v sits at (position in its level's order, level); edges are
    straight (lower, upper) segments."""

    position: Mapping[str, tuple[int, int]]
    edges: tuple[tuple[str, str], ...]

    def crossings(self) -> list[tuple[tuple[str, str], tuple[str, str]]]:
        """Pairs of vertex-disjoint edges whose segments cross."""
        out = []
        by_level: dict[int, list[tuple[str, str]]] = {}
        for e in self.edges:
            by_level.setdefault(self.position[e[0]][1], []).append(e)
        for _, es in sorted(by_level.items()):
            for (a, b), (u, v) in itertools.combinations(es, 2):
                if a == u or b == v:
                    continue
                if (self.position[a][0] - self.position[u][0]) * (self.position[b][0] - self.position[v][0]) < 0:
                    out.append(((a, b), (u, v)))
        return out

    def crossing_count(self) -> int:
        return len(self.crossings())


def level_drawing(instance: LevelInstance, orders: Mapping[int, Sequence[str]]) -> LevelDrawing:
    """Straight-line drawing of arbitrary per-level orders (unchecked)."""
    position = {}
    for i in range(1, instance.num_levels + 1):
        order = orders.get(i, ())
        if sorted(order) != instance.vertices_on(i):
            raise WitnessError(f"order for level {i} is not a permutation of its vertices")
        for x, v in enumerate(order, start=1):
            position[v] = (x, i)
    return LevelDrawing(position, tuple(sorted(instance.edges)))


def realize_level_drawing(instance: LevelInstance, witness: LevelWitness) -> LevelDrawing:
    """Planar straight-line drawing of an accepted level witness."""
    result = check_witness(instance, witness)
    if not result:
        raise WitnessError(f"witness rejected: {result.detail}")
    drawing = level_drawing(instance, witness.orders)
    assert drawing.crossing_count() == 0, "accepted witness drew with crossings"
    return drawing


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


def _num(q: Fraction | int) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{float(q):.4f}".rstrip("0").rstrip(".")


def _svg(width: Fraction, height: Fraction, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_num(width)}" height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">\n'
    )
    return head + "".join(f"  {line}\n" for line in body) + "</svg>\n"


def _svg_arrangement(arr: SegmentArrangement, edges: frozenset[tuple[str, str]] | None, scale: int) -> str:
    segs = arr.horizontals + arr.verticals
    max_x = max([s.hi for s in arr.horizontals] + [s.at for s in arr.verticals] + [Fraction(1)]) + 1
    max_y = max([s.hi for s in arr.verticals] + [s.at for s in arr.horizontals] + [Fraction(1)]) + 1

    def px(x: Fraction) -> str:
        return _num(x * scale)

    def py(y: Fraction) -> str:
        return _num((max_y - y) * scale)

    body = []
    for s in segs:
        if s.horizontal:
            x1, y1, x2, y2 = s.lo, s.at, s.hi, s.at
            lx, ly, anchor = s.lo - HALF / 2, s.at, "end"
        else:
            x1, y1, x2, y2 = s.at, s.lo, s.at, s.hi
            lx, ly, anchor = s.at, s.lo - HALF / 2, "middle"
        colour = "#1f4e9c" if s.horizontal else "#9c3a1f"
        body.append(
            f'<line x1="{px(x1)}" y1="{py(y1)}" x2="{px(x2)}" y2="{py(y2)}" '
            f'stroke="{colour}" stroke-width="3" stroke-linecap="butt"/>'
        )
        body.append(
            f'<text x="{px(lx)}" y="{py(ly)}" font-family="sans-serif" font-size="{scale // 3}" '
            f'text-anchor="{anchor}" dominant-baseline="middle">{escape(s.name)}</text>'
        )
    if edges is not None:
        at_h = {s.name: s for s in arr.horizontals}
        at_v = {s.name: s for s in arr.verticals}
        for h, v in sorted(arr.unwanted(edges)):
            body.append(
                f'<circle class="unwanted" cx="{px(at_v[v].at)}" cy="{py(at_h[h].at)}" '
                f'r="{_num(Fraction(scale, 4))}" fill="none" stroke="#d00000" stroke-width="3"/>'
            )
    return _svg(max_x * scale, max_y * scale, body)


def _svg_drawing(drawing: LevelDrawing, scale: int) -> str:
    max_x = max([p[0] for p in drawing.position.values()] + [1]) + 1
    max_y = max([p[1] for p in drawing.position.values()] + [1]) + 1

    def px(x: Fraction | int) -> str:
        return _num(Fraction(x) * scale)

    def py(y: Fraction | int) -> str:
        return _num((max_y - Fraction(y)) * scale)

    body = []
    for u, v in drawing.edges:
        (x1, y1), (x2, y2) = drawing.position[u], drawing.position[v]
        body.append(f'<line x1="{px(x1)}" y1="{py(y1)}" x2="{px(x2)}" y2="{py(y2)}" stroke="#444" stroke-width="2"/>')
    for (a, b), (u, v) in drawing.crossings():
        # Crossing point of two straight edges between the same levels.
        xa, ya = drawing.position[a]
        xb, _ = drawing.position[b]
        xu, _ = drawing.position[u]
        xv, _ = drawing.position[v]
        t = Fraction(xu - xa, (xb - xa) - (xv - xu))
        cx, cy = xa + t * (xb - xa), ya + t
        body.append(
            f'<circle class="unwanted" cx="{px(cx)}" cy="{py(cy)}" r="{_num(Fraction(scale, 4))}" '
            f'fill="none" stroke="#d00000" stroke-width="3"/>'
        )
    for v, (x, y) in sorted(drawing.position.items()):
        body.append(f'<circle cx="{px(x)}" cy="{py(y)}" r="{_num(Fraction(scale, 8))}" fill="#1f4e9c"/>')
        body.append(
            f'<text x="{px(x)}" y="{py(Fraction(y) - Fraction(1, 4))}" font-family="sans-serif" '
            f'font-size="{scale // 3}" text-anchor="middle" dominant-baseline="hanging">{escape(v)}</text>'
        )
    return _svg(max_x * scale, max_y * scale, body)


def emit_svg(
    obj: SegmentArrangement | LevelDrawing,
    *,
    scale: int = DEFAULT_SCALE,
    edges: frozenset[tuple[str, str]] | None = None,
) -> str:
    """Self-contained SVG text. For an arrangement, passing the instance's
    ``edges`` circles every crossing that is not an edge; crossings of a
    level drawing are always circled."""
    if scale < 1:
        raise ValueError("scale must be a positive number of pixels per unit")
    if isinstance(obj, SegmentArrangement):
        return _svg_arrangement(obj, edges, scale)
    if isinstance(obj, LevelDrawing):
        return _svg_drawing(obj, scale)
    raise TypeError(f"cannot render {type(obj).__name__}")
