"""Unit-distance graphs with exact vertices and construction operators.

Vertices are exact points, deduplicated by exact equality (never by
epsilon).  Edges join points at squared distance exactly 1.  A graph is
"saturated" when its edge set contains every unit-distance pair of its
vertices; trimming operations may hand back unsaturated graphs, and the
flag records which state a graph is in.

Edge building runs a coarse floating-point prefilter over all vertex pairs
and confirms candidates in exact arithmetic.  The prefilter is conservative:
coordinates are approximated to within 1e-20 before the float evaluation, so
the computed squared distance is within ~1e-10 of the true value for any
graph of sane magnitude, far below the acceptance window.  A true unit pair
is therefore never discarded; the exact check then removes false positives.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactnum import DEFAULT_CONTEXT, FieldContext, FieldElement
from .geometry import Point, Rotation, apply, dist_sq, origin, power, reflect_x, theta

Edge = tuple[int, int]

# |d2_float - d2_exact| stays below ~64 * B^2 * 2^-52 for coordinates of
# magnitude <= B; the window must dominate that and stay well under 1/2.
_PREFILTER_WINDOW = 1e-9


def build_edges(points: list[Point]) -> set[Edge]:
    """All unordered index pairs at exact unit distance."""
    n = len(points)
    if n < 2:
        return set()
    xs = np.array([p.x.to_float() for p in points])
    ys = np.array([p.y.to_float() for p in points])
    bound = max(1.0, float(np.max(np.abs(xs))), float(np.max(np.abs(ys))))
    err = 64.0 * bound * bound * 2.0**-52
    if err * 10 > _PREFILTER_WINDOW:
        raise ValueError(f"coordinates too large for the prefilter window ({bound})")
    one = points[0].x.ctx.one
    edges: set[Edge] = set()
    for i in range(n - 1):
        d2 = (xs[i + 1 :] - xs[i]) ** 2 + (ys[i + 1 :] - ys[i]) ** 2
        for off in np.nonzero(np.abs(d2 - 1.0) <= _PREFILTER_WINDOW)[0]:
            j = i + 1 + int(off)
            if dist_sq(points[i], points[j]) == one:
                edges.add((i, j))
    return edges


class UnitDistanceGraph:
    __slots__ = ("points", "edges", "index", "saturated", "ctx")

    def __init__(
        self,
        points: list[Point],
        edges: set[Edge],
        saturated: bool,
        ctx: FieldContext,
    ):
        self.points = list(points)
        self.edges = set(edges)
        self.saturated = saturated
        self.ctx = ctx
        self.index = {p: i for i, p in enumerate(self.points)}
        if len(self.index) != len(self.points):
            raise ValueError("duplicate points")

    @classmethod
    def from_points(cls, points: list[Point], ctx: FieldContext | None = None) -> "UnitDistanceGraph":
        """Deduplicate exactly and connect every unit-distance pair."""
        if ctx is None:
            ctx = points[0].x.ctx if points else DEFAULT_CONTEXT
        unique: list[Point] = []
        seen: set[Point] = set()
        for p in points:
            if p not in seen:
                seen.add(p)
                unique.append(p)
        return cls(unique, build_edges(unique), True, ctx)

    # -- inspection --------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return len(self.edges)

    def __contains__(self, p: Point) -> bool:
        return p in self.index

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)

    def degrees(self) -> list[int]:
        out = [0] * self.n
        for a, b in self.edges:
            out[a] += 1
            out[b] += 1
        return out

    def has_origin(self) -> bool:
        return origin(self.ctx) in self.index

    def __repr__(self) -> str:
        sat = "saturated" if self.saturated else "unsaturated"
        return f"UnitDistanceGraph({self.n} vertices, {self.m} edges, {sat})"

    # -- construction operators ----------------------------------------------

    def minkowski(self, other: "UnitDistanceGraph") -> "UnitDistanceGraph":
        """Pointwise-sum graph {a + b}, deduplicated, edges rebuilt."""
        sums = [a + b for a in self.points for b in other.points]
        return UnitDistanceGraph.from_points(sums, self.ctx)

    def rotate(self, r: Rotation) -> "UnitDistanceGraph":
        """Rotate every vertex; an isometry, so edges carry over by index."""
        pts = [apply(r, p) for p in self.points]
        return UnitDistanceGraph(pts, set(self.edges), self.saturated, self.ctx)

    def union(self, other: "UnitDistanceGraph") -> "UnitDistanceGraph":
        """Deduplicated vertex union with all edges rebuilt (cross edges too)."""
        return UnitDistanceGraph.from_points(self.points + other.points, self.ctx)

    def filter_radius(self, rsq: FieldElement | int | Fraction, keep_leq: bool = True) -> "UnitDistanceGraph":
        """Keep vertices with squared origin distance <= rsq (or > rsq)."""
        if not isinstance(rsq, FieldElement):
            rsq = self.ctx.rational(rsq)
        o = origin(self.ctx)
        keep = []
        for i, p in enumerate(self.points):
            s = (dist_sq(p, o) - rsq).sign()
            if (s <= 0) == keep_leq:
                keep.append(i)
        return self.induced(keep)

    def induced(self, vertex_ids: list[int]) -> "UnitDistanceGraph":
        """Induced subgraph on the given ids (edges restricted, ids renumbered)."""
        remap = {v: i for i, v in enumerate(vertex_ids)}
        pts = [self.points[v] for v in vertex_ids]
        edges = {
            (min(remap[a], remap[b]), max(remap[a], remap[b]))
            for a, b in self.edges
            if a in remap and b in remap
        }
        if self.saturated:
            return UnitDistanceGraph(pts, edges, True, self.ctx)
        return UnitDistanceGraph(pts, edges, False, self.ctx)

    def remove_vertex(self, v: int) -> "UnitDistanceGraph":
        return self.induced([i for i in range(self.n) if i != v])

    def remove_edge(self, e: Edge) -> "UnitDistanceGraph":
        e = (min(e), max(e))
        if e not in self.edges:
            raise KeyError(f"no edge {e}")
        return UnitDistanceGraph(self.points, self.edges - {e}, False, self.ctx)

    def resaturate(self) -> "UnitDistanceGraph":
        """Restore every unit-distance edge among the current vertices."""
        return UnitDistanceGraph(self.points, build_edges(self.points), True, self.ctx)

    def validate_unit_distances(self) -> None:
        """Exact check that every edge joins points at distance exactly 1."""
        one = self.ctx.one
        for a, b in self.edges:
            if dist_sq(self.points[a], self.points[b]) != one:
                raise ValueError(f"edge ({a},{b}) is not a unit pair")


# -- built-in graphs ------------------------------------------------------------


def _unit_segment_pair(ctx: FieldContext) -> tuple[UnitDistanceGraph, UnitDistanceGraph]:
    o = origin(ctx)
    a = UnitDistanceGraph.from_points([o, Point(ctx.one, ctx.zero)], ctx)
    b = UnitDistanceGraph.from_points(
        [o, Point(ctx.rational(Fraction(1, 2)), ctx.element({3: Fraction(1, 2)}))], ctx
    )
    return a, b


@lru_cache(maxsize=None)
def moser(ctx: FieldContext = DEFAULT_CONTEXT) -> UnitDistanceGraph:
    """The Moser spindle: 7 vertices, 11 edges, chromatic number 4."""
    a, b = _unit_segment_pair(ctx)
    ab = a.minkowski(b)
    return ab.union(ab.rotate(theta(3, ctx)))


@lru_cache(maxsize=None)
def v31(ctx: FieldContext = DEFAULT_CONTEXT) -> UnitDistanceGraph:
    """Five hexagonal 7-wheels sharing the origin hub: the orbit of (1,0)
    under theta1^j theta3^k, j in 0..5 and k in {-1,-1/2,0,1/2,1}."""
    base = Point(ctx.one, ctx.zero)
    pts = [origin(ctx)]
    halves = [Fraction(-1), Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(1)]
    for j in range(6):
        rj = power(theta(1, ctx), j)
        for k in halves:
            pts.append(apply(rj.compose(power(theta(3, ctx), k)), base))
    return UnitDistanceGraph.from_points(pts, ctx)


@lru_cache(maxsize=None)
def v151(ctx: FieldContext = DEFAULT_CONTEXT) -> UnitDistanceGraph:
    """v31 (+) v31 restricted to the unit disk: 151 vertices, 510 edges."""
    g = v31(ctx)
    return g.minkowski(g).filter_radius(1, keep_leq=True)


@lru_cache(maxsize=None)
def v1939(ctx: FieldContext = DEFAULT_CONTEXT) -> UnitDistanceGraph:
    """Minkowski sum of v31 and v151: 1939 vertices."""
    return v31(ctx).minkowski(v151(ctx))


@lru_cache(maxsize=None)
def three_wheels(ctx: FieldContext = DEFAULT_CONTEXT) -> UnitDistanceGraph:
    """Hub plus three aligned hexagonal rims at radii 1, (sqrt33+3)/6 and
    (sqrt33-3)/6; the unit edges are the spokes and rim of the radius-1
    wheel plus the radial pairs between the two sqrt33 rims."""
    radii = [
        ctx.one,
        ctx.element({1: Fraction(1, 2), 33: Fraction(1, 6)}),
        ctx.element({1: Fraction(-1, 2), 33: Fraction(1, 6)}),
    ]
    pts = [origin(ctx)]
    for j in range(6):
        rj = power(theta(1, ctx), j)
        for r in radii:
            pts.append(apply(rj, Point(r, ctx.zero)))
    return UnitDistanceGraph.from_points(pts, ctx)


BUILTIN_GRAPHS = {
    "moser": moser,
    "v31": v31,
    "v151": v151,
    "v1939": v1939,
    "three_wheels": three_wheels,
}


def validate_s199(graph: UnitDistanceGraph) -> None:
    """Sanity checks for an ingested 199-vertex symmetric graph: vertex and
    edge counts, unit edges, and closure under both horizontal reflection
    and the 60-degree rotation."""
    if graph.n != 199 or graph.m != 888:
        raise ValueError(f"expected 199 vertices / 888 edges, got {graph.n}/{graph.m}")
    graph.validate_unit_distances()
    rot = theta(1, graph.ctx)
    for p in graph.points:
        if reflect_x(p) not in graph.index:
            raise ValueError(f"not closed under horizontal reflection at {p}")
        if apply(rot, p) not in graph.index:
            raise ValueError(f"not closed under 60-degree rotation at {p}")
