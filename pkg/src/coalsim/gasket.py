"""Exact combinatorics of level-n Sierpinski gasket graphs.

Plane points are kept in triangular-lattice basis coordinates: the pair
(u, v) stands for the point u*(1,0) + v*(1/2, sqrt(3)/2).  In this basis
every vertex of a level-n graph has coordinates that are integer multiples
of 2**-n, squared Euclidean distances are exact rationals
(du*du + du*dv + dv*dv), and vertex identity is integer equality.  No
floating point is involved in any geometric predicate.

The "window" of exponent k is the dilated triangle with corners (0,0),
(2^k, 0), (0, 2^k) in basis coordinates.  Its level-n graph agrees with the
level-n graph of the full unbounded gasket everywhere except at the two
far corners (2^k, 0) and (0, 2^k), which lose two neighbors each; those
two vertices are exposed as ``escape_indices`` so walkers touching them
can be flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .errors import BudgetError, DomainError, ParameterError

SQRT3 = math.sqrt(3.0)

#: fractal (mass) dimension and walk dimension of the gasket
MASS_DIMENSION = math.log(3.0) / math.log(2.0)
WALK_DIMENSION = math.log(5.0) / math.log(2.0)

#: decay exponent of the occupied-site count: |set at time t| ~ t**-COUNT_DECAY
COUNT_DECAY_EXPONENT = math.log(3.0) / math.log(5.0)

DEFAULT_TRIANGLE_BUDGET = 3 ** 14


@dataclass(frozen=True, order=True)
class PlanePoint:
    """Exact plane point in triangular-lattice basis coordinates."""

    u: Fraction
    v: Fraction

    def xy(self) -> tuple[float, float]:
        return (float(self.u) + float(self.v) / 2.0, float(self.v) * SQRT3 / 2.0)

    def dist2(self, other: "PlanePoint") -> Fraction:
        du = self.u - other.u
        dv = self.v - other.v
        return du * du + du * dv + dv * dv


def plane_point(u, v) -> PlanePoint:
    return PlanePoint(Fraction(u), Fraction(v))


class VertexAddress(NamedTuple):
    """Level-n vertex: the point (a, b) in basis units of 2**-level."""

    level: int
    a: int
    b: int

    def point(self) -> PlanePoint:
        s = Fraction(1, 2 ** self.level)
        return PlanePoint(self.a * s, self.b * s)

    def rescale(self, level: int) -> "VertexAddress":
        """Re-express at a finer level (coordinates multiply by 2**diff)."""
        diff = level - self.level
        if diff < 0:
            raise ParameterError("can only rescale to a finer level")
        f = 2 ** diff
        return VertexAddress(level, self.a * f, self.b * f)


class TriangleId(NamedTuple):
    """Upward triangle of side 2**-level anchored at its lower-left corner.

    Anchor coordinates are in units of 2**-level, like VertexAddress.
    """

    level: int
    a: int
    b: int

    def anchor(self) -> VertexAddress:
        return VertexAddress(self.level, self.a, self.b)

    def corners(self) -> tuple[VertexAddress, VertexAddress, VertexAddress]:
        n, a, b = self.level, self.a, self.b
        return (VertexAddress(n, a, b), VertexAddress(n, a + 1, b), VertexAddress(n, a, b + 1))

    def contains(self, p: PlanePoint) -> bool:
        """Closed-hull membership test."""
        side = Fraction(1, 2 ** self.level)
        u0 = self.a * side
        v0 = self.b * side
        return p.u >= u0 and p.v >= v0 and p.u + p.v <= u0 + v0 + side


@dataclass(frozen=True)
class ExtendedTriangleRegion:
    """A 0-triangle plus its adjoining level-1 triangles (two at the origin)."""

    base: TriangleId
    parts: tuple[TriangleId, ...]

    def contains(self, p: PlanePoint) -> bool:
        return any(t.contains(p) for t in self.parts)


class GasketLevelGraph:
    """Immutable level-n graph of the window 2**k * G.

    Vertices are sorted lexicographically by integer coordinates (units of
    2**-level); adjacency is exactly the pairs at distance 2**-level joined
    by an edge of the pre-fractal.
    """

    def __init__(self, level: int, window_exponent: int, vertices, edges):
        self.level = level
        self.window_exponent = window_exponent
        self.vertices = vertices                      # list of (a, b) int pairs, sorted
        self.index = {ab: i for i, ab in enumerate(vertices)}
        nbrs: list[list[int]] = [[] for _ in vertices]
        for i, j in edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        self.neighbors = [sorted(ns) for ns in nbrs]

        nv = len(vertices)
        self.degrees = np.array([len(ns) for ns in self.neighbors], dtype=np.int64)
        self.neighbor_table = np.full((nv, 4), -1, dtype=np.int32)
        for i, ns in enumerate(self.neighbors):
            self.neighbor_table[i, : len(ns)] = ns

        self.coords = np.array(vertices, dtype=np.int64)
        scale = 2.0 ** -level
        a = self.coords[:, 0].astype(float)
        b = self.coords[:, 1].astype(float)
        self.xy = np.column_stack(((a + b / 2.0) * scale, b * (SQRT3 / 2.0) * scale))

        side = 2 ** (level + window_exponent)
        corner_abs = [(0, 0), (side, 0), (0, side)]
        self.corner_indices = tuple(self.index[c] for c in corner_abs)
        if window_exponent > 0:
            # only the two far corners differ from the unbounded gasket graph
            self.escape_indices = tuple(self.index[c] for c in corner_abs[1:])
        else:
            self.escape_indices = ()

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def index_of(self, ab) -> int:
        if isinstance(ab, VertexAddress):
            if ab.level != self.level:
                ab = ab.rescale(self.level)
            ab = (ab.a, ab.b)
        return self.index[tuple(ab)]

    def address(self, i: int) -> VertexAddress:
        a, b = self.vertices[i]
        return VertexAddress(self.level, a, b)

    def tick_duration(self) -> float:
        return 5.0 ** -self.level

    def to_json_dict(self) -> dict:
        edges = sorted(
            (i, j)
            for i, ns in enumerate(self.neighbors)
            for j in ns
            if i < j
        )
        return {
            "level": self.level,
            "window_exponent": self.window_exponent,
            "vertices": [list(ab) for ab in self.vertices],
            "edges": [list(e) for e in edges],
        }


def build_gasket_graph(level: int, window_exponent: int = 0,
                       budget: int = DEFAULT_TRIANGLE_BUDGET) -> GasketLevelGraph:
    """Construct the level-n graph of the window 2**k * G.

    Deterministic; raises BudgetError when 3**(level+window_exponent) unit
    triangles would exceed ``budget``.
    """
    if level < 0 or window_exponent < 0:
        raise ParameterError("level and window_exponent must be non-negative")
    depth = level + window_exponent
    count = 3 ** depth
    if count > budget:
        raise BudgetError(
            f"3^{depth} = {count} unit triangles exceeds the budget of {budget}"
        )

    vertices: set[tuple[int, int]] = set()
    edges: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    stack = [(0, 0, 2 ** depth)]
    while stack:
        a, b, s = stack.pop()
        if s == 1:
            c0, c1, c2 = (a, b), (a + 1, b), (a, b + 1)
            vertices.update((c0, c1, c2))
            edges.update(((c0, c1), (c0, c2), (c1, c2)))
        else:
            h = s // 2
            stack.extend(((a, b, h), (a + h, b, h), (a, b + h, h)))

    verts = sorted(vertices)
    index = {ab: i for i, ab in enumerate(verts)}
    iedges = [(index[p], index[q]) for p, q in edges]
    return GasketLevelGraph(level, window_exponent, verts, iedges)


def containing_triangles(p, level: int, window_exponent: int = 0) -> list[TriangleId]:
    """All level-b triangles of the window whose closed hull contains p.

    Returns one triangle, or two when p is a vertex shared by two triangles.
    Raises DomainError for points outside every kept triangle (removed
    middles, or outside the window).
    """
    if isinstance(p, VertexAddress):
        p = p.point()
    if level < 0:
        raise ParameterError("triangle level must be non-negative")

    target_side = Fraction(1, 2 ** level)
    found: list[TriangleId] = []
    root_side = Fraction(2 ** window_exponent)
    stack = [(Fraction(0), Fraction(0), root_side)]
    while stack:
        u0, v0, s = stack.pop()
        if not (p.u >= u0 and p.v >= v0 and p.u + p.v <= u0 + v0 + s):
            continue
        if s == target_side:
            found.append(TriangleId(level, int(u0 / s), int(v0 / s)))
            continue
        h = s / 2
        stack.extend(((u0, v0, h), (u0 + h, v0, h), (u0, v0 + h, h)))

    if not found:
        raise DomainError(f"point ({p.u}, {p.v}) is not in any level-{level} triangle")
    found.sort(key=lambda t: (t.a, t.b))
    return found


def vertex_label(n1: int, n2: int) -> int:
    """Three-coloring exponent of the lattice vertex n1*(1,0) + n2*(1/2,sqrt3/2).

    Returns e in {0, 1, 2}; the label is the cube root of unity omega**e.
    Adjacent corners of any unit lattice triangle get distinct exponents.
    """
    if n1 < 0 or n2 < 0:
        raise ParameterError("lattice coordinates must be non-negative")
    return (n1 + 2 * n2) % 3


#: image corner of the unit triangle for each label exponent
_LABEL_CORNER = {
    0: PlanePoint(Fraction(0), Fraction(0)),
    1: PlanePoint(Fraction(1), Fraction(0)),
    2: PlanePoint(Fraction(0), Fraction(1)),
}


def fold_point(p: PlanePoint, window_exponent: int = 0) -> PlanePoint:
    """Project a window point onto the unit gasket.

    Barycentric transport on the containing 0-triangle, sending each corner
    to the unit-triangle corner with the same color label.  Restricted to a
    single 0-triangle this is an isometry; globally it is a contraction and
    it is the identity on the unit gasket itself.  When p sits on a vertex
    shared by two 0-triangles both choices give the same image; we use the
    lexicographically smallest anchor and assert the agreement.
    """
    tris = containing_triangles(p, 0, window_exponent)
    image = _fold_in_triangle(p, tris[0])
    if len(tris) > 1:
        alt = _fold_in_triangle(p, tris[1])
        assert alt == image, "folding map disagreed across the two containing triangles"
    return image


def _fold_in_triangle(p: PlanePoint, tri: TriangleId) -> PlanePoint:
    a, b = tri.a, tri.b
    lam2 = p.u - a
    lam3 = p.v - b
    lam1 = 1 - lam2 - lam3
    corners = ((a, b), (a + 1, b), (a, b + 1))
    images = [_LABEL_CORNER[vertex_label(x, y)] for x, y in corners]
    assert len({im for im in images}) == 3
    u = lam1 * images[0].u + lam2 * images[1].u + lam3 * images[2].u
    v = lam1 * images[0].v + lam2 * images[1].v + lam3 * images[2].v
    return PlanePoint(u, v)


def fold_vertex(addr: VertexAddress, window_exponent: int = 0) -> VertexAddress:
    """fold_point restricted to level-n vertices (image is again a vertex)."""
    img = fold_point(addr.point(), window_exponent)
    f = 2 ** addr.level
    a, b = img.u * f, img.v * f
    assert a.denominator == 1 and b.denominator == 1
    return VertexAddress(addr.level, int(a), int(b))


def shortest_path_hops(graph: GasketLevelGraph, source: int, target: int) -> int:
    """BFS hop count between two vertex indices."""
    if source == target:
        return 0
    seen = {source}
    frontier = [source]
    hops = 0
    while frontier:
        hops += 1
        nxt = []
        for i in frontier:
            for j in graph.neighbors[i]:
                if j == target:
                    return hops
                if j not in seen:
                    seen.add(j)
                    nxt.append(j)
        frontier = nxt
    raise DomainError("vertices are not connected")  # impossible by construction


def shortest_path_distance(graph: GasketLevelGraph, source: int, target: int) -> Fraction:
    """Graph-geodesic length (hops * 2**-level), exact."""
    return Fraction(shortest_path_hops(graph, source, target), 2 ** graph.level)


def covering_triangles(points: Iterable, level: int,
                       window_exponent: int = 0) -> set[TriangleId]:
    """Cover a finite point set by level-b triangles, one per point."""
    cover: set[TriangleId] = set()
    for p in points:
        cover.add(containing_triangles(p, level, window_exponent)[0])
    return cover


def extended_triangle(base: TriangleId, window_exponent: int = 0) -> ExtendedTriangleRegion:
    """Extended neighborhood of a 0-triangle.

    The base plus, at each corner, the adjoining level-1 triangle from the
    neighboring 0-triangle (absent at the origin corner, so the triangle
    anchored at the origin gets two adjoining parts instead of three).
    """
    if base.level != 0:
        raise ParameterError("extended triangles are defined for 0-triangles")
    adjoining: list[TriangleId] = []
    for corner in base.corners():
        for t in containing_triangles(corner.point(), 1, window_exponent):
            inside = (t.a >= 2 * base.a and t.b >= 2 * base.b
                      and t.a + t.b + 1 <= 2 * (base.a + base.b) + 2)
            if not inside and t not in adjoining:
                adjoining.append(t)
    assert len(adjoining) in (2, 3)
    return ExtendedTriangleRegion(base, (base, *adjoining))
