"""Tests for the exact gasket geometry."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from coalsim.errors import BudgetError, DomainError, ParameterError
from coalsim.gasket import (
    GasketLevelGraph,
    PlanePoint,
    TriangleId,
    VertexAddress,
    build_gasket_graph,
    containing_triangles,
    covering_triangles,
    extended_triangle,
    fold_point,
    fold_vertex,
    plane_point,
    shortest_path_distance,
    shortest_path_hops,
    vertex_label,
)


def enumerate_triangles(level, window_exponent=0):
    """Independent brute-force list of level-b triangles of the window."""
    depth = level + window_exponent
    tris = [(0, 0, 2 ** depth)]
    for _ in range(depth):
        nxt = []
        for a, b, s in tris:
            h = s // 2
            nxt.extend([(a, b, h), (a + h, b, h), (a, b + h, h)])
        tris = nxt
    # anchors are in units of the final side; rescale to units of 2**-level
    assert all(s == 1 for _, _, s in tris)
    return sorted((a, b) for a, b, _ in tris)


def test_level0_is_a_triangle():
    g = build_gasket_graph(0)
    assert g.n_vertices == 3
    assert all(len(ns) == 2 for ns in g.neighbors)


def test_level1_counts_and_degrees():
    # hand enumeration: corners (0,0),(2,0),(0,2) have degree 2,
    # midpoints (1,0),(0,1),(1,1) have degree 4, 9 edges total
    g = build_gasket_graph(1)
    assert g.n_vertices == 6
    assert sorted(g.vertices) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]
    degs = {ab: len(g.neighbors[g.index[ab]]) for ab in g.vertices}
    assert degs[(0, 0)] == degs[(2, 0)] == degs[(0, 2)] == 2
    assert degs[(1, 0)] == degs[(0, 1)] == degs[(1, 1)] == 4
    assert sum(degs.values()) == 18


@pytest.mark.parametrize("level", range(6))
def test_vertex_count_closed_form(level):
    g = build_gasket_graph(level)
    assert g.n_vertices == (3 ** (level + 1) + 3) // 2


def test_degree_law():
    for level, k in [(3, 0), (2, 1)]:
        g = build_gasket_graph(level, k)
        for i in range(g.n_vertices):
            expect = 2 if i in g.corner_indices else 4
            assert len(g.neighbors[i]) == expect


def test_budget_error_names_count():
    with pytest.raises(BudgetError, match=str(3 ** 8)):
        build_gasket_graph(8, 0, budget=3 ** 7)


def test_window_escape_vertices():
    g = build_gasket_graph(2, window_exponent=1)
    assert len(g.escape_indices) == 2
    side = 2 ** 3
    assert {g.vertices[i] for i in g.escape_indices} == {(side, 0), (0, side)}
    assert build_gasket_graph(2).escape_indices == ()


def test_containing_triangles_examples():
    # corner of G: exactly one 0-triangle
    assert containing_triangles(plane_point(0, 0), 0) == [TriangleId(0, 0, 0)]
    # midpoint of the bottom edge, shared by two 1-triangles
    two = containing_triangles(plane_point(Fraction(1, 2), 0), 1)
    assert len(two) == 2
    assert two == [TriangleId(1, 0, 0), TriangleId(1, 1, 0)]
    # interior V2 vertex off the bottom spine
    two = containing_triangles(VertexAddress(2, 1, 1), 2)
    assert len(two) == 2


def test_containing_triangles_against_enumeration():
    # every V3 vertex: compare with brute hull tests over all level-3 triangles
    g = build_gasket_graph(3)
    all_tris = [TriangleId(3, a, b) for a, b in enumerate_triangles(3)]
    for ab in g.vertices:
        p = VertexAddress(3, *ab).point()
        brute = sorted(t for t in all_tris if t.contains(p))
        assert containing_triangles(p, 3) == brute
        assert len(brute) in (1, 2)


def test_containing_triangles_domain_error():
    # interior point of the removed middle triangle
    with pytest.raises(DomainError):
        containing_triangles(plane_point(Fraction(3, 10), Fraction(3, 10)), 2)
    with pytest.raises(DomainError):
        containing_triangles(plane_point(5, 5), 0)


def test_vertex_label_examples():
    assert vertex_label(0, 0) == 0
    assert vertex_label(1, 0) == 1
    assert vertex_label(2, 0) == 2
    with pytest.raises(ParameterError):
        vertex_label(-1, 0)


@given(st.integers(0, 50), st.integers(0, 50))
def test_vertex_label_unit_triangle_corners_distinct(n1, n2):
    labels = {vertex_label(n1, n2), vertex_label(n1 + 1, n2), vertex_label(n1, n2 + 1)}
    assert labels == {0, 1, 2}


def test_fold_identity_on_unit_gasket():
    assert fold_point(plane_point(0, 0)) == plane_point(0, 0)
    g = build_gasket_graph(2)
    for ab in g.vertices:
        p = VertexAddress(2, *ab).point()
        assert fold_point(p, window_exponent=2) == p


def test_fold_far_corner():
    # the lattice point (2,0) carries label omega^2, so it maps to (1/2, sqrt3/2)
    assert fold_point(plane_point(2, 0), window_exponent=1) == plane_point(0, 1)


def test_fold_idempotent_and_contractive():
    rng = random.Random(7)
    g = build_gasket_graph(3, window_exponent=2)
    pts = [VertexAddress(3, *ab).point() for ab in g.vertices]
    sample = rng.sample(pts, 40)
    for p in sample:
        q = fold_point(p, 2)
        assert fold_point(q) == q
    for _ in range(200):
        p, q = rng.choice(pts), rng.choice(pts)
        fp, fq = fold_point(p, 2), fold_point(q, 2)
        assert fp.dist2(fq) <= p.dist2(q)


def test_fold_isometry_within_zero_triangle():
    # exact equality of squared distances for points in one 0-triangle
    rng = random.Random(11)
    g = build_gasket_graph(3, window_exponent=2)
    tri = TriangleId(0, 1, 2)
    pts = [VertexAddress(3, *ab).point() for ab in g.vertices]
    inside = [p for p in pts if tri.contains(p)]
    assert len(inside) > 5
    for _ in range(100):
        p, q = rng.choice(inside), rng.choice(inside)
        assert fold_point(p, 2).dist2(fold_point(q, 2)) == p.dist2(q)


def test_fold_vertex_maps_window_edges_onto_gasket_edges():
    level, k = 2, 1
    win = build_gasket_graph(level, k)
    fin = build_gasket_graph(level)
    for i, ns in enumerate(win.neighbors):
        fi = fold_vertex(win.address(i), k)
        for j in ns:
            fj = fold_vertex(win.address(j), k)
            assert fi != fj
            assert fin.index_of(fj) in fin.neighbors[fin.index_of(fi)]


def test_shortest_path_examples():
    g1 = build_gasket_graph(1)
    i = g1.index_of((0, 0))
    assert shortest_path_distance(g1, i, i) == 0
    # plane corners (0,0) and (1,0): two hops of length 1/2
    j = g1.index_of((2, 0))
    assert shortest_path_distance(g1, i, j) == 1


def test_shortest_path_metric_properties():
    g = build_gasket_graph(3)
    rng = random.Random(3)
    idx = list(range(g.n_vertices))
    for _ in range(40):
        x, y, z = rng.choice(idx), rng.choice(idx), rng.choice(idx)
        dxy = shortest_path_distance(g, x, y)
        dyz = shortest_path_distance(g, y, z)
        dxz = shortest_path_distance(g, x, z)
        assert dxz <= dxy + dyz


def test_metric_comparability_ratio():
    # |x-y| <= rho(x,y) <= c|x-y|; the empirical constant is reported, not pinned
    ratios = []
    for level in (2, 3):
        g = build_gasket_graph(level)
        rng = random.Random(level)
        idx = list(range(g.n_vertices))
        for _ in range(150):
            x, y = rng.choice(idx), rng.choice(idx)
            if x == y:
                continue
            rho = float(shortest_path_distance(g, x, y))
            eu = math.dist(g.xy[x], g.xy[y])
            assert rho >= eu - 1e-12
            ratios.append(rho / eu)
    assert max(ratios) < 4.0  # loose sanity headroom, not an asserted constant


def test_covering_triangles():
    assert len(covering_triangles([plane_point(0, 0)], 0)) == 1
    g1 = build_gasket_graph(1)
    pts = [VertexAddress(1, *ab).point() for ab in g1.vertices]
    cover = covering_triangles(pts, 1)
    assert 3 <= len(cover) <= 6
    assert len(cover) <= 2 * 3
    # random 50-point subset of V5 covered at level 2
    g5 = build_gasket_graph(5)
    rng = random.Random(9)
    pts = [VertexAddress(5, *ab).point() for ab in rng.sample(g5.vertices, 50)]
    assert len(covering_triangles(pts, 2)) <= 2 * 3 ** 2


def test_extended_triangle_parts():
    origin = extended_triangle(TriangleId(0, 0, 0), window_exponent=2)
    assert len(origin.parts) == 3  # base + two adjoining
    interior = extended_triangle(TriangleId(0, 1, 2), window_exponent=2)
    assert len(interior.parts) == 4  # base + three adjoining
    # the region contains its base triangle's points
    for corner in interior.base.corners():
        assert interior.contains(corner.point())


def test_graph_json_export():
    g = build_gasket_graph(1)
    d = g.to_json_dict()
    assert d["level"] == 1 and d["window_exponent"] == 0
    assert len(d["vertices"]) == 6
    assert len(d["edges"]) == 9
    assert all(i < j for i, j in d["edges"])
