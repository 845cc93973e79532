"""Tests for the exact enumeration oracle."""

from fractions import Fraction

import numpy as np
import pytest

from coalsim.errors import BudgetError, ContractError, PreconditionError
from coalsim.gasket import build_gasket_graph, VertexAddress
from coalsim.oracle import (
    DistributionTable,
    brute_collision_prob,
    circle_step_kernel,
    enumerate_coalescing_distribution,
    evolve_single_distribution,
    exchangeability_check,
    first_hit_distribution,
    folding_check,
    graph_step_kernel,
)

F = Fraction


def test_single_walker_law_triangle():
    g = build_gasket_graph(0)
    k = graph_step_kernel(g)
    d = evolve_single_distribution(k, 0, 1)
    assert d == {1: F(1, 2), 2: F(1, 2)}
    d = evolve_single_distribution(k, 0, 2)
    assert d.total() == 1
    assert d[0] == F(1, 2)


def test_coalescing_table_sums_to_one():
    g = build_gasket_graph(1)
    k = graph_step_kernel(g)
    starts = [g.index_of((0, 0)), g.index_of((2, 0)), g.index_of((0, 2))]
    table = enumerate_coalescing_distribution(k, starts, None, 3)
    assert table.total() == 1
    assert all(len(key) in (1, 2, 3) for key in table)


def test_same_start_always_one_class():
    g = build_gasket_graph(1)
    k = graph_step_kernel(g)
    table = enumerate_coalescing_distribution(k, [0, 0], None, 2)
    assert all(len(key) == 1 for key in table)
    assert table.total() == 1


def test_single_particle_table_matches_vector_evolution():
    g = build_gasket_graph(1)
    k = graph_step_kernel(g)
    table = enumerate_coalescing_distribution(k, [2], None, 3)
    single = evolve_single_distribution(k, 2, 3)
    assert table == {(s,): p for s, p in single.items()}


def test_exchangeability_two_and_three_particles():
    g = build_gasket_graph(1)
    k = graph_step_kernel(g)
    assert exchangeability_check(k, [0, 3], 3) == 0
    starts = [g.index_of((0, 0)), g.index_of((1, 0)), g.index_of((1, 1))]
    assert exchangeability_check(k, starts, 2) == 0
    # one particle: trivially zero
    assert exchangeability_check(k, [1], 2) == 0


def test_exchangeability_on_rational_circle():
    kernel = circle_step_kernel(6, {0: F(1, 2), 1: F(1, 4), -1: F(1, 4)})
    assert exchangeability_check(kernel, [0, 2, 4], 2) == 0


def test_enumeration_budget():
    g = build_gasket_graph(2)
    k = graph_step_kernel(g)
    with pytest.raises(BudgetError):
        enumerate_coalescing_distribution(k, [0, 7, 14], None, 4, budget=100)


def test_folding_check_exact():
    win = build_gasket_graph(1, window_exponent=1)
    start = win.index_of((1, 1))     # 3 hops from the far corners
    assert folding_check(win, start, 0) == 0
    assert folding_check(win, start, 1) == 0
    assert folding_check(win, start, 2) == 0
    big = build_gasket_graph(1, window_exponent=2)
    assert folding_check(big, big.index_of((1, 1)), 4) == 0


def test_folding_check_level2():
    win = build_gasket_graph(2, window_exponent=1)
    start = win.index_of((1, 1))
    assert folding_check(win, start, 4) == 0


def test_folding_check_precondition():
    win = build_gasket_graph(1, window_exponent=1)
    far = win.escape_indices[0]
    near = win.neighbors[far][0]
    with pytest.raises(PreconditionError):
        folding_check(win, near, 4)
    with pytest.raises(ContractError):
        folding_check(build_gasket_graph(1), 0, 1)


def test_brute_collision_prob_examples():
    g = build_gasket_graph(0)
    k = graph_step_kernel(g)
    assert brute_collision_prob(k, 0, 0, 0) == 1
    # two walkers on the 3-cycle, adjacent starts, one tick: they co-locate
    # only when both jump to the opposite vertex: 1/2 * 1/2
    assert brute_collision_prob(k, 0, 1, 1) == F(1, 4)


def test_brute_collision_monotone_and_symmetric():
    g = build_gasket_graph(2)
    k = graph_step_kernel(g)
    x, y = g.index_of((1, 0)), g.index_of((0, 1))
    probs = [brute_collision_prob(k, x, y, t) for t in range(4)]
    assert all(a <= b for a, b in zip(probs, probs[1:]))

    # invariance under the triangle symmetry group applied to both starts
    side = 4
    def reflect(ab):                       # swap the two axis corners
        return (ab[1], ab[0])
    def rotate(ab):                        # cycle the three corners
        return (side - ab[0] - ab[1], ab[0])
    base = brute_collision_prob(k, x, y, 3)
    for h in (reflect, rotate, lambda ab: rotate(rotate(ab))):
        hx = g.index_of(h((1, 0)))
        hy = g.index_of(h((0, 1)))
        assert brute_collision_prob(k, hx, hy, 3) == base


def test_brute_collision_on_circle():
    kernel = circle_step_kernel(4, {0: F(1, 2), 1: F(1, 4), -1: F(1, 4)})
    p1 = brute_collision_prob(kernel, 0, 2, 1)
    # collide at tick 1 iff both hold and ... enumerate: positions equal cases
    # (1,1): 1/16, (3,3): 1/16, plus (2,2) impossible, (0,0) impossible,
    # both-move-to-same-side combos: total 2/16 + (0 hold,2 hold impossible) = 1/8
    assert p1 == F(1, 8)


def test_first_hit_distribution_decimation():
    # the level-(n+1) walk watched at its first visit to another level-n
    # vertex reproduces the level-n walk's uniform neighbor law, exactly
    for n in (0, 1):
        fine = build_gasket_graph(n + 1, window_exponent=1)
        coarse_scale = 2
        coarse_points = {i for i, (a, b) in enumerate(fine.vertices)
                         if a % coarse_scale == 0 and b % coarse_scale == 0}
        # pick an interior coarse vertex (degree 4 at coarse scale)
        start = fine.index_of((2, 2))
        hit = first_hit_distribution(fine, start, coarse_points - {start})
        assert sum(hit.values()) == 1
        expected = F(1, len(hit))
        assert all(p == expected for p in hit.values())
        # targets are exactly the coarse neighbors at distance 2**-n
        for t in hit:
            ta, tb = fine.vertices[t]
            da, db = ta - 2, tb - 2
            assert da * da + da * db + db * db == coarse_scale ** 2


def test_first_hit_from_target():
    g = build_gasket_graph(1)
    assert first_hit_distribution(g, 3, [3, 4]) == {3: F(1)}


def test_distribution_table_hash_stable():
    t1 = DistributionTable({(1, 2): F(1, 2), (3,): F(1, 2)})
    t2 = DistributionTable({(3,): F(1, 2), (1, 2): F(1, 2)})
    assert t1.content_hash() == t2.content_hash()
