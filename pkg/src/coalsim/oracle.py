"""Exhaustive rational-arithmetic verification of tiny systems.

Everything here is exact: distributions are dicts of Fractions that sum to
exactly 1, and the module's headline checks (ranking exchangeability, the
folding projection, trace decimation) are asserted as equalities, not
approximations.  Enumeration works on tick-synchronized distributions over
system states (matrix powering), never on path-by-path listing.
"""

from __future__ import annotations

import hashlib
import itertools
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .errors import BudgetError, ContractError, PreconditionError
from .gasket import GasketLevelGraph, build_gasket_graph, fold_vertex, shortest_path_hops

DEFAULT_ENUM_BUDGET = 10 ** 7

Kernel = Callable[[object], Sequence[tuple[object, Fraction]]]


class DistributionTable(dict):
    """Exact distribution: canonical outcome -> Fraction probability."""

    def total(self) -> Fraction:
        return sum(self.values(), Fraction(0))

    def tv(self, other: "DistributionTable") -> Fraction:
        keys = set(self) | set(other)
        z = Fraction(0)
        return sum((abs(self.get(k, z) - other.get(k, z)) for k in keys), z) / 2

    def content_hash(self) -> str:
        blob = repr(sorted(self.items())).encode()
        return hashlib.sha256(blob).hexdigest()


def graph_step_kernel(graph: GasketLevelGraph) -> Kernel:
    """Natural-walk kernel: uniform over the neighbors of a vertex index."""
    table = [
        [(j, Fraction(1, len(ns))) for j in ns]
        for ns in graph.neighbors
    ]
    return lambda s: table[s]


def circle_step_kernel(circumference: int, jump_weights: dict[int, Fraction]) -> Kernel:
    """Rational step kernel on Z_L for oracle-sized circles."""
    total = sum(jump_weights.values(), Fraction(0))
    if total <= 0:
        raise ContractError("jump weights must have positive total mass")
    moves = [(int(j), Fraction(w, total)) for j, w in sorted(jump_weights.items())]
    return lambda s: [((s + j) % circumference, p) for j, p in moves]


def evolve_single_distribution(kernel: Kernel, start, ticks: int,
                               budget: int = DEFAULT_ENUM_BUDGET) -> DistributionTable:
    """Exact law of one walker after the given number of ticks."""
    dist = DistributionTable({start: Fraction(1)})
    for _ in range(ticks):
        nxt = DistributionTable()
        work = 0
        for s, p in dist.items():
            for t, q in kernel(s):
                work += 1
                nxt[t] = nxt.get(t, Fraction(0)) + p * q
        if work > budget:
            raise BudgetError(f"single-walker enumeration exceeded budget {budget}")
        dist = nxt
    return dist


def _merge_state(live: Sequence[tuple[int, object]], rank_of: Sequence[int]):
    """Merge co-located representatives into the one of minimal rank."""
    groups: dict[object, list[int]] = {}
    for rep, loc in live:
        groups.setdefault(loc, []).append(rep)
    out = []
    for loc, reps in groups.items():
        out.append((min(reps, key=lambda r: rank_of[r]), loc))
    return tuple(sorted(out))


def enumerate_coalescing_distribution(kernel: Kernel, starts: Sequence,
                                      ranking: Optional[Sequence[int]] = None,
                                      ticks: int = 1,
                                      budget: int = DEFAULT_ENUM_BUDGET) -> DistributionTable:
    """Exact law of the sorted tuple of final class locations.

    State = tuple of (representative particle, location) for live classes;
    absorbed particles never influence the future, so they are dropped.
    """
    n = len(starts)
    order = list(ranking) if ranking is not None else list(range(n))
    if sorted(order) != list(range(n)):
        raise ContractError("ranking must be a permutation of the particle indices")
    rank_of = [0] * n
    for pos, p in enumerate(order):
        rank_of[p] = pos

    init = _merge_state(list(enumerate(starts)), rank_of)
    dist: dict[tuple, Fraction] = {init: Fraction(1)}
    for _ in range(ticks):
        nxt: dict[tuple, Fraction] = {}
        work = 0
        for state, p in dist.items():
            reps = [r for r, _ in state]
            move_sets = [kernel(loc) for _, loc in state]
            for combo in itertools.product(*move_sets):
                work += 1
                q = p
                for _, mp in combo:
                    q *= mp
                new_live = [(r, loc) for r, (loc, _) in zip(reps, combo)]
                new_state = _merge_state(new_live, rank_of)
                nxt[new_state] = nxt.get(new_state, Fraction(0)) + q
            if work > budget:
                raise BudgetError(f"coalescing enumeration exceeded budget {budget}")
        dist = nxt

    table = DistributionTable()
    for state, p in dist.items():
        key = tuple(sorted(loc for _, loc in state))
        table[key] = table.get(key, Fraction(0)) + p
    return table


def exchangeability_check(kernel: Kernel, starts: Sequence, ticks: int,
                          budget: int = DEFAULT_ENUM_BUDGET) -> Fraction:
    """Max pairwise total variation between the final-state laws over all
    rankings.  The collision rule makes this exactly zero."""
    n = len(starts)
    tables = [
        enumerate_coalescing_distribution(kernel, starts, list(perm), ticks, budget)
        for perm in itertools.permutations(range(n))
    ]
    worst = Fraction(0)
    for a, b in itertools.combinations(tables, 2):
        worst = max(worst, a.tv(b))
    return worst


def folding_check(window_graph: GasketLevelGraph, start: int, ticks: int,
                  budget: int = DEFAULT_ENUM_BUDGET) -> Fraction:
    """TV distance between the folded window-walk law and the unit-gasket
    walk law started at the folded start.  Exactly zero whenever the walk
    cannot reach the window's far corners within the horizon."""
    k = window_graph.window_exponent
    if k < 1:
        raise ContractError("folding_check needs a window graph (window_exponent >= 1)")
    for esc in window_graph.escape_indices:
        if shortest_path_hops(window_graph, start, esc) <= ticks:
            raise PreconditionError(
                "start is within the horizon's reach of the window boundary")

    window_law = evolve_single_distribution(graph_step_kernel(window_graph),
                                            start, ticks, budget)
    finite = build_gasket_graph(window_graph.level, 0)
    pushed = DistributionTable()
    for idx, p in window_law.items():
        img = fold_vertex(window_graph.address(idx), k)
        key = finite.index_of(img)
        pushed[key] = pushed.get(key, Fraction(0)) + p

    start_img = finite.index_of(fold_vertex(window_graph.address(start), k))
    finite_law = evolve_single_distribution(graph_step_kernel(finite),
                                            start_img, ticks, budget)
    return pushed.tv(finite_law)


def brute_collision_prob(kernel: Kernel, x, y, ticks: int,
                         budget: int = DEFAULT_ENUM_BUDGET) -> Fraction:
    """Exact P{two independent walkers co-locate at some tick <= ticks}."""
    if x == y:
        return Fraction(1)
    pairs: dict[tuple, Fraction] = {(x, y): Fraction(1)}
    collided = Fraction(0)
    for _ in range(ticks):
        nxt: dict[tuple, Fraction] = {}
        work = 0
        for (a, b), p in pairs.items():
            for a2, pa in kernel(a):
                for b2, pb in kernel(b):
                    work += 1
                    q = p * pa * pb
                    if a2 == b2:
                        collided += q
                    else:
                        key = (a2, b2)
                        nxt[key] = nxt.get(key, Fraction(0)) + q
            if work > budget:
                raise BudgetError(f"pair enumeration exceeded budget {budget}")
        pairs = nxt
    return collided


def first_hit_distribution(graph: GasketLevelGraph, start: int,
                           targets: Iterable[int]) -> dict[int, Fraction]:
    """Exact distribution of the first target vertex visited by the walk.

    Solves the absorbing linear system over Fractions (Gauss-Jordan), so the
    result carries no numerical error.
    """
    targets = sorted(set(targets))
    if start in targets:
        return {start: Fraction(1)}
    interior = [v for v in range(graph.n_vertices) if v not in set(targets)]
    pos = {v: i for i, v in enumerate(interior)}
    n, m = len(interior), len(targets)
    tcol = {t: j for j, t in enumerate(targets)}

    # rows: (I - P_interior) f = P_to_target
    a = [[Fraction(0)] * n for _ in range(n)]
    rhs = [[Fraction(0)] * m for _ in range(n)]
    for v in interior:
        i = pos[v]
        a[i][i] = Fraction(1)
        step = Fraction(1, len(graph.neighbors[v]))
        for w in graph.neighbors[v]:
            if w in tcol:
                rhs[i][tcol[w]] += step
            else:
                a[i][pos[w]] -= step

    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [x * inv for x in a[col]]
        rhs[col] = [x * inv for x in rhs[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                rhs[r] = [x - f * y for x, y in zip(rhs[r], rhs[col])]

    row = rhs[pos[start]]
    return {t: row[j] for j, t in enumerate(targets) if row[j] != 0}
