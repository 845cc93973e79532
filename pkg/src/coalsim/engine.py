"""Collision rule and the set-valued coalescing process.

Collisions are declared only at synchronized ticks with exact state
equality (vertex identity on gasket graphs, integer identity on lattices).
Simultaneous multi-collisions at one tick merge into the class whose
representative has the smallest rank, matching the minimum-index rule of
the underlying collision map.

Two evolution routes are kept deliberately separate:

* ``apply_collision_rule`` builds coalesced paths offline from complete
  free paths (the defining map, used as an oracle), and
* ``evolve_coalescing`` runs the same dynamics online over a union-find
  partition, advancing only live class representatives, with memory
  proportional to the number of live classes.

Per-particle generators are keyed by the particle's initial location so
that nested systems started from nested sets share their randomness and
stay pathwise nested.

The ``*_fast`` evolutions trade the per-particle stream discipline for a
single per-replicate generator and vectorized stepping; they are used by
the large Monte Carlo experiments and are cross-checked against the
reference engine distributionally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import ContractError, ParameterError
from .gasket import GasketLevelGraph
from .samplers import LatticeStepLaw, RngStream


# ---------------------------------------------------------------------------
# models: what a single free particle does per tick

class GasketModel:
    kind = "gasket"

    def __init__(self, graph: GasketLevelGraph):
        self.graph = graph
        self.tick_duration = graph.tick_duration()

    def step(self, state: int, rng: np.random.Generator) -> int:
        g = self.graph
        return int(g.neighbor_table[state, rng.integers(g.degrees[state])])

    def escaped(self, state: int) -> bool:
        return state in self.graph.escape_indices

    def location(self, state: int):
        return self.graph.vertices[state]


class LatticeLineModel:
    kind = "lattice-line"
    tick_duration = 1.0

    def __init__(self, law: LatticeStepLaw):
        self.law = law

    def step(self, state: int, rng: np.random.Generator) -> int:
        return state + int(self.law.sample(rng))

    def escaped(self, state: int) -> bool:
        return False

    def location(self, state: int) -> int:
        return state


class LatticeCircleModel:
    kind = "lattice-circle"
    tick_duration = 1.0

    def __init__(self, law: LatticeStepLaw, circumference: int):
        if circumference < 2:
            raise ParameterError("circle circumference must be at least 2")
        self.law = law
        self.circumference = circumference

    def step(self, state: int, rng: np.random.Generator) -> int:
        return (state + int(self.law.sample(rng))) % self.circumference

    def escaped(self, state: int) -> bool:
        return False

    def location(self, state: int) -> int:
        return state


# ---------------------------------------------------------------------------
# partition with rank-priority representatives

class CoalescentPartition:
    """Union-find over particle indices whose class representative is the
    member of minimal rank (rank = position in the ranking permutation)."""

    def __init__(self, n: int, ranking: Optional[Sequence[int]] = None):
        order = list(ranking) if ranking is not None else list(range(n))
        if sorted(order) != list(range(n)):
            raise ContractError("ranking must be a permutation of the particle indices")
        self._parent = list(range(n))
        self.rank_of = [0] * n
        for pos, p in enumerate(order):
            self.rank_of[p] = pos
        self.count = n

    def find(self, i: int) -> int:
        root = i
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[i] != root:
            self._parent[i], i = root, self._parent[i]
        return root

    def union(self, i: int, j: int) -> tuple[int, int]:
        """Merge the classes of i and j; returns (survivor, absorbed) roots."""
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            raise ContractError("cannot merge a class with itself")
        if self.rank_of[ri] > self.rank_of[rj]:
            ri, rj = rj, ri
        self._parent[rj] = ri
        self.count -= 1
        return ri, rj

    def classes(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self._parent)):
            out.setdefault(self.find(i), []).append(i)
        return out


# ---------------------------------------------------------------------------
# event log and set states

class Event(NamedTuple):
    tick: int
    absorbed: int
    survivor: int
    location: object


@dataclass
class EventLog:
    """Merge history of one replicate; replaying it from the initial set
    reconstructs every intermediate class count and set state."""

    n_initial: int
    tick_duration: float
    events: list[Event] = field(default_factory=list)
    escaped: bool = False

    def count_at_tick(self, tick: int) -> int:
        return self.n_initial - sum(1 for e in self.events if e.tick <= tick)

    def counts_at_ticks(self, ticks: Sequence[int]) -> np.ndarray:
        ev = np.array(sorted(e.tick for e in self.events))
        t = np.asarray(ticks)
        return self.n_initial - np.searchsorted(ev, t, side="right")

    def csv_rows(self, replicate: int) -> list[tuple]:
        return [
            (replicate, e.tick, e.tick * self.tick_duration, e.absorbed, e.survivor,
             _location_str(e.location))
            for e in self.events
        ]


def _location_str(loc) -> str:
    if isinstance(loc, tuple):
        return ";".join(str(x) for x in loc)
    return str(loc)


@dataclass(frozen=True)
class SetState:
    """Occupied locations (one per live class) at one sampled time."""

    time: float
    locations: tuple

    @property
    def count(self) -> int:
        return len(self.locations)


def tau_to_count(log: EventLog, m: int) -> float:
    """First time the class count is <= m; 0.0 if already, inf if never."""
    if m < 1:
        raise ParameterError("target count must be at least 1")
    if m >= log.n_initial:
        return 0.0
    drops = log.n_initial - m
    if len(log.events) < drops:
        return math.inf
    ticks = sorted(e.tick for e in log.events)
    return ticks[drops - 1] * log.tick_duration


def range_set(states: Iterable[SetState], interval: tuple[float, float]) -> set:
    """Union of occupied locations over sampled states inside the interval."""
    lo, hi = interval
    out: set = set()
    for s in states:
        if lo <= s.time <= hi:
            out.update(s.locations)
    return out


def geometric_ticks(horizon: int) -> tuple[int, ...]:
    """0, 1, 2, 4, ... plus the horizon itself."""
    ticks = {0, horizon}
    t = 1
    while t < horizon:
        ticks.add(t)
        t *= 2
    return tuple(sorted(ticks))


# ---------------------------------------------------------------------------
# offline route: the collision map on complete free paths

def apply_collision_rule(paths: Sequence[Sequence], ranking: Optional[Sequence[int]] = None):
    """Turn free paths into coalescing paths.

    Particles are processed in rank order; each follows its free path until
    the first tick it co-locates with an already-coalesced lower-rank path,
    then follows the lowest-ranked such path forever.  The first n outputs
    (in rank order) depend only on the first n inputs.
    """
    n = len(paths)
    order = list(ranking) if ranking is not None else list(range(n))
    if sorted(order) != list(range(n)):
        raise ContractError("ranking must be a permutation of the particle indices")
    if n == 0:
        return []
    length = len(paths[0])
    if any(len(p) != length for p in paths):
        raise ContractError("paths must share one tick grid")

    by_rank: list[list] = []
    zeta: dict[int, list] = {}
    for pos, p in enumerate(order):
        xi = list(paths[p])
        tau, j_min = None, None
        for t in range(length):
            x = xi[t]
            for j in range(pos):
                if by_rank[j][t] == x:
                    tau, j_min = t, j
                    break
            if tau is not None:
                break
        z = xi if tau is None else xi[:tau] + by_rank[j_min][tau:]
        by_rank.append(z)
        zeta[p] = z
    return [zeta[p] for p in range(n)]


def events_from_paths(paths: Sequence[Sequence], ranking: Optional[Sequence[int]] = None,
                      tick_duration: float = 1.0,
                      location: Callable = lambda s: s) -> EventLog:
    """Merge events implied by a set of free paths under the collision rule.

    Independent of apply_collision_rule: replays the per-tick group-merge
    dynamics on the free paths directly.
    """
    n = len(paths)
    part = CoalescentPartition(n, ranking)
    log = EventLog(n, tick_duration)
    length = len(paths[0]) if n else 0
    for t in range(length):
        _merge_colocated(part, {p: paths[p][t] for p in _live_roots(part)},
                         t, log, location)
    return log


def _live_roots(part: CoalescentPartition) -> list[int]:
    return sorted(part.classes().keys(), key=lambda r: part.rank_of[r])


def _merge_colocated(part: CoalescentPartition, positions: dict[int, object],
                     tick: int, log: EventLog, location: Callable) -> bool:
    """Merge all co-located class representatives; True if anything merged."""
    groups: dict[object, list[int]] = {}
    for root, state in positions.items():
        groups.setdefault(state, []).append(root)
    merged = False
    hits = [members for members in groups.values() if len(members) > 1]
    hits.sort(key=lambda ms: min(part.rank_of[m] for m in ms))
    for members in hits:
        members.sort(key=lambda m: part.rank_of[m])
        survivor = members[0]
        for other in members[1:]:
            s, a = part.union(survivor, other)
            log.events.append(Event(tick, a, s, location(positions[other])))
        merged = True
    return merged


# ---------------------------------------------------------------------------
# online route: reference engine

@dataclass
class Evolution:
    log: EventLog
    states: list[SetState]


def evolve_coalescing(starts: Sequence, model, horizon_ticks: int,
                      stream_for: Callable[[object], np.random.Generator],
                      ranking: Optional[Sequence[int]] = None,
                      snapshot_ticks: Optional[Sequence[int]] = None) -> Evolution:
    """Online coalescing evolution over synchronized ticks.

    ``stream_for(location)`` must return the generator for the particle that
    started at that location; each live class advances along the free path
    of its minimal-rank member, so the result coincides with applying the
    collision rule to the full free-path vector.
    """
    n = len(starts)
    part = CoalescentPartition(n, ranking)
    log = EventLog(n, model.tick_duration)
    if snapshot_ticks is None:
        snapshot_ticks = geometric_ticks(horizon_ticks)
    snap_set = set(snapshot_ticks)

    state: dict[int, object] = dict(enumerate(starts))
    rngs = {p: stream_for(model.location(starts[p])) for p in range(n)}

    snapshots: list[SetState] = []

    def positions() -> dict[int, object]:
        return {root: state[root] for root in _live_roots(part)}

    def take_snapshot(tick: int):
        locs = tuple(sorted(model.location(s) for s in positions().values()))
        snapshots.append(SetState(tick * model.tick_duration, locs))

    _merge_colocated(part, positions(), 0, log, model.location)
    if 0 in snap_set:
        take_snapshot(0)

    for tick in range(1, horizon_ticks + 1):
        pos = {}
        for root in _live_roots(part):
            nxt = model.step(state[root], rngs[root])
            state[root] = nxt
            pos[root] = nxt
            if model.escaped(nxt):
                log.escaped = True
        _merge_colocated(part, pos, tick, log, model.location)
        if tick in snap_set:
            take_snapshot(tick)

    return Evolution(log, snapshots)


# ---------------------------------------------------------------------------
# pigeonhole pairing and the paired partial system

def pigeonhole_pairs(assignment) -> list[tuple[int, int]]:
    """Greedy disjoint within-box pairs; at least ceil((M - m)/2) of them.

    ``assignment`` maps particle -> box (mapping, or a sequence indexed by
    particle).
    """
    items = assignment.items() if hasattr(assignment, "items") else enumerate(assignment)
    boxes: dict[object, list[int]] = {}
    for particle, box in items:
        boxes.setdefault(box, []).append(particle)
    pairs: list[tuple[int, int]] = []
    for box in sorted(boxes, key=repr):
        members = sorted(boxes[box])
        for i in range(0, len(members) - 1, 2):
            pairs.append((members[i], members[i + 1]))
    return pairs


def paired_partial_system(start_pairs: Sequence[tuple], model, horizon_ticks: int,
                          streams: RngStream, replicate: int = 0) -> list[bool]:
    """Collision-by-horizon indicator for each pair run in isolation.

    Pairs use disjoint fresh streams, so the indicators are independent.
    """
    out = []
    for k, (a, b) in enumerate(start_pairs):
        gens = [streams.particle(replicate, (k, side)) for side in (0, 1)]
        if a == b:
            out.append(True)
            continue
        sa, sb = a, b
        hit = False
        for _ in range(horizon_ticks):
            sa = model.step(sa, gens[0])
            sb = model.step(sb, gens[1])
            if sa == sb:
                hit = True
                break
        out.append(hit)
    return out


def nested_coupling(start_sets: Sequence[Sequence], model, horizon_ticks: int,
                    stream_for: Callable[[object], np.random.Generator],
                    snapshot_ticks: Optional[Sequence[int]] = None) -> list[Evolution]:
    """Coupled evolutions from nested start sets, sharing per-location streams.

    Each system ranks the previous system's points first, so its coalesced
    prefix coincides with the smaller system and the sampled location sets
    are nested; the nesting is asserted at every sampled tick.
    """
    ordered: list = []
    seen = set()
    sizes = []
    for q in start_sets:
        for s in q:
            if s not in seen:
                seen.add(s)
                ordered.append(s)
        sizes.append(len(ordered))
        if len(q) != sizes[-1]:
            raise ContractError("start sets must be nested")
    if snapshot_ticks is None:
        snapshot_ticks = geometric_ticks(horizon_ticks)

    results = []
    for size in sizes:
        # fresh generators per system; identical (location-keyed) seeding
        results.append(evolve_coalescing(ordered[:size], model, horizon_ticks,
                                         stream_for, None, snapshot_ticks))
    for smaller, larger in zip(results, results[1:]):
        for s_small, s_large in zip(smaller.states, larger.states):
            assert s_small.time == s_large.time
            assert set(s_small.locations) <= set(s_large.locations), \
                "nested coupling violated at a sampled tick"
    return results


# ---------------------------------------------------------------------------
# fast vectorized evolutions (single per-replicate stream)

def _merge_groups_vectorized(live_ids: np.ndarray, pos: np.ndarray, tick: int,
                             events: list[Event], location: Callable):
    """Merge duplicate positions; live arrays are kept in rank order."""
    order = np.argsort(pos, kind="stable")
    ps = pos[order]
    dup = np.flatnonzero(ps[1:] == ps[:-1])
    if dup.size == 0:
        return live_ids, pos
    kill = np.zeros(len(pos), dtype=bool)
    i = 0
    while i < len(dup):
        j = dup[i]
        k = j + 1
        while k < len(ps) - 1 and ps[k + 1] == ps[j]:
            k += 1
        members = np.sort(order[j:k + 1])        # ascending index = ascending rank
        survivor = int(live_ids[members[0]])
        for mem in members[1:]:
            events.append(Event(tick, int(live_ids[mem]), survivor,
                                location(int(pos[mem]))))
            kill[mem] = True
        while i < len(dup) and dup[i] <= k - 1:
            i += 1
    keep = ~kill
    return live_ids[keep], pos[keep]


def evolve_gasket_system_fast(graph: GasketLevelGraph, starts: Sequence[int],
                              horizon_ticks: int, rng: np.random.Generator,
                              snapshot_ticks: Sequence[int] = ()) -> Evolution:
    """Vectorized gasket coalescing system (identity ranking)."""
    table = graph.neighbor_table
    deg = graph.degrees
    tick_dur = graph.tick_duration()
    loc = lambda s: graph.vertices[s]

    live = np.arange(len(starts), dtype=np.int64)
    pos = np.asarray(starts, dtype=np.int64)
    log = EventLog(len(starts), tick_dur)
    live, pos = _merge_groups_vectorized(live, pos, 0, log.events, loc)

    snap_set = set(snapshot_ticks)
    snapshots: list[SetState] = []

    def take(tick):
        locs = tuple(sorted(loc(int(s)) for s in pos))
        snapshots.append(SetState(tick * tick_dur, locs))

    if 0 in snap_set:
        take(0)
    escape = graph.escape_indices
    for tick in range(1, horizon_ticks + 1):
        u = rng.random(len(pos))
        pos = table[pos, (u * deg[pos]).astype(np.int64)].astype(np.int64)
        if escape and np.isin(pos, escape).any():
            log.escaped = True
        if len(np.unique(pos)) < len(pos):
            live, pos = _merge_groups_vectorized(live, pos, tick, log.events, loc)
        if tick in snap_set:
            take(tick)
    return Evolution(log, snapshots)


def evolve_circle_system_fast(law: LatticeStepLaw, circumference: int,
                              starts: Sequence[int], horizon_ticks: int,
                              rng: np.random.Generator,
                              snapshot_ticks: Sequence[int] = (),
                              max_chunk: int = 512) -> Evolution:
    """Vectorized circle coalescing system with tick-chunked stepping.

    Draws steps for many ticks at once and rolls back to the first tick with
    a collision; unused draws are discarded, which leaves the law of the
    retained steps untouched (steps are independent across ticks).
    """
    L = circumference
    live = np.arange(len(starts), dtype=np.int64)
    pos = np.asarray(starts, dtype=np.int64) % L
    log = EventLog(len(starts), 1.0)
    log_loc = lambda s: int(s)
    live, pos = _merge_groups_vectorized(live, pos, 0, log.events, log_loc)

    snap_points = sorted(set(snapshot_ticks))
    snapshots: list[SetState] = []

    def take(tick):
        snapshots.append(SetState(float(tick), tuple(sorted(int(x) for x in pos))))

    if snap_points and snap_points[0] == 0:
        take(0)
        snap_points = snap_points[1:]

    tick = 0
    chunk = 4
    while tick < horizon_ticks:
        limit = horizon_ticks
        if snap_points:
            limit = min(limit, snap_points[0])
        k = min(chunk, limit - tick)
        steps = law.sample(rng, size=(len(pos), k))
        traj = (pos[:, None] + np.cumsum(steps, axis=1)) % L
        srt = np.sort(traj, axis=0)
        coll = np.flatnonzero((srt[1:] == srt[:-1]).any(axis=0))
        if coll.size:
            j = int(coll[0])
            pos = traj[:, j]
            tick += j + 1
            live, pos = _merge_groups_vectorized(live, pos, tick, log.events, log_loc)
            chunk = 4
        else:
            pos = traj[:, -1]
            tick += k
            chunk = min(2 * chunk, max_chunk)
        while snap_points and tick >= snap_points[0]:
            if tick == snap_points[0]:
                take(tick)
            snap_points = snap_points[1:]
    return Evolution(log, snapshots)


def circle_first_collision_ticks(law: LatticeStepLaw, circumference: int,
                                 n_particles: int, replicates: int,
                                 streams: RngStream, horizon_cap: int,
                                 base_replicate: int = 0,
                                 block_size: int = 1024,
                                 max_chunk_elems: int = 6_000_000) -> np.ndarray:
    """First-collision tick for many replicates of equally spaced particles.

    Vectorized across replicates; -1 marks replicates that did not collide
    within the cap (reported, excluded by callers).  ``base_replicate``
    offsets the block seeding so a range split across processes reproduces
    the serial run exactly.
    """
    L = circumference
    if L % n_particles != 0:
        raise ParameterError("circumference must be a multiple of the particle count")
    out = np.full(replicates, -1, dtype=np.int64)
    for base in range(0, replicates, block_size):
        b = min(block_size, replicates - base)
        # one stream per block, replicates sliced inside
        rng = streams.replicate(base_replicate + base)
        pos = np.tile(np.arange(n_particles, dtype=np.int64) * (L // n_particles), (b, 1))
        idx = np.arange(b)
        tick = np.zeros(b, dtype=np.int64)
        while idx.size:
            k = max(16, min(4096, max_chunk_elems // (idx.size * n_particles)))
            k = min(k, int(horizon_cap - tick.max()) if tick.size else k)
            steps = law.sample(rng, size=(idx.size, n_particles, k))
            traj = (pos[:, :, None] + np.cumsum(steps, axis=2)) % L
            srt = np.sort(traj, axis=1)
            hit = (srt[:, 1:, :] == srt[:, :-1, :]).any(axis=1)     # (reps, k)
            any_hit = hit.any(axis=1)
            first = np.argmax(hit, axis=1)
            done = np.flatnonzero(any_hit)
            out[idx[done]] = tick[done] + first[done] + 1
            cont = np.flatnonzero(~any_hit)
            tick = tick + k
            over = tick >= horizon_cap
            cont = cont[~over[cont]]
            idx = idx[cont]
            pos = traj[cont, :, -1]
            tick = tick[cont]
    return out
