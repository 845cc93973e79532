"""Synchronized discrete-time path samplers.

Three families of motion share one tick grid:

* natural random walks on gasket level graphs (tick = 5**-level time units),
* symmetric heavy-tailed integer walks on the line or circle, the
  exact-collision surrogate for index-alpha stable motion, and
* a continuum stable-increment sampler (Chambers-Mallows-Stuck transform)
  used for displacement and tail statistics only, never for collisions.

All randomness flows through ``RngStream`` so that a (master seed,
replicate, particle) triple reproduces a path bit for bit and distinct
particles get independent generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import zeta

from .errors import ContractError, ParameterError
from .gasket import GasketLevelGraph


# ---------------------------------------------------------------------------
# seeded generator streams

def _encode_key(key) -> tuple[int, ...]:
    """Stable non-negative integer encoding of a particle key (int or int tuple)."""
    if isinstance(key, (int, np.integer)):
        parts = (int(key),)
    else:
        parts = tuple(int(x) for x in key)
    zig = tuple(2 * x if x >= 0 else -2 * x - 1 for x in parts)
    return (len(zig),) + zig


@dataclass(frozen=True)
class RngStream:
    """Hierarchy of independent generators derived from one master seed."""

    master_seed: int

    def replicate(self, rep: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(0, rep))
        return np.random.default_rng(ss)

    def particle(self, rep: int, key) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(1, rep) + _encode_key(key))
        return np.random.default_rng(ss)


# ---------------------------------------------------------------------------
# continuum stable increments

@dataclass(frozen=True)
class StableParams:
    """Index, scale and skewness of a strictly stable law.

    The characteristic function of one unit-time increment is
    exp(-c |lam|**alpha * (1 - 1j * upsilon * sign(lam) * tan(pi*alpha/2))).
    At alpha == 2 the law is Gaussian with variance 2*c regardless of
    upsilon.
    """

    alpha: float
    c: float = 1.0
    upsilon: float = 0.0

    def __post_init__(self):
        if not (1.0 < self.alpha <= 2.0):
            raise ParameterError(f"alpha must lie in (1, 2], got {self.alpha}")
        if self.c <= 0:
            raise ParameterError(f"scale c must be positive, got {self.c}")
        if not (-1.0 <= self.upsilon <= 1.0):
            raise ParameterError(f"skewness upsilon must lie in [-1, 1], got {self.upsilon}")


def stable_increment(params: StableParams, dt: float, rng: np.random.Generator,
                     size=None):
    """Sample increments of the stable process over a time step dt.

    Chambers-Mallows-Stuck transform; self-similarity holds in distribution:
    k increments of dt sum to one increment of k*dt.
    """
    if dt <= 0:
        raise ParameterError("dt must be positive")
    alpha, beta = params.alpha, params.upsilon
    sigma = (params.c * dt) ** (1.0 / alpha)
    if alpha == 2.0:
        return rng.normal(0.0, sigma * math.sqrt(2.0), size=size)
    u = rng.uniform(-math.pi / 2, math.pi / 2, size=size)
    w = rng.exponential(1.0, size=size)
    tpa = math.tan(math.pi * alpha / 2.0)
    theta0 = math.atan(beta * tpa) / alpha
    scale0 = (1.0 + (beta * tpa) ** 2) ** (1.0 / (2.0 * alpha))
    x = (scale0 * np.sin(alpha * (u + theta0)) / np.cos(u) ** (1.0 / alpha)
         * (np.cos(u - alpha * (u + theta0)) / w) ** ((1.0 - alpha) / alpha))
    return sigma * x


# ---------------------------------------------------------------------------
# heavy-tailed lattice step law

@dataclass(frozen=True)
class LatticeStepLaw:
    """Symmetric integer step law with power tail index alpha in (1, 2).

    P{step = j} is proportional to |j|**-(alpha+1) for 1 <= |j| <= truncation,
    with the tail mass beyond the truncation folded into the extreme jumps,
    plus an atom ``hold_prob`` at zero (kills parity obstructions so two
    independent walkers co-locate with positive probability).
    """

    alpha: float
    hold_prob: float
    truncation: int
    support: np.ndarray = field(repr=False, compare=False)
    probs: np.ndarray = field(repr=False, compare=False)
    _cdf: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def build(cls, alpha: float, hold_prob: float = 0.5,
              truncation: int = 2 ** 15) -> "LatticeStepLaw":
        if not (1.0 < alpha < 2.0):
            raise ParameterError(f"lattice tail index alpha must lie in (1, 2), got {alpha}")
        if not (0.0 < hold_prob < 1.0):
            raise ParameterError(f"hold_prob must lie in (0, 1), got {hold_prob}")
        if truncation < 1:
            raise ParameterError("truncation must be at least 1")
        m = int(truncation)
        j = np.arange(1, m + 1, dtype=float)
        w = j ** (-(alpha + 1.0))
        w[-1] = zeta(alpha + 1.0, m)        # fold the tail sum_{j>=M} j^-(a+1) into M
        total = zeta(alpha + 1.0, 1)        # = sum of w, exactly
        side = (1.0 - hold_prob) / 2.0
        probs = np.concatenate((side * w[::-1] / total, [hold_prob], side * w / total))
        support = np.arange(-m, m + 1, dtype=np.int64)
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        return cls(alpha, hold_prob, m, support, probs, cdf)

    def sample(self, rng: np.random.Generator, size=None, dtype=np.int64):
        idx = np.searchsorted(self._cdf, rng.random(size), side="right")
        return self.support[idx].astype(dtype, copy=False)

    def prob_of(self, j: int) -> float:
        if abs(j) > self.truncation:
            return 0.0
        return float(self.probs[j + self.truncation])

    def to_json_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "hold_prob": self.hold_prob,
            "truncation": self.truncation,
            "probs": {int(j): float(p) for j, p in zip(self.support, self.probs)},
        }


def circle_reduce(position: int, circumference: int) -> int:
    """Wrap a lattice position onto the circle Z_L."""
    if circumference < 2:
        raise ParameterError("circle circumference must be at least 2")
    return position % circumference


def circle_distance(a: int, b: int, circumference: int):
    """Length of the shorter arc between two circle positions."""
    d = abs(circle_reduce(a, circumference) - circle_reduce(b, circumference))
    return np.minimum(d, circumference - d)


# ---------------------------------------------------------------------------
# paths

@dataclass
class PathSample:
    """States of one walker at synchronized ticks (tick 0 = start)."""

    model: str
    states: np.ndarray
    tick_duration: float
    truncated: bool = False

    @property
    def start(self):
        return self.states[0]

    @property
    def ticks(self) -> int:
        return len(self.states) - 1

    def time_of(self, tick: int) -> float:
        return tick * self.tick_duration


def gasket_walk_step(graph: GasketLevelGraph, state: int,
                     rng: np.random.Generator) -> int:
    """One step of the natural walk: uniform over the neighbors of state."""
    deg = graph.degrees[state]
    return int(graph.neighbor_table[state, rng.integers(deg)])


def simulate_walk(graph: GasketLevelGraph, start: int, ticks: int,
                  rng: np.random.Generator) -> PathSample:
    """Natural-walk path on a gasket graph; flags window-boundary visits."""
    states = np.empty(ticks + 1, dtype=np.int32)
    states[0] = start
    escape = graph.escape_indices
    truncated = start in escape
    s = start
    for t in range(1, ticks + 1):
        s = gasket_walk_step(graph, s, rng)
        states[t] = s
        if escape and s in escape:
            truncated = True
    return PathSample("gasket", states, graph.tick_duration(), truncated)


def simulate_lattice_walk(law: LatticeStepLaw, start: int, ticks: int,
                          rng: np.random.Generator,
                          circumference: Optional[int] = None) -> PathSample:
    """Heavy-tailed lattice walk on Z (or Z_L when a circumference is given)."""
    steps = law.sample(rng, size=ticks)
    states = np.concatenate(([start], start + np.cumsum(steps)))
    model = "lattice-line"
    if circumference is not None:
        states = states % circumference
        model = "lattice-circle"
    return PathSample(model, states, 1.0)


def max_displacement(path: PathSample, graph: Optional[GasketLevelGraph] = None,
                     circumference: Optional[int] = None) -> float:
    """Maximum metric distance from the start over all ticks."""
    if path.model == "gasket":
        if graph is None:
            raise ContractError("gasket displacement needs the graph for coordinates")
        xy = graph.xy[path.states]
        return float(np.max(np.hypot(xy[:, 0] - xy[0, 0], xy[:, 1] - xy[0, 1])))
    if path.model == "lattice-circle":
        if circumference is None:
            raise ContractError("circle displacement needs the circumference")
        return float(np.max(circle_distance(path.states, int(path.states[0]), circumference)))
    return float(np.max(np.abs(path.states - path.states[0])))
