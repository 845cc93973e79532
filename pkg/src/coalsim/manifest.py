"""Experiment manifests: the unit of reproducibility.

A manifest fully determines an experiment's outputs bit for bit.  It is a
plain JSON document; every output file records the manifest's content hash
so orphan outputs can be rejected.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError
from .gasket import DEFAULT_TRIANGLE_BUDGET, VertexAddress, build_gasket_graph
from .samplers import LatticeStepLaw, StableParams

MODEL_KINDS = ("gasket-finite", "gasket-window", "lattice-line",
               "lattice-circle", "continuum-stable")


@dataclass
class ExperimentManifest:
    name: str
    model: dict
    initial: dict = field(default_factory=dict)
    horizon_ticks: int = 0
    replicates: int = 1
    seed: int = 0
    analysis: dict = field(default_factory=dict)

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentManifest":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ParameterError(f"unknown manifest fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentManifest":
        return cls.from_dict(json.loads(text))


def _require(cond: bool, fieldname: str, message: str):
    if not cond:
        raise ParameterError(f"manifest field '{fieldname}': {message}")


def validate_manifest(m: ExperimentManifest,
                      budget: int = DEFAULT_TRIANGLE_BUDGET) -> None:
    """Structural validation; failures name the offending field."""
    _require(isinstance(m.name, str) and m.name != "", "name", "must be a non-empty string")
    _require(isinstance(m.seed, int) and m.seed >= 0, "seed", "must be a non-negative integer")
    _require(isinstance(m.replicates, int) and m.replicates >= 1,
             "replicates", "must be a positive integer")
    _require(isinstance(m.horizon_ticks, int) and m.horizon_ticks >= 0,
             "horizon_ticks", "must be a non-negative integer")

    kind = m.model.get("kind")
    _require(kind in MODEL_KINDS, "model.kind", f"must be one of {MODEL_KINDS}")

    if kind in ("gasket-finite", "gasket-window"):
        level = m.model.get("level")
        _require(isinstance(level, int) and level >= 0, "model.level",
                 "must be a non-negative integer")
        k = m.model.get("window_exponent", 0)
        if kind == "gasket-window":
            _require(isinstance(k, int) and k >= 1, "model.window_exponent",
                     "must be a positive integer for window mode")
        else:
            _require(k in (0, None), "model.window_exponent",
                     "finite gasket has no window")
            k = 0
        _require(3 ** (level + k) <= budget, "model.level",
                 f"3^{level + k} unit triangles exceed the budget {budget}")
    elif kind in ("lattice-line", "lattice-circle"):
        alpha = m.model.get("alpha")
        _require(isinstance(alpha, (int, float)) and 1.0 < alpha < 2.0,
                 "model.alpha", "must lie in (1, 2)")
        hold = m.model.get("hold_prob", 0.5)
        _require(0.0 < hold < 1.0, "model.hold_prob", "must lie in (0, 1)")
        if kind == "lattice-circle":
            L = m.model.get("circumference")
            _require(isinstance(L, int) and L >= 2, "model.circumference",
                     "must be an integer >= 2")
            trunc = m.model.get("truncation", L // 2)
        else:
            trunc = m.model.get("truncation")
            _require(isinstance(trunc, int), "model.truncation",
                     "line mode needs an explicit truncation cap")
        _require(isinstance(trunc, int) and trunc >= 1, "model.truncation",
                 "must be a positive integer")
    else:   # continuum-stable
        alpha = m.model.get("alpha")
        _require(isinstance(alpha, (int, float)) and 1.0 < alpha <= 2.0,
                 "model.alpha", "must lie in (1, 2]")
        c = m.model.get("c", 1.0)
        _require(c > 0, "model.c", "must be positive")
        ups = m.model.get("upsilon", 0.0)
        _require(-1.0 <= ups <= 1.0, "model.upsilon", "must lie in [-1, 1]")
        eta = m.model.get("eta")
        if eta is not None:
            lo, hi = (alpha - 1.0) / 2.0, alpha - 1.0
            _require(lo < eta < hi, "model.eta",
                     f"must lie in the open window ({lo}, {hi})")


def build_step_law(model: dict) -> LatticeStepLaw:
    trunc = model.get("truncation")
    if trunc is None:
        trunc = model["circumference"] // 2
    return LatticeStepLaw.build(model["alpha"], model.get("hold_prob", 0.5), trunc)


def build_stable_params(model: dict) -> StableParams:
    return StableParams(model["alpha"], model.get("c", 1.0), model.get("upsilon", 0.0))


# ---------------------------------------------------------------------------
# initial sets

def nested_sizes(growth: float, levels: int) -> list[int]:
    """ceil(growth**m) for m = 1..levels, bumped to be strictly increasing."""
    if growth <= 1.0:
        raise ParameterError("nested growth factor must exceed 1")
    sizes: list[int] = []
    for m in range(1, levels + 1):
        s = math.ceil(growth ** m)
        if sizes and s <= sizes[-1]:
            s = sizes[-1] + 1
        sizes.append(s)
    return sizes


def initial_set(spec: dict, model: dict, rng: Optional[np.random.Generator] = None):
    """Deterministic initial point set for a model.

    Kinds: equally-spaced(n) and uniform(n) on circles; all-vertices(level)
    on gaskets; nested(growth, levels) produces a list of genuinely nested
    sets with the documented size rule.
    """
    kind = spec.get("kind")
    mkind = model.get("kind")
    if kind == "equally-spaced":
        n = spec["n"]
        L = model["circumference"]
        if n < 1 or n > L:
            raise ParameterError(f"initial.n: cannot place {n} points on Z_{L}")
        if L % n != 0:
            raise ParameterError("initial.n: equally-spaced needs n dividing the circumference")
        return [i * (L // n) for i in range(n)]
    if kind == "uniform":
        n = spec["n"]
        L = model["circumference"]
        if rng is None:
            raise ParameterError("initial.uniform needs a replicate generator")
        return [int(x) for x in rng.integers(0, L, size=n)]
    if kind == "all-vertices":
        level = spec["level"]
        target = model["level"]
        if level > target:
            raise ParameterError(
                f"initial.level: level-{level} vertices are not level-{target} states")
        sub = build_gasket_graph(level, model.get("window_exponent", 0))
        return [VertexAddress(level, a, b).rescale(target) for a, b in sub.vertices]
    if kind == "nested":
        sizes = nested_sizes(spec["growth"], spec["levels"])
        if mkind == "lattice-circle":
            population = list(range(model["circumference"]))
        elif mkind in ("gasket-finite", "gasket-window"):
            g = build_gasket_graph(model["level"], model.get("window_exponent", 0))
            population = [VertexAddress(g.level, a, b) for a, b in g.vertices]
        else:
            raise ParameterError(f"initial.nested: unsupported model kind {mkind}")
        if sizes[-1] > len(population):
            raise ParameterError(
                f"initial.levels: need {sizes[-1]} points, only {len(population)} exist")
        if rng is None:
            rng = np.random.default_rng(0)
        perm = rng.permutation(len(population))
        ordered = [population[i] for i in perm]
        return [ordered[:s] for s in sizes]
    raise ParameterError(f"initial.kind: unknown kind {kind!r}")
