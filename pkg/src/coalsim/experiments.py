"""Named experiments: one per acceptance criterion.

Every experiment is a pure function of its manifest (plus a worker count
that must not affect results).  Fit ranges, grids and tolerances live in
the manifest's ``analysis`` block, registered here once, never chosen from
the data after the fact.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import (
    COUNT_DECAY_EXPONENT,
    WALK_DIMENSION,
    clopper_pearson,
    closed_form_gamma_integral,
    fit_power_law,
    gamma_integral_quadrature,
    hausdorff_distance,
    reduction_factor,
    survival_curve,
    tail_shape_check,
)
from .engine import (
    GasketModel,
    LatticeCircleModel,
    circle_first_collision_ticks,
    evolve_circle_system_fast,
    evolve_coalescing,
    evolve_gasket_system_fast,
    events_from_paths,
    geometric_ticks,
    pigeonhole_pairs,
)
from .errors import ParameterError
from .gasket import VertexAddress, build_gasket_graph
from .manifest import ExperimentManifest, build_step_law, initial_set, validate_manifest
from .oracle import (
    enumerate_coalescing_distribution,
    exchangeability_check,
    folding_check,
    graph_step_kernel,
)
from .samplers import RngStream, StableParams, stable_increment


def _parallel(worker: Callable, blocks: list, workers: int) -> list:
    if workers <= 1 or len(blocks) <= 1:
        return [worker(b) for b in blocks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(worker, blocks))


# ---------------------------------------------------------------------------
# 1. exchangeability oracle

def manifest_exchangeability() -> ExperimentManifest:
    return ExperimentManifest(
        name="exchangeability-oracle",
        model={"kind": "gasket-finite", "level": 1},
        initial={"kind": "fixed", "points": [[0, 0], [2, 0], [1, 1]]},
        horizon_ticks=3,
        analysis={},
    )


def run_exchangeability(man: ExperimentManifest, workers: int = 1):
    g = build_gasket_graph(man.model["level"])
    kern = graph_step_kernel(g)
    starts = [g.index_of(tuple(p)) for p in man.initial["points"]]
    tv = exchangeability_check(kern, starts, man.horizon_ticks)
    table = enumerate_coalescing_distribution(kern, starts, None, man.horizon_ticks)
    n_rankings = math.factorial(len(starts))
    result = {
        "passed": tv == 0,
        "tv_max": str(tv),
        "rankings": n_rankings,
        "particles": len(starts),
        "ticks": man.horizon_ticks,
    }
    report = {
        "instance": f"gasket level {man.model['level']}, {len(starts)} particles, "
                    f"{man.horizon_ticks} ticks",
        "rankings": n_rankings,
        "tv_max": str(tv),
        "probability_tables_hash": table.content_hash(),
    }
    return result, {"oracle_report.json": ("json", report)}


# ---------------------------------------------------------------------------
# 2. folding oracle

def manifest_folding() -> ExperimentManifest:
    return ExperimentManifest(
        name="folding-oracle",
        model={"kind": "gasket-window", "level": 2, "window_exponent": 1},
        initial={"kind": "fixed", "points": [[1, 1]]},
        horizon_ticks=4,
        analysis={},
    )


def run_folding(man: ExperimentManifest, workers: int = 1):
    win = build_gasket_graph(man.model["level"], man.model["window_exponent"])
    start = win.index_of(tuple(man.initial["points"][0]))
    tv = folding_check(win, start, man.horizon_ticks)
    result = {
        "passed": tv == 0,
        "tv": str(tv),
        "ticks": man.horizon_ticks,
        "window_exponent": man.model["window_exponent"],
    }
    report = {
        "instance": f"window 2^{man.model['window_exponent']} gasket at level "
                    f"{man.model['level']}, start {man.initial['points'][0]}",
        "rankings": 1,
        "tv_max": str(tv),
        "probability_tables_hash": "",
    }
    return result, {"oracle_report.json": ("json", report)}


# ---------------------------------------------------------------------------
# 3. gasket scaling collapse

def manifest_scaling_collapse() -> ExperimentManifest:
    return ExperimentManifest(
        name="gasket-scaling-collapse",
        model={"kind": "gasket-window", "level": 2, "window_exponent": 3},
        initial={"kind": "triangle-corners"},
        horizon_ticks=25,
        replicates=10_000,
        seed=2024,
        analysis={"triangle_levels": [0, 1, 2], "level_offset": 2,
                  "window_exponent": 3, "p_low": 0.05, "sigma_factor": 3.0},
    )


def run_scaling_collapse(man: ExperimentManifest, workers: int = 1):
    reps = man.replicates
    ticks = man.horizon_ticks
    offset = man.analysis["level_offset"]
    k_window = man.analysis["window_exponent"]
    streams = RngStream(man.seed)
    rows = []
    phats, ks = [], []
    for n in man.analysis["triangle_levels"]:
        m = n + offset
        g = build_gasket_graph(m, window_exponent=k_window)
        table, deg = g.neighbor_table, g.degrees
        side = 2 ** (m - n)
        pa = np.full(reps, g.index_of((side, 0)))
        pb = np.full(reps, g.index_of((0, side)))
        # reach is ticks hops; the window boundary must stay out of reach
        assert ticks + side < 2 ** (m + k_window)
        # horizon = ticks * 5^-m = (ticks/25) * 5^-n time units: same multiple
        # of the triangle's collision time scale at every n
        rng = streams.replicate(n)
        hit = np.zeros(reps, dtype=bool)
        for _ in range(ticks):
            pa = table[pa, (rng.random(reps) * deg[pa]).astype(np.int64)]
            pb = table[pb, (rng.random(reps) * deg[pb]).astype(np.int64)]
            hit |= pa == pb
        k = int(hit.sum())
        lo, hi = clopper_pearson(k, reps)
        phats.append(k / reps)
        ks.append(k)
        rows.append((n, m, reps, k, k / reps, lo, hi))

    sig = man.analysis["sigma_factor"]
    agree = True
    for (i, pi), (j, pj) in itertools.combinations(enumerate(phats), 2):
        se = math.sqrt(pi * (1 - pi) / reps + pj * (1 - pj) / reps)
        if abs(pi - pj) > sig * se:
            agree = False
    pooled_lo, pooled_hi = clopper_pearson(sum(ks), reps * len(ks))
    positive = pooled_lo > man.analysis["p_low"]
    pooled = sum(ks) / (reps * len(ks))
    result = {
        "passed": bool(agree and positive),
        "agreement_within_sigma": bool(agree),
        "p_hats": phats,
        "pooled_p": pooled,
        "pooled_ci": [pooled_lo, pooled_hi],
        "p_low": man.analysis["p_low"],
        "reduction_factor": reduction_factor(pooled),
    }
    header = ("triangle_level", "walk_level", "replicates", "collisions",
              "p_hat", "ci_low", "ci_high")
    return result, {"collapse.csv": ("csv", header, rows)}


# ---------------------------------------------------------------------------
# 4. circle coalescence rate

def manifest_circle_tau() -> ExperimentManifest:
    L = 2 ** 16
    return ExperimentManifest(
        name="circle-tau-scaling",
        model={"kind": "lattice-circle", "alpha": 1.5, "hold_prob": 0.5,
               "circumference": L, "truncation": L // 2},
        initial={"kind": "equally-spaced"},
        replicates=5000,
        seed=515,
        analysis={"particle_counts": [8, 16, 32, 64], "expected_slope": -1.5,
                  "slope_tolerance": 0.25, "horizon_cap": 10 ** 8,
                  "block_size": 1024},
    )


def _tau_block(args):
    (seed, alpha, hold, trunc, L, n, base, count, cap, block_size) = args
    from .samplers import LatticeStepLaw
    law = LatticeStepLaw.build(alpha, hold, trunc)
    return circle_first_collision_ticks(
        law, L, n, count, RngStream(seed), horizon_cap=cap,
        base_replicate=base, block_size=block_size)


def run_circle_tau(man: ExperimentManifest, workers: int = 1):
    mdl = man.model
    L = mdl["circumference"]
    cap = man.analysis["horizon_cap"]
    bs = man.analysis["block_size"]
    rows = []
    means = []
    for n in man.analysis["particle_counts"]:
        blocks = [
            (man.seed + n, mdl["alpha"], mdl["hold_prob"], mdl["truncation"],
             L, n, base, min(bs, man.replicates - base), cap, bs)
            for base in range(0, man.replicates, bs)
        ]
        parts = _parallel(_tau_block, blocks, workers)
        ticks = np.concatenate(parts)
        ok = ticks[ticks > 0]
        unfinished = int((ticks < 0).sum())
        mean = float(ok.mean())
        se = float(ok.std() / math.sqrt(len(ok)))
        means.append(mean)
        rows.append((n, len(ok), unfinished, mean, se, float(np.median(ok))))
    fit = fit_power_law(list(zip(man.analysis["particle_counts"], means)))
    target = man.analysis["expected_slope"]
    tol = man.analysis["slope_tolerance"]
    result = {
        "passed": bool(abs(fit.slope - target) <= tol),
        "slope": fit.slope,
        "slope_stderr": fit.stderr,
        "expected_slope": target,
        "tolerance": tol,
        "mean_ticks": means,
    }
    fit_report = {"experiment": man.name, "slope": fit.slope, "stderr": fit.stderr,
                  "range": list(fit.fit_range), "pass": result["passed"]}
    header = ("n", "finished", "unfinished", "mean_ticks", "se_ticks", "median_ticks")
    return result, {"tau_scaling.csv": ("csv", header, rows),
                    "fit.json": ("json", fit_report)}


# ---------------------------------------------------------------------------
# 5. circle exceedance decay

def manifest_circle_exceedance() -> ExperimentManifest:
    L = 2 ** 16
    m_grid = sorted({int(round(m)) for m in np.geomspace(32, 1024, 250)})
    return ExperimentManifest(
        name="circle-exceedance",
        model={"kind": "lattice-circle", "alpha": 1.5, "hold_prob": 0.5,
               "circumference": L, "truncation": L // 2},
        initial={"kind": "uniform", "n": 1024},
        horizon_ticks=4096,
        replicates=400,
        seed=616,
        analysis={"m_grid": m_grid, "prob_window": [0.02, 0.95],
                  "slope_bound": -0.25, "block_size": 50},
    )


def _exceedance_block(args):
    (seed, alpha, hold, trunc, L, n_start, t_check, base, count) = args
    from .samplers import LatticeStepLaw
    law = LatticeStepLaw.build(alpha, hold, trunc)
    streams = RngStream(seed)
    counts = []
    for r in range(base, base + count):
        rng = streams.replicate(r)
        starts = [int(x) for x in rng.integers(0, L, size=n_start)]
        res = evolve_circle_system_fast(law, L, starts, t_check, rng)
        counts.append(res.log.count_at_tick(t_check))
    return counts


def run_circle_exceedance(man: ExperimentManifest, workers: int = 1):
    mdl = man.model
    bs = man.analysis["block_size"]
    blocks = [
        (man.seed, mdl["alpha"], mdl["hold_prob"], mdl["truncation"],
         mdl["circumference"], man.initial["n"], man.horizon_ticks,
         base, min(bs, man.replicates - base))
        for base in range(0, man.replicates, bs)
    ]
    counts = np.array(list(itertools.chain.from_iterable(
        _parallel(_exceedance_block, blocks, workers))))
    reps = len(counts)
    m_grid = man.analysis["m_grid"]
    lo_p, hi_p = man.analysis["prob_window"]
    rows = []
    fit_pts = []
    for m in m_grid:
        k = int((counts > m).sum())
        p = k / reps
        ci = clopper_pearson(k, reps)
        rows.append((man.horizon_ticks, m, p, ci[0], ci[1]))
        if lo_p <= p <= hi_p:
            fit_pts.append((m, p))
    alpha = mdl["alpha"]
    bound = man.analysis["slope_bound"]
    if len(fit_pts) >= 4:
        fit = fit_power_law(fit_pts)
        passed = fit.slope <= bound
        slope, stderr = fit.slope, fit.stderr
    else:
        passed, slope, stderr = False, float("nan"), float("nan")
    result = {
        "passed": bool(passed),
        "slope": slope,
        "slope_stderr": stderr,
        "slope_bound": bound,
        "one_sided": True,
        "alpha": alpha,
        "fit_points": len(fit_pts),
        "mean_count": float(counts.mean()),
    }
    fit_report = {"experiment": man.name, "slope": slope, "stderr": stderr,
                  "range": [fit_pts[0][0], fit_pts[-1][0]] if fit_pts else [],
                  "pass": result["passed"]}
    header = ("t", "m", "exceed_prob", "ci_lo", "ci_hi")
    return result, {"exceedance.csv": ("csv", header, rows),
                    "fit.json": ("json", fit_report)}


# ---------------------------------------------------------------------------
# 6 & 7. gasket decay and continuity at zero (one simulation, two reductions)

def _manifest_gasket_system(name: str) -> ExperimentManifest:
    return ExperimentManifest(
        name=name,
        model={"kind": "gasket-finite", "level": 6},
        initial={"kind": "all-vertices", "level": 4},
        horizon_ticks=8192,
        replicates=200,
        seed=717,
        analysis={"fit_ticks": [50, 5000], "expected_slope": -COUNT_DECAY_EXPONENT,
                  "slope_tolerance": 0.2, "final_count_cap": 25,
                  "mesh_factor": 2.0, "block_size": 25},
    )


def manifest_gasket_decay() -> ExperimentManifest:
    return _manifest_gasket_system("gasket-decay")


def manifest_gasket_continuity() -> ExperimentManifest:
    return _manifest_gasket_system("gasket-continuity")


def _gasket_block(args):
    (seed, level, starts, horizon, base, count) = args
    g = build_gasket_graph(level)
    snaps = geometric_ticks(horizon)
    streams = RngStream(seed)
    start_idx = [g.index_of(ab) for ab in starts]
    xy0 = g.xy[start_idx]
    counts_rows, dh_rows = [], []
    for r in range(base, base + count):
        res = evolve_gasket_system_fast(g, start_idx, horizon,
                                        streams.replicate(r), snapshot_ticks=snaps)
        counts_rows.append([s.count for s in res.states])
        dh = []
        for s in res.states:
            idx = [g.index_of(ab) for ab in s.locations]
            dh.append(hausdorff_distance(g.xy[idx], xy0))
        dh_rows.append(dh)
    return counts_rows, dh_rows


def _run_gasket_system(man: ExperimentManifest, workers: int):
    level = man.model["level"]
    g = build_gasket_graph(level)
    starts = [(a.a, a.b) for a in initial_set(man.initial, man.model)]
    snaps = geometric_ticks(man.horizon_ticks)
    bs = man.analysis["block_size"]
    blocks = [(man.seed, level, tuple(starts), man.horizon_ticks,
               base, min(bs, man.replicates - base))
              for base in range(0, man.replicates, bs)]
    parts = _parallel(_gasket_block, blocks, workers)
    counts = np.array(list(itertools.chain.from_iterable(p[0] for p in parts)))
    dh = np.array(list(itertools.chain.from_iterable(p[1] for p in parts)))
    times = np.array(snaps) * g.tick_duration()
    start_idx = [g.index_of(ab) for ab in starts]
    xy0 = g.xy[start_idx]
    d2 = ((xy0[:, None, :] - xy0[None, :, :]) ** 2).sum(axis=2)
    mesh = float(np.sqrt(d2[d2 > 0].min()))
    return g, np.array(snaps), times, counts, dh, mesh


def run_gasket_decay(man: ExperimentManifest, workers: int = 1):
    g, snaps, times, counts, dh, mesh = _run_gasket_system(man, workers)
    lo, hi = man.analysis["fit_ticks"]
    mean = counts.mean(axis=0)
    sel = (snaps >= lo) & (snaps <= hi)
    fit = fit_power_law(list(zip(times[sel], mean[sel])))
    target = man.analysis["expected_slope"]
    tol = man.analysis["slope_tolerance"]
    cap = man.analysis["final_count_cap"]
    finite_small = bool((counts[:, -1] <= cap).all())
    decreasing = bool((np.diff(counts, axis=1) <= 0).all())
    result = {
        "passed": bool(abs(fit.slope - target) <= tol and finite_small and decreasing),
        "slope": fit.slope,
        "slope_stderr": fit.stderr,
        "expected_slope": target,
        "tolerance": tol,
        "final_counts_small": finite_small,
        "counts_non_increasing": decreasing,
        "mean_final_count": float(mean[-1]),
    }
    q10 = np.quantile(counts, 0.1, axis=0)
    q90 = np.quantile(counts, 0.9, axis=0)
    rows = [(t, mc, a, b) for t, mc, a, b in zip(times, mean, q10, q90)]
    fit_report = {"experiment": man.name, "slope": fit.slope, "stderr": fit.stderr,
                  "range": [float(times[sel][0]), float(times[sel][-1])],
                  "pass": result["passed"]}
    return result, {"decay_curve.csv": ("csv", ("t", "mean_count", "q10", "q90"), rows),
                    "fit.json": ("json", fit_report)}


def run_gasket_continuity(man: ExperimentManifest, workers: int = 1):
    g, snaps, times, counts, dh, mesh = _run_gasket_system(man, workers)
    positive = snaps > 0
    med = np.median(dh[:, positive], axis=0)
    t_pos = times[positive]
    monotone = bool((np.diff(med) >= -1e-12).all())
    smallest_ok = bool(med[0] <= man.analysis["mesh_factor"] * mesh)
    rows = list(zip(t_pos, med,
                    np.quantile(dh[:, positive], 0.1, axis=0),
                    np.quantile(dh[:, positive], 0.9, axis=0)))
    result = {
        "passed": bool(monotone and smallest_ok),
        "median_monotone_to_zero": monotone,
        "smallest_t_median": float(med[0]),
        "initial_mesh": mesh,
        "mesh_factor": man.analysis["mesh_factor"],
    }
    return result, {"continuity_curve.csv":
                    ("csv", ("t", "median_dh", "q10", "q90"), rows)}


# ---------------------------------------------------------------------------
# 8. gasket maximal-inequality shape

def manifest_gasket_sup_tail() -> ExperimentManifest:
    return ExperimentManifest(
        name="gasket-sup-tail",
        model={"kind": "gasket-finite", "level": 5},
        initial={"kind": "fixed", "points": [[16, 16]]},
        horizon_ticks=125,
        replicates=100_000,
        seed=818,
        analysis={"r_grid": [round(r, 4) for r in np.linspace(0.30, 0.70, 9)],
                  "min_exceedances": 50, "r2_min": 0.9},
    )


def run_gasket_sup_tail(man: ExperimentManifest, workers: int = 1):
    g = build_gasket_graph(man.model["level"])
    table, deg, xy = g.neighbor_table, g.degrees, g.xy
    start = g.index_of(tuple(man.initial["points"][0]))
    walkers = man.replicates
    rng = RngStream(man.seed).replicate(0)
    pos = np.full(walkers, start)
    sup = np.zeros(walkers)
    x0, y0 = xy[start]
    for _ in range(man.horizon_ticks):
        pos = table[pos, (rng.random(walkers) * deg[pos]).astype(np.int64)]
        np.maximum(sup, np.hypot(xy[pos, 0] - x0, xy[pos, 1] - y0), out=sup)
    t_real = man.horizon_ticks * g.tick_duration()
    rs = np.array(man.analysis["r_grid"])
    dw = WALK_DIMENSION
    args = (rs ** dw / t_real) ** (1.0 / (dw - 1.0))
    ks = [int((sup > r).sum()) for r in rs]
    report = tail_shape_check(args, ks, [walkers] * len(rs),
                              man.analysis["min_exceedances"])
    result = {
        "passed": bool(not report.insufficient and report.slope < 0
                       and report.r_squared >= man.analysis["r2_min"]),
        "slope": report.slope,
        "r_squared": report.r_squared,
        "insufficient": report.insufficient,
        "walkers": walkers,
        "time": t_real,
    }
    rows = list(zip(rs, args, ks, [walkers] * len(rs)))
    return result, {"sup_tail.csv":
                    ("csv", ("r", "bound_argument", "exceed", "total"), rows)}


# ---------------------------------------------------------------------------
# 9. continuum stable sup-tail

def manifest_stable_sup_tail() -> ExperimentManifest:
    return ExperimentManifest(
        name="stable-sup-tail",
        model={"kind": "continuum-stable", "alpha": 1.5, "c": 1.0, "upsilon": 0.0},
        horizon_ticks=64,
        replicates=1_000_000,
        seed=919,
        analysis={"u_grid": [round(u, 4) for u in np.geomspace(8, 128, 9)],
                  "expected_slope": -1.5, "slope_tolerance": 0.2,
                  "min_exceedances": 50, "path_block": 100_000},
    )


def run_stable_sup_tail(man: ExperimentManifest, workers: int = 1):
    params = StableParams(man.model["alpha"], man.model.get("c", 1.0),
                          man.model.get("upsilon", 0.0))
    k_steps = man.horizon_ticks
    paths = man.replicates
    block = man.analysis["path_block"]
    rng = RngStream(man.seed).replicate(0)
    sup = np.empty(paths)
    for b in range(0, paths, block):
        size = min(block, paths - b)
        inc = stable_increment(params, 1.0 / k_steps, rng, size=(size, k_steps))
        sup[b:b + size] = np.abs(np.cumsum(inc, axis=1)).max(axis=1)
    us = np.array(man.analysis["u_grid"])
    ks = [int((sup > u).sum()) for u in us]
    report = tail_shape_check(np.log(us), ks, [paths] * len(us),
                              man.analysis["min_exceedances"])
    target = man.analysis["expected_slope"]
    tol = man.analysis["slope_tolerance"]
    result = {
        "passed": bool(not report.insufficient and abs(report.slope - target) <= tol),
        "slope": report.slope,
        "slope_stderr": report.stderr,
        "expected_slope": target,
        "tolerance": tol,
    }
    rows = list(zip(us, ks, [paths] * len(us)))
    return result, {"stable_tail.csv": ("csv", ("u", "exceed", "total"), rows)}


# ---------------------------------------------------------------------------
# 10. closed-form integral vs quadrature

def manifest_gamma_integral() -> ExperimentManifest:
    return ExperimentManifest(
        name="gamma-integral-quadrature",
        model={"kind": "continuum-stable", "alpha": 1.5},
        replicates=20,
        seed=1010,
        analysis={"rel_err_max": 1e-8, "alpha_range": [1.1, 4.0],
                  "beta_range": [0.3, 2.3], "a_range": [0.2, 5.2]},
    )


def run_gamma_integral(man: ExperimentManifest, workers: int = 1):
    rng = RngStream(man.seed).replicate(0)
    a_lo, a_hi = man.analysis["alpha_range"]
    b_lo, b_hi = man.analysis["beta_range"]
    c_lo, c_hi = man.analysis["a_range"]
    rows = []
    worst = 0.0
    for _ in range(man.replicates):
        alpha = a_lo + (a_hi - a_lo) * rng.random()
        beta = b_lo + (b_hi - b_lo) * rng.random()
        a = c_lo + (c_hi - c_lo) * rng.random()
        closed = closed_form_gamma_integral(alpha, beta, a)
        quad = gamma_integral_quadrature(alpha, beta, a)
        rel = abs(closed - quad) / abs(closed)
        worst = max(worst, rel)
        rows.append((alpha, beta, a, closed, quad, rel))
    result = {
        "passed": bool(worst <= man.analysis["rel_err_max"]),
        "worst_rel_err": worst,
        "trials": man.replicates,
    }
    header = ("alpha", "beta", "a", "closed_form", "quadrature", "rel_err")
    return result, {"gamma_integral.csv": ("csv", header, rows)}


# ---------------------------------------------------------------------------
# 11. pigeonhole property

def manifest_pigeonhole() -> ExperimentManifest:
    return ExperimentManifest(
        name="pigeonhole-property",
        model={"kind": "lattice-line", "alpha": 1.5, "truncation": 4},
        replicates=1000,
        seed=1111,
        analysis={"max_particles": 60, "max_boxes": 12},
    )


def run_pigeonhole(man: ExperimentManifest, workers: int = 1):
    rng = RngStream(man.seed).replicate(0)
    violations = 0
    for _ in range(man.replicates):
        m_particles = int(rng.integers(1, man.analysis["max_particles"] + 1))
        n_boxes = int(rng.integers(1, man.analysis["max_boxes"] + 1))
        assignment = [int(b) for b in rng.integers(0, n_boxes, size=m_particles)]
        pairs = pigeonhole_pairs(assignment)
        occupied = len(set(assignment))
        ok = len(pairs) >= math.ceil((m_particles - occupied) / 2)
        used = [p for pair in pairs for p in pair]
        ok = ok and len(used) == len(set(used))
        ok = ok and all(assignment[a] == assignment[b] for a, b in pairs)
        if not ok:
            violations += 1
    result = {"passed": violations == 0, "violations": violations,
              "assignments": man.replicates}
    return result, {}


# ---------------------------------------------------------------------------
# 12. engine equivalence

def manifest_engine_equivalence() -> ExperimentManifest:
    return ExperimentManifest(
        name="engine-equivalence",
        model={"kind": "lattice-circle", "alpha": 1.5, "hold_prob": 0.5,
               "circumference": 12, "truncation": 6},
        horizon_ticks=20,
        replicates=100,
        seed=1212,
        analysis={"gasket_level": 2},
    )


def run_engine_equivalence(man: ExperimentManifest, workers: int = 1):
    law = build_step_law(man.model)
    L = man.model["circumference"]
    graph = build_gasket_graph(man.analysis["gasket_level"])
    side = 2 ** man.analysis["gasket_level"]
    cases = [
        (LatticeCircleModel(law, L), [0, L // 4, L // 2, 3 * L // 4]),
        (GasketModel(graph), [graph.index_of((0, 0)), graph.index_of((side, 0)),
                              graph.index_of((0, side)),
                              graph.index_of((side // 2, side // 2))]),
    ]
    ticks = man.horizon_ticks
    mismatches = 0
    for case_id, (model, starts) in enumerate(cases):
        for s in range(man.replicates // len(cases)):
            streams = RngStream(man.seed + 1000 * case_id + s)
            online = evolve_coalescing(starts, model, ticks,
                                       lambda loc: streams.particle(0, loc))
            paths = []
            for st in starts:
                gen = streams.particle(0, model.location(st))
                path, x = [st], st
                for _ in range(ticks):
                    x = model.step(x, gen)
                    path.append(x)
                paths.append(path)
            offline = events_from_paths(paths, None, model.tick_duration,
                                        model.location)
            if online.log.events != offline.events:
                mismatches += 1
    result = {"passed": mismatches == 0, "mismatches": mismatches,
              "systems": man.replicates}
    return result, {}


# ---------------------------------------------------------------------------
# registry

@dataclass(frozen=True)
class Registration:
    criterion: int
    description: str
    build: Callable[[], ExperimentManifest]
    run: Callable[[ExperimentManifest, int], tuple]


EXPERIMENTS: dict[str, Registration] = {
    "exchangeability-oracle": Registration(
        1, "ranking-invariance of the coalescing law, exact",
        manifest_exchangeability, run_exchangeability),
    "folding-oracle": Registration(
        2, "window walk folds onto the unit gasket walk, exact",
        manifest_folding, run_folding),
    "gasket-scaling-collapse": Registration(
        3, "pair collision probability collapses across triangle scales",
        manifest_scaling_collapse, run_scaling_collapse),
    "circle-tau-scaling": Registration(
        4, "first-coalescence time scaling on the lattice circle",
        manifest_circle_tau, run_circle_tau),
    "circle-exceedance": Registration(
        5, "class-count exceedance decay on the lattice circle",
        manifest_circle_exceedance, run_circle_exceedance),
    "gasket-decay": Registration(
        6, "gasket class-count decay exponent",
        manifest_gasket_decay, run_gasket_decay),
    "gasket-continuity": Registration(
        7, "continuity of the occupied set at time zero",
        manifest_gasket_continuity, run_gasket_continuity),
    "gasket-sup-tail": Registration(
        8, "maximal-displacement tail shape on the gasket",
        manifest_gasket_sup_tail, run_gasket_sup_tail),
    "stable-sup-tail": Registration(
        9, "stable sup-displacement tail exponent",
        manifest_stable_sup_tail, run_stable_sup_tail),
    "gamma-integral-quadrature": Registration(
        10, "closed-form integral vs adaptive quadrature",
        manifest_gamma_integral, run_gamma_integral),
    "pigeonhole-property": Registration(
        11, "disjoint within-box pair count bound",
        manifest_pigeonhole, run_pigeonhole),
    "engine-equivalence": Registration(
        12, "online engine reproduces the offline collision rule, bit-exact",
        manifest_engine_equivalence, run_engine_equivalence),
}


def get_experiment(name: str) -> Registration:
    if name not in EXPERIMENTS:
        raise ParameterError(f"unknown experiment {name!r}; "
                             f"known: {sorted(EXPERIMENTS)}")
    return EXPERIMENTS[name]


def run_named_experiment(man: ExperimentManifest, workers: int = 1):
    validate_manifest(man)
    reg = get_experiment(man.name)
    return reg.run(man, workers)
