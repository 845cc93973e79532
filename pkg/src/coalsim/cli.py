"""Command-line entry points.

Subcommands: ``simulate`` runs an experiment manifest (named experiments
dispatch to their registered runner; generic system manifests produce event
logs and set-state dumps), ``oracle`` runs exact checks, ``analyze``
reduces a bundle's event log to survival curves and fits, ``verify`` runs
the full acceptance suite, and ``list-experiments`` shows the registry.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import harness
from .analysis import fit_power_law, survival_curve
from .engine import (
    evolve_circle_system_fast,
    evolve_gasket_system_fast,
    geometric_ticks,
)
from .errors import CoalsimError
from .experiments import EXPERIMENTS
from .gasket import build_gasket_graph
from .manifest import ExperimentManifest, build_step_law, initial_set, validate_manifest
from .oracle import (
    brute_collision_prob,
    enumerate_coalescing_distribution,
    exchangeability_check,
    folding_check,
    graph_step_kernel,
)
from .samplers import RngStream


def _load_manifest(path: str, seed=None) -> ExperimentManifest:
    man = ExperimentManifest.from_json(Path(path).read_text())
    if seed is not None:
        man.seed = seed
    return man


def cmd_simulate(args) -> int:
    man = _load_manifest(args.manifest, args.seed)
    validate_manifest(man, budget=args.budget)
    out = Path(args.out_dir)
    if man.name in EXPERIMENTS:
        result = harness.run_experiment(man, out, workers=args.workers)
        print(json.dumps({k: result[k] for k in ("experiment", "passed", "content_hash")}))
        return 0 if result["passed"] else 1
    return _simulate_generic(man, out)


def _simulate_generic(man: ExperimentManifest, out: Path) -> int:
    kind = man.model["kind"]
    streams = RngStream(man.seed)
    snaps = geometric_ticks(man.horizon_ticks)
    logs, state_blobs = [], []
    if kind == "lattice-circle":
        law = build_step_law(man.model)
        L = man.model["circumference"]
        for rep in range(man.replicates):
            rng = streams.replicate(rep)
            starts = initial_set(man.initial, man.model, rng)
            res = evolve_circle_system_fast(law, L, starts, man.horizon_ticks,
                                            rng, snapshot_ticks=snaps)
            logs.append(res.log)
            state_blobs.append(res.states)
    elif kind in ("gasket-finite", "gasket-window"):
        g = build_gasket_graph(man.model["level"], man.model.get("window_exponent", 0))
        for rep in range(man.replicates):
            rng = streams.replicate(rep)
            pts = initial_set(man.initial, man.model, rng)
            starts = [g.index_of(p) for p in pts]
            res = evolve_gasket_system_fast(g, starts, man.horizon_ticks, rng,
                                            snapshot_ticks=snaps)
            logs.append(res.log)
            state_blobs.append(res.states)
    else:
        print(f"generic simulate does not support model kind {kind!r}", file=sys.stderr)
        return 2
    rows = harness.event_log_csv_rows(logs)
    artifacts = {
        "eventlog.csv": ("csv", ("replicate", "tick", "time", "absorbed",
                                 "survivor", "location"), rows),
    }
    result = {
        "passed": True,
        "replicates": man.replicates,
        "total_events": len(rows),
        "escaped_replicates": sum(1 for log in logs if log.escaped),
    }
    enriched = harness.write_bundle(out, man, result, artifacts)
    bundle = out / man.name
    blob = b"".join(harness.set_states_jsonl(states) for states in state_blobs)
    (bundle / "setstates.jsonl").write_bytes(blob)
    print(json.dumps({"experiment": man.name, "content_hash": enriched["content_hash"],
                      "events": len(rows)}))
    return 0


def cmd_oracle(args) -> int:
    man = _load_manifest(args.manifest, args.seed)
    check = man.analysis.get("check", "exchangeability")
    g = build_gasket_graph(man.model["level"], man.model.get("window_exponent", 0),
                           budget=args.budget)
    kern = graph_step_kernel(g)
    points = [g.index_of(tuple(p)) for p in man.initial["points"]]
    if check == "exchangeability":
        tv = exchangeability_check(kern, points, man.horizon_ticks)
        table = enumerate_coalescing_distribution(kern, points, None, man.horizon_ticks)
        report = {
            "instance": f"{man.model['kind']} level {man.model['level']}",
            "rankings": math.factorial(len(points)),
            "tv_max": str(tv),
            "probability_tables_hash": table.content_hash(),
        }
    elif check == "folding":
        tv = folding_check(g, points[0], man.horizon_ticks)
        report = {"instance": f"window 2^{g.window_exponent} level {g.level}",
                  "rankings": 1, "tv_max": str(tv), "probability_tables_hash": ""}
    elif check == "collision":
        p = brute_collision_prob(kern, points[0], points[1], man.horizon_ticks)
        report = {"instance": f"{man.model['kind']} level {man.model['level']}",
                  "rankings": 1, "tv_max": "", "collision_probability": str(p),
                  "probability_tables_hash": ""}
    else:
        print(f"unknown oracle check {check!r}", file=sys.stderr)
        return 2
    harness.write_bundle(Path(args.out_dir), man, {"passed": True, **report},
                         {"oracle_report.json": ("json", report)})
    print(json.dumps(report))
    return 0


def cmd_analyze(args) -> int:
    bundle = Path(args.bundle)
    import csv as _csv

    from .engine import Event, EventLog
    with (bundle / "eventlog.csv").open() as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        col = {name: i for i, name in enumerate(header)}
        logs: dict[int, EventLog] = {}
        man = ExperimentManifest.from_json((bundle / "manifest.json").read_text())
        for row in reader:
            rep = int(row[col["replicate"]])
            tick = int(row[col["tick"]])
            dt = float(row[col["time"]]) / tick if tick else 1.0
            log = logs.setdefault(rep, EventLog(0, dt))
            log.events.append(Event(tick, int(row[col["absorbed"]]),
                                    int(row[col["survivor"]]), row[col["location"]]))
    n0 = man.initial.get("n", 0) or max(
        (len(l.events) for l in logs.values()), default=0) + 1
    for log in logs.values():
        log.n_initial = n0
    ticks = geometric_ticks(man.horizon_ticks)
    ms = sorted({max(1, n0 // 2 ** i) for i in range(1, 8)})
    curve = survival_curve(list(logs.values()), ticks, ms)
    rows = []
    for j, t in enumerate(curve.times):
        for i, m in enumerate(curve.m_values):
            rows.append((t, curve.mean[j], curve.q10[j], curve.q90[j], m,
                         curve.exceed_prob[i, j], curve.exceed_ci_low[i, j],
                         curve.exceed_ci_high[i, j]))
    positive = [(t, mc) for t, mc in zip(curve.times, curve.mean) if t > 0 and mc > 0]
    fit = fit_power_law(positive) if len(positive) >= 4 else None
    art = {"survival_curve.csv": ("csv", ("t", "mean_count", "q10", "q90", "m",
                                          "exceed_prob", "ci_lo", "ci_hi"), rows)}
    if fit:
        art["fit.json"] = ("json", {"experiment": man.name, "slope": fit.slope,
                                    "stderr": fit.stderr, "range": list(fit.fit_range),
                                    "pass": True})
    harness.write_bundle(bundle.parent, man, {"passed": True, "replicates": len(logs)}, art)
    print(json.dumps({"replicates": len(logs), "time_points": len(curve.times)}))
    return 0


def cmd_verify(args) -> int:
    out = Path(args.out_dir)
    names = sorted(EXPERIMENTS, key=lambda n: EXPERIMENTS[n].criterion)
    failures = 0
    for name in names:
        reg = EXPERIMENTS[name]
        man = reg.build()
        if args.seed is not None:
            man.seed = args.seed
        result = harness.run_experiment(man, out, workers=args.workers)
        status = "PASS" if result["passed"] else "FAIL"
        print(f"{status} criterion {reg.criterion:2d} [{name}] {reg.description}")
        if not result["passed"]:
            failures += 1
    report = harness.assemble_report(out, names)
    print(f"report: {out / 'report.json'}  all_passed={report['all_passed']}")
    return 0 if failures == 0 else 1


def cmd_list(args) -> int:
    for name in sorted(EXPERIMENTS, key=lambda n: EXPERIMENTS[n].criterion):
        reg = EXPERIMENTS[name]
        print(f"{reg.criterion:2d}  {name:28s} {reg.description}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="coalsim",
                                     description="coalescing particle system simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="override the manifest seed")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes for replicate blocks")
        p.add_argument("--out-dir", default="out", help="output directory")
        p.add_argument("--budget", type=int, default=3 ** 14,
                       help="triangle/enumeration budget")

    p = sub.add_parser("simulate", help="run an experiment manifest")
    p.add_argument("manifest")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="run an exact oracle check")
    p.add_argument("manifest")
    common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("analyze", help="reduce a bundle's event logs")
    p.add_argument("bundle")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="run the acceptance suite")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("list-experiments", help="list named experiments")
    p.set_defaults(func=cmd_list)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CoalsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
