"""Experiment orchestration and artifact persistence.

A bundle directory holds the manifest echo, a result summary, and the data
files an experiment produced.  Every file embeds or sits beside the
manifest's content hash; re-running the same manifest reproduces the same
bytes, recorded in ``hash.txt``.  Wall-clock timestamps live only in an
unhashed sidecar.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from pathlib import Path

import numpy as np

from .engine import EventLog
from .errors import ContractError
from .manifest import ExperimentManifest
from .experiments import EXPERIMENTS, get_experiment, run_named_experiment


def fmt17(x) -> str:
    """17-significant-digit decimal text: bit-faithful double round trip."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([x if isinstance(x, str) else fmt17(x) for x in row])
    return buf.getvalue().encode()


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


def write_bundle(out_dir: Path, man: ExperimentManifest, result: dict,
                 artifacts: dict) -> dict:
    """Write an experiment bundle; returns the result enriched with hashes."""
    out_dir = Path(out_dir)
    bundle = out_dir / man.name
    bundle.mkdir(parents=True, exist_ok=True)
    man_hash = man.content_hash()

    files: dict[str, bytes] = {"manifest.json": (man.canonical_json() + "\n").encode()}
    for fname, spec in artifacts.items():
        kind = spec[0]
        if kind == "csv":
            _, header, rows = spec
            files[fname] = _csv_bytes(("manifest_hash",) + tuple(header),
                                      [(man_hash,) + tuple(r) for r in rows])
        elif kind == "json":
            obj = dict(spec[1])
            obj["manifest_hash"] = man_hash
            files[fname] = _json_bytes(obj)
        else:
            raise ContractError(f"unknown artifact kind {kind!r}")

    result = dict(result)
    result["manifest_hash"] = man_hash
    result["experiment"] = man.name
    files["result.json"] = _json_bytes(result)

    digest = hashlib.sha256()
    for fname in sorted(files):
        digest.update(fname.encode())
        digest.update(files[fname])
    content_hash = digest.hexdigest()
    files["hash.txt"] = (content_hash + "\n").encode()

    for fname, blob in files.items():
        (bundle / fname).write_bytes(blob)
    (bundle / "timestamps.json").write_bytes(
        _json_bytes({"written_at_unix": time.time()}))

    result["content_hash"] = content_hash
    return result


def run_experiment(man: ExperimentManifest, out_dir, workers: int = 1) -> dict:
    """Run a named experiment and persist its bundle."""
    result, artifacts = run_named_experiment(man, workers)
    return write_bundle(Path(out_dir), man, result, artifacts)


def assemble_report(out_dir, names=None) -> dict:
    """Aggregate bundle results into report.json, rejecting orphan outputs
    whose embedded manifest hash does not match the bundle's manifest."""
    out_dir = Path(out_dir)
    names = list(names) if names is not None else sorted(EXPERIMENTS)
    entries = []
    for name in names:
        bundle = out_dir / name
        man = ExperimentManifest.from_json((bundle / "manifest.json").read_text())
        expect = man.content_hash()
        result = json.loads((bundle / "result.json").read_text())
        if result.get("manifest_hash") != expect:
            raise ContractError(f"orphan result in {bundle}: manifest hash mismatch")
        for f in bundle.glob("*.csv"):
            with f.open() as fh:
                reader = csv.reader(fh)
                header = next(reader)
                first = next(reader, None)
            if first is not None and header[0] == "manifest_hash" and first[0] != expect:
                raise ContractError(f"orphan output {f}: manifest hash mismatch")
        entries.append({
            "criterion": get_experiment(name).criterion,
            "experiment": name,
            "description": get_experiment(name).description,
            "passed": bool(result["passed"]),
        })
    entries.sort(key=lambda e: e["criterion"])
    report = {"criteria": entries,
              "all_passed": all(e["passed"] for e in entries)}
    (out_dir / "report.json").write_bytes(_json_bytes(report))
    return report


def event_log_csv_rows(logs: list[EventLog]):
    """Long-format event rows: (replicate, tick, time, absorbed, survivor, location)."""
    rows = []
    for rep, log in enumerate(logs):
        rows.extend(log.csv_rows(rep))
    return rows


def set_states_jsonl(states) -> bytes:
    """One JSON object per sampled set state: {t, count, locations}."""
    lines = []
    for s in states:
        lines.append(json.dumps(
            {"t": s.time, "count": s.count,
             "locations": [list(l) if isinstance(l, tuple) else l
                           for l in s.locations]},
            sort_keys=True))
    return ("\n".join(lines) + "\n").encode()
