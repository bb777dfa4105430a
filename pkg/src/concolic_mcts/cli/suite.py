"""Writing and replaying test suites.

Layout of an output directory:

    suite.json    manifest: program hash, hyperparameters, coverage, tests
    test_<seq>.bin  one input vector per discovered path
    stats.csv     one row per iteration
    stats.json    run-level counters
"""
import csv
import hashlib
import io
import json
from pathlib import Path

from ..mcts.engine import CSV_COLUMNS
from .coverage import replay_inputs


def program_hash(text):
    return hashlib.sha256(text.encode()).hexdigest()


def stats_csv(stats):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in stats.rows:
        w.writerow(row)
    return buf.getvalue()


def stats_summary(eng, stats):
    return {
        "stop_reason": stats.stop_reason,
        "iterations": stats.iterations,
        "solver_calls": stats.solver_calls,
        "paths": len(eng.registry),
        "branch_cov": eng.branch_cov,
        "proved": eng.proved,
        "first_full_coverage": stats.first_full_coverage,
        "mutants": stats.mutants,
        "mutants_preserved": stats.mutants_preserved,
        "preservation_rate": stats.preservation_rate,
        "solver_inputs": stats.solver_inputs,
        "solver_preserved": stats.solver_preserved,
        "new_paths_by": stats.new_paths_by,
        "symex_budget_hits": stats.symex_budget_hits,
        "errors": stats.errors,
    }


def write_suite(out, source_text, eng, suite, stats):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    tests = []
    for seq, case in enumerate(suite):
        name = f"test_{seq:05d}.bin"
        (out / name).write_bytes(case.data)
        tests.append({"file": name, "first_new_path_iter": case.iteration,
                      "origin": case.tag})
    manifest = {
        "program_hash": program_hash(source_text),
        "hp": eng.hp.as_dict(),
        "branch_cov": eng.branch_cov,
        "paths": len(eng.registry),
        "tests": tests,
    }
    (out / "suite.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / "stats.csv").write_text(stats_csv(stats))
    (out / "stats.json").write_text(
        json.dumps(stats_summary(eng, stats), indent=2, sort_keys=True) + "\n")
    return manifest


def read_suite(out):
    out = Path(out)
    manifest = json.loads((out / "suite.json").read_text())
    inputs = [(out / t["file"]).read_bytes() for t in manifest["tests"]]
    return manifest, inputs


def replay(out, p, source_text=None):
    """Re-execute a stored suite; returns (report, manifest, hash_matches)."""
    manifest, inputs = read_suite(out)
    hp = manifest.get("hp", {})
    report, _ = replay_inputs(p, inputs, hp.get("tree_depth", 10 ** 5),
                              hp.get("conex_budget", 20000))
    same = source_text is None or program_hash(source_text) == manifest["program_hash"]
    return report, manifest, same
