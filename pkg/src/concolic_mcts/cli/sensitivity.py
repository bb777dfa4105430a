"""One-factor-at-a-time hyperparameter study against a baseline.

Every setting changes exactly one field of the baseline HyperParams. Each
(benchmark, seed) pair is run under both, and the final branch coverage
values are compared with a paired two-tailed t-test.
"""
import csv
import io
import math

import numpy as np
from scipy import stats as sps

from ..mcts.engine import HyperParams, run

BASELINE = dict(rho=math.sqrt(2), cores=8, tree_depth=10 ** 5, n_samples=1, score="uct")

SETTINGS = [
    ("baseline", {}),
    ("score", {"score": "random"}),
    ("rho", {"rho": 0.0}),
    ("rho", {"rho": 0.0025}),
    ("rho", {"rho": 100.0}),
    ("cores", {"cores": 1}),
    ("cores", {"cores": 4}),
    ("tree_depth", {"tree_depth": 10 ** 2}),
    ("tree_depth", {"tree_depth": 10 ** 3}),
    ("tree_depth", {"tree_depth": 10 ** 7}),
    ("conex_budget", {"conex_budget": 2000}),
    ("symex_budget", {"symex_budget": 2000}),
    ("n_samples", {"n_samples": 3}),
    ("n_samples", {"n_samples": 5}),
]

COLUMNS = ["setting", "value", "mean_cov", "p_value"]


def paired_p(a, b):
    """Two-tailed paired t-test; 1.0 when every difference is zero."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if np.all(a == b):
        return 1.0
    return float(sps.ttest_rel(a, b).pvalue)


def coverage_cell(p, hp):
    eng, _, _ = run(p, hp)
    return eng.branch_cov


def sensitivity(programs, seeds, sim_budget=30, settings=None, base=None, progress=None):
    """programs: {name: IrProgram}. Returns a list of row dicts."""
    if len(programs) < 2 or len(seeds) < 2:
        raise ValueError("need at least two benchmarks and two seeds")
    settings = SETTINGS if settings is None else settings
    base = dict(BASELINE, **(base or {}))
    names = sorted(programs)
    results = {}
    for i, (label, override) in enumerate(settings):
        covs = []
        for name in names:
            for seed in seeds:
                hp = HyperParams(**dict(base, **override, seed=seed, sim_budget=sim_budget))
                covs.append(coverage_cell(programs[name], hp))
        results[i] = covs
        if progress:
            progress(label, override)
    base_idx = next(i for i, (_, o) in enumerate(settings) if not o)
    rows = []
    for i, (label, override) in enumerate(settings):
        covs = results[i]
        value = next(iter(override.values())) if override else ""
        row = {"setting": label, "value": value,
               "mean_cov": f"{float(np.mean(covs)):.6f}",
               "p_value": f"{paired_p(covs, results[base_idx]):.6g}"}
        k = 0
        for name in names:
            n = len(seeds)
            row[name] = f"{float(np.mean(covs[k:k + n])):.6f}"
            k += n
        rows.append(row)
    return rows


def to_csv(rows):
    buf = io.StringIO()
    fields = COLUMNS + [k for k in rows[0] if k not in COLUMNS] if rows else COLUMNS
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
