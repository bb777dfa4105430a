"""Branch coverage over the arms of every Branch terminator."""
from dataclasses import dataclass, field

from ..concrete import execute
from ..lang.ir import branch_addresses


@dataclass
class CoverageReport:
    branches_total: int
    branches_hit: int
    paths_found: int
    hits: dict = field(default_factory=dict)  # "f0.b1" -> number of traces

    @property
    def branch_cov(self):
        if not self.branches_total:
            return 1.0
        return self.branches_hit / self.branches_total

    def as_dict(self):
        return {"branches_total": self.branches_total,
                "branches_hit": self.branches_hit,
                "branch_cov": self.branch_cov,
                "paths_found": self.paths_found,
                "hits": self.hits}


def coverage_of(p, traces):
    arms = branch_addresses(p)
    hits = {str(a): 0 for a in arms}
    paths = set()
    for t in traces:
        addrs = getattr(t, "addrs", t)
        paths.add(tuple(addrs))
        for a in set(addrs):
            hits[str(a)] += 1
    hit = sum(1 for v in hits.values() if v)
    return CoverageReport(len(arms), hit, len(paths), hits)


def replay_inputs(p, inputs, depth_cap=10 ** 5, step_cap=20000):
    traces = [execute(p, d, depth_cap, step_cap) for d in inputs]
    return coverage_of(p, traces), traces
