"""The search loop: selection, simulation, expansion, back-propagation."""
import logging
import math
import random
import time
from dataclasses import asdict, dataclass, field

from ..appfuzz import MUTANT, SOLVER, app_fuzz, new_sampler
from ..concrete import SEED_INPUT, WorkerPool, execute, usable_cores
from ..lang.ir import branch_addresses
from ..solver.core import BitBudgetExceeded, Solver, bits_to_input, to_input_vector
from ..symex.executor import (DEFAULT_SYMEX_BUDGET, BudgetExceeded, Terminal,
                              advance, arms_of, initial_state)
from .tree import Kind, Node, Reason, uct_score

log = logging.getLogger("concolic_mcts")

SEED = "seed"


class NothingSelectable(Exception):
    pass


@dataclass
class HyperParams:
    rho: float = math.sqrt(2)
    cores: int = 8
    tree_depth: int = 10 ** 5
    conex_budget: int = 20000
    symex_budget: int = DEFAULT_SYMEX_BUDGET
    n_samples: int = 1
    persistent: bool = False
    seed: int = 0
    sim_budget: int = 1000
    score: str = "uct"
    mutation_depth: int = 1
    max_seconds: float = 0.0  # 0 disables the wall-clock guard

    def __post_init__(self):
        if not self.rho >= 0:
            raise ValueError("rho must be >= 0")
        for name in ("cores", "tree_depth", "conex_budget", "symex_budget",
                     "n_samples", "sim_budget", "mutation_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.score not in ("uct", "random"):
            raise ValueError("score must be 'uct' or 'random'")

    def as_dict(self):
        return asdict(self)


@dataclass
class TestCase:
    data: bytes
    iteration: int
    tag: str
    trace: tuple


CSV_COLUMNS = ["iter", "selected_path_len", "node_kind", "batch_size",
               "solver_calls", "new_paths", "total_paths", "branch_cov",
               "preservation_rate", "wall_ms"]


@dataclass
class RunStats:
    rows: list = field(default_factory=list)
    stop_reason: str = ""
    iterations: int = 0
    solver_calls: int = 0
    mutants: int = 0
    mutants_preserved: int = 0
    solver_inputs: int = 0
    solver_preserved: int = 0
    new_paths_by: dict = field(default_factory=lambda: {SEED: 0, SOLVER: 0, MUTANT: 0})
    symex_budget_hits: int = 0
    errors: int = 0
    first_full_coverage: int = -1

    @property
    def preservation_rate(self):
        if not self.mutants:
            return None
        return self.mutants_preserved / self.mutants


class Engine:
    def __init__(self, p, hp=None, solver=None, on_iteration=None,
                 record_choices=False, wall_clock=False):
        self.p = p
        self.hp = hp or HyperParams()
        self.solver = solver or Solver()
        self.rng = random.Random(self.hp.seed)
        self.on_iteration = on_iteration
        self.record_choices = record_choices
        self.choices = []
        self.wall_clock = wall_clock
        self.serial = 0
        self.registry = {}
        self.suite = []
        self.stats = RunStats()
        self.branches = branch_addresses(p)
        self.hit = set()
        self.iteration = 0
        self.pool = WorkerPool(p, usable_cores(self.hp.cores))
        self.root = self._node(None, None, Kind.SOLID)
        self.root.state = initial_state(p)
        self.root.sim = self._node(None, self.root, Kind.SIMULATION)
        self._stops = []  # (node, input) pairs that end a run at node
        self._visit(self.root)
        self.finished = False

    # bookkeeping

    def _node(self, addr, parent, kind):
        self.serial += 1
        return Node(addr, parent, kind, self.serial)

    @property
    def branch_cov(self):
        if not self.branches:
            return 1.0
        return len(self.hit) / len(self.branches)

    @property
    def paths(self):
        return set(self.registry)

    # symbolic state

    def _attach(self, node, st):
        node.state = st
        if st.branch_conjunct is None and node.parent is not None:
            node.kind = Kind.REDUNDANT
            node.reason = Reason.TAUTOLOGY_DUPLICATE
        else:
            node.kind = Kind.SOLID
            if node.sim is None:
                node.sim = self._node(None, node, Kind.SIMULATION)

    def _visit(self, node):
        """Promote a hollow node and solve its next branch if not done yet."""
        if node.kind is Kind.HOLLOW:
            parent = node.parent
            if parent.arms is None:
                return
            st = parent.arms.get(node.addr)
            if st is None:
                node.kind = Kind.REDUNDANT
                node.reason = Reason.MISMATCH_OBSERVED
                return
            self._attach(node, st)
        if node.state is None or node.arms is not None or node.symex_failed:
            return
        if node.kind is Kind.PHANTOM or node.capped:
            return
        try:
            d = advance(self.p, node.state, self.hp.symex_budget, self.solver)
            if isinstance(d, Terminal):
                arms = []
            else:
                arms = arms_of(d, self.solver, node.state.pc)
        except (BudgetExceeded, BitBudgetExceeded):
            node.symex_failed = True
            self.stats.symex_budget_hits += 1
            return
        node.domain = d.state.input_widths
        node.approx = d.state.concretized
        if not isinstance(d, Terminal) and d.witness is not None:
            node.may_stop = True
            self._stops.append((node, to_input_vector(d.witness)))
        node.arms = {a.address: a.state for a in arms}
        for addr, st in node.arms.items():
            if addr not in node.children:
                ph = self._node(addr, node, Kind.PHANTOM)
                ph.state = st
                node.children[addr] = ph
        for addr, child in node.children.items():
            if addr not in node.arms and child.kind is Kind.HOLLOW:
                child.kind = Kind.REDUNDANT
                child.reason = Reason.MISMATCH_OBSERVED

    # selection

    def _selectable(self, c):
        if c.pruned or c.is_mismatch:
            return False
        if c.kind is Kind.HOLLOW and c.parent.arms is None:
            return False  # no symbolic state can be derived for it
        return True

    def _score(self, c, parent):
        if self.hp.score == "random":
            return self.rng.random()
        return uct_score(c.n_win, c.n_sel, parent.n_sel, self.hp.rho)

    def select(self):
        """Descend from the root to a simulation or phantom node."""
        path = [self.root]
        while True:
            node = path[-1]
            self._visit(node)
            if node.kind in (Kind.SIMULATION, Kind.PHANTOM):
                return path
            self._refresh(node)
            cands = []
            if not node.pruned:
                cands = [c for c in node.children.values() if self._selectable(c)]
                if node.sim is not None and not node.sim.pruned:
                    cands.append(node.sim)
            if not cands:
                if not node.pruned:
                    node.pruned = True
                path.pop()
                if not path:
                    raise NothingSelectable
                continue
            scores = [self._score(c, node) for c in cands]
            best = max(scores)
            tied = [c for c, s in zip(cands, scores) if s == best]
            chosen = tied[0] if len(tied) == 1 else self.rng.choice(tied)
            if self.record_choices:
                self.choices.append((self.iteration, node,
                                     [(c, s, c.n_sel) for c, s in zip(cands, scores)],
                                     chosen))
            path.append(chosen)

    # simulation

    def simulate(self, target):
        """Sample inputs for the target; returns [(bytes, tag, bits)]."""
        if target.kind is Kind.SIMULATION:
            owner = target.parent
            domain = owner.domain if owner.domain is not None else owner.state.input_widths
        else:
            owner = target
            domain = target.state.input_widths
        if target.sampler is None and owner.sampler is not None and target is not owner:
            if owner.sampler.widths == tuple(domain):
                target.sampler = owner.sampler
            owner.sampler = None
        if target.sampler is None:
            target.sampler = new_sampler(owner.state.pc, domain,
                                         seed=f"{self.hp.seed}:{target.serial}",
                                         mutation_depth=self.hp.mutation_depth)
        st = target.sampler
        try:
            out, _ = app_fuzz(st, self.hp.n_samples, self.solver)
        except BitBudgetExceeded:
            st.exhausted = True
            self.stats.errors += 1
            out = []
        return [(bits_to_input(bits, st.widths), tag) for bits, tag in out]

    # expansion

    def integrate(self, trace, data, tag):
        """Walk a trace into the tree; returns (nodes, is_new)."""
        node = self.root
        nodes = [node]
        for addr in trace.addrs:
            child = node.children.get(addr)
            if child is None:
                child = self._node(addr, node, Kind.HOLLOW)
                if node.arms is not None and addr not in node.arms:
                    child.kind = Kind.REDUNDANT
                    child.reason = Reason.MISMATCH_OBSERVED
                node.children[addr] = child
            elif child.kind is Kind.PHANTOM:
                # the phantom's sampler stays on the node; its simulation
                # child resumes it rather than re-solving the same pc
                self._attach(child, child.state)
            node = child
            nodes.append(node)
        if trace.outcome.capped:
            node.capped = True
        else:
            node.outcome = trace.outcome
        key = trace.addrs
        if key in self.registry:
            return nodes, False
        self.registry[key] = len(self.suite)
        self.suite.append(TestCase(bytes(data), self.iteration, tag, key))
        self.stats.new_paths_by[tag] += 1
        self.hit.update(key)
        return nodes, True

    # pruning

    def _fully_explored(self, n):
        if n.capped or n.kind is Kind.PHANTOM:
            return False
        if n.arms is None and n.kind is Kind.SOLID and n.outcome is not None:
            # a run that stopped here on a zero divisor says nothing about
            # runs that go on, so settle the next branch first
            self._visit(n)
        if n.arms is None or n.approx:
            # no trusted successors: only a leaf some run ended at
            return n.outcome is not None and not n.children
        if n.may_stop and n.outcome is None:
            return False
        return all(c.fe for c in n.children.values())

    def _useless(self, n):
        if n.arms is None or n.approx:
            return False
        if n.may_stop and n.outcome is None:
            return False
        not_fe = 0
        for c in n.children.values():
            if c.is_mismatch:
                return False
            if not c.fe:
                not_fe += 1
        return not_fe < 2

    def _dead(self, n):
        if n.capped:
            return True
        if n.kind is Kind.PHANTOM:
            return n.sampler is not None and n.sampler.exhausted
        if n.kind is Kind.HOLLOW or n.is_mismatch:
            return False
        if n.arms is None and not n.symex_failed:
            return False
        if n.sim is not None and not n.sim.pruned:
            return False
        return not any(self._selectable(c) for c in n.children.values())

    def _refresh(self, n):
        persistent = self.hp.persistent
        sim = n.sim
        if sim is not None and not sim.pruned:
            if sim.sampler is not None and sim.sampler.exhausted:
                sim.pruned = True
            elif not persistent and self._useless(n):
                sim.pruned = True
        if not n.fe:
            n.fe = self._fully_explored(n)
        if not n.pruned:
            if (n.fe and not persistent) or self._dead(n):
                n.pruned = True

    def _refresh_all(self, nodes):
        for n in sorted(nodes, key=lambda x: -x.depth):
            self._refresh(n)

    # back-propagation

    def backprop(self, path, new_node_lists):
        for n in path:
            n.n_sel += 1
        for nodes in new_node_lists:
            seen = set()
            for n in nodes:
                n.n_win += 1
                seen.add(id(n))
            for n in path:
                if id(n) not in seen:
                    n.n_win += 1

    def _run_stops(self):
        """Run the zero-divisor witnesses of newly solved nodes.

        Returns the node lists of the new paths they found.
        """
        found = []
        while self._stops:
            node, data = self._stops.pop(0)
            if node.outcome is not None:
                continue
            trace = execute(self.p, data, self.hp.tree_depth, self.hp.conex_budget)
            nodes, is_new = self.integrate(trace, data, SOLVER)
            if is_new:
                found.append(nodes)
        return found

    # main loop

    def seed(self):
        trace = execute(self.p, SEED_INPUT, self.hp.tree_depth, self.hp.conex_budget)
        nodes, _ = self.integrate(trace, SEED_INPUT, SEED)
        touched = set(nodes) | {self.root}
        for ns in [nodes] + self._run_stops():
            touched.update(ns)
            for n in ns:
                n.n_win += 1
        self._refresh_all(touched)
        if self.branch_cov == 1.0 and self.stats.first_full_coverage < 0:
            self.stats.first_full_coverage = 0

    def step(self):
        """One iteration. Returns the CSV row, or None once the run ends."""
        if self.finished:
            return None
        if self.root.pruned:
            self.stats.stop_reason = "fully_explored" if self.root.fe else "nothing_selectable"
            self.finished = True
            return None
        t0 = time.perf_counter()
        calls0 = self.solver.calls
        self.iteration += 1
        try:
            path = self.select()
        except NothingSelectable:
            self.iteration -= 1
            self.stats.stop_reason = "fully_explored" if self.root.fe else "nothing_selectable"
            self.finished = True
            return None
        target = path[-1]
        kind = target.kind
        batch = self.simulate(target)
        traces = self.pool.map([d for d, _ in batch], self.hp.tree_depth,
                               self.hp.conex_budget)
        prefix = target.path()
        touched = set(path)
        new_lists = []
        for (data, tag), trace in zip(batch, traces):
            keep = trace.starts_with(prefix)
            if tag == MUTANT:
                self.stats.mutants += 1
                self.stats.mutants_preserved += keep
            else:
                self.stats.solver_inputs += 1
                self.stats.solver_preserved += keep
            nodes, is_new = self.integrate(trace, data, tag)
            if is_new:
                new_lists.append(nodes)
                touched.update(nodes)
        for nodes in self._run_stops():
            new_lists.append(nodes)
            touched.update(nodes)
        self.backprop(path, new_lists)
        self._refresh_all(touched)
        for n in reversed(path):
            self._refresh(n)
        calls = self.solver.calls - calls0
        self.stats.solver_calls += calls
        self.stats.iterations = self.iteration
        if self.branch_cov == 1.0 and self.stats.first_full_coverage < 0:
            self.stats.first_full_coverage = self.iteration
        rate = self.stats.preservation_rate
        row = {
            "iter": self.iteration,
            "selected_path_len": len(path) - 1,
            "node_kind": kind.value,
            "batch_size": len(batch),
            "solver_calls": calls,
            "new_paths": len(new_lists),
            "total_paths": len(self.registry),
            "branch_cov": f"{self.branch_cov:.6f}",
            "preservation_rate": "" if rate is None else f"{rate:.6f}",
            "wall_ms": f"{(time.perf_counter() - t0) * 1000:.3f}" if self.wall_clock else "",
        }
        self.stats.rows.append(row)
        log.debug("iter %d: %s depth %d batch %d new %d", self.iteration,
                  kind.value, len(path) - 1, len(batch), len(new_lists))
        if self.on_iteration is not None:
            self.on_iteration(self)
        if self.root.pruned:
            self.stats.stop_reason = "fully_explored" if self.root.fe else "nothing_selectable"
            self.finished = True
        return row

    def run(self):
        deadline = None
        if self.hp.max_seconds:
            deadline = time.monotonic() + self.hp.max_seconds
        try:
            self.seed()
            while self.iteration < self.hp.sim_budget and not self.finished:
                if deadline is not None and time.monotonic() > deadline:
                    self.stats.stop_reason = "max_seconds"
                    break
                self.step()
            if not self.stats.stop_reason:
                self.stats.stop_reason = "fully_explored" if self.root.pruned and self.root.fe else "budget"
        finally:
            self.pool.close()
        return self.suite, self.stats

    @property
    def proved(self):
        return self.root.fe


def run(p, hp=None, **kw):
    """Run the search; returns (engine, suite, stats)."""
    eng = Engine(p, hp, **kw)
    suite, stats = eng.run()
    return eng, suite, stats
