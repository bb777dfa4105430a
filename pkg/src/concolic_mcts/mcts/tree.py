"""Search tree nodes and the score function."""
import enum
import math


class Kind(enum.Enum):
    HOLLOW = "hollow"
    SOLID = "solid"
    PHANTOM = "phantom"
    REDUNDANT = "redundant"
    SIMULATION = "simulation"


class Reason(enum.Enum):
    MISMATCH_OBSERVED = "MismatchObserved"
    TAUTOLOGY_DUPLICATE = "TautologyDuplicate"


class Node:
    __slots__ = ("addr", "parent", "depth", "kind", "reason", "children",
                 "sim", "state", "arms", "domain", "n_sel", "n_win", "fe",
                 "pruned", "sampler", "outcome", "capped", "symex_failed",
                 "approx", "may_stop", "serial")

    def __init__(self, addr, parent, kind, serial):
        self.addr = addr
        self.parent = parent
        self.depth = 0 if parent is None else parent.depth + 1
        self.kind = kind
        self.reason = None
        self.children = {}
        self.sim = None
        self.state = None
        self.arms = None  # addr -> SymbolicState once the next branch is solved
        self.domain = None  # input widths read before the next branch
        self.n_sel = 0
        self.n_win = 0
        self.fe = False
        self.pruned = False
        self.sampler = None
        self.outcome = None  # outcome of a complete trace ending here
        self.capped = False
        self.symex_failed = False
        self.approx = False  # arms came from a concretized symbolic state
        self.may_stop = False  # some runs end here on a zero divisor
        self.serial = serial

    @property
    def is_mismatch(self):
        return self.kind is Kind.REDUNDANT and self.reason is Reason.MISMATCH_OBSERVED

    def path(self):
        """Branch addresses from the root to this node (sim nodes: parent's)."""
        out = []
        node = self
        while node is not None:
            if node.addr is not None:
                out.append(node.addr)
            node = node.parent
        out.reverse()
        return tuple(out)

    def label(self):
        if self.kind is Kind.REDUNDANT:
            return f"redundant({self.reason.value})"
        return self.kind.value

    def __repr__(self):
        where = "root" if self.addr is None else str(self.addr)
        return f"<{self.label()} {where} depth={self.depth} sel={self.n_sel} win={self.n_win}>"


def uct_score(n_win, n_sel, p_sel, rho):
    """Mean reward plus rho * sqrt(2 ln(p_sel) / n_sel); +inf when unvisited."""
    if n_sel == 0:
        return math.inf
    explore = 0.0
    if rho and p_sel > 1:
        explore = rho * math.sqrt(2.0 * math.log(p_sel) / n_sel)
    return n_win / n_sel + explore


def iter_nodes(root):
    stack = [root]
    while stack:
        n = stack.pop()
        yield n
        if n.sim is not None:
            yield n.sim
        stack.extend(reversed(list(n.children.values())))
