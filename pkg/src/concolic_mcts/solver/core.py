"""Satisfiability checks and models for path conditions.

A constraint is first reduced incrementally: conjuncts of the form
`var == const` become substitutions, which are propagated through the
remaining conjuncts. Whatever is left is bit-blasted and handed to the
CDCL core. Variables the residual does not mention take their substituted
value, or 0 (or a seeded random value for non-default phases).
"""
import os
import random
from dataclasses import dataclass

from ..symex import expr as E
from ..symex.constraint import Constraint
from . import enumerate as enum_oracle
from .bitblast import Blaster
from .cdcl import CDCL

CROSS_CHECK_ENV = "CONCOLIC_MCTS_SOLVER_CROSSCHECK"
DEFAULT_BIT_BUDGET = 4096


class BitBudgetExceeded(Exception):
    def __init__(self, total_bits):
        super().__init__(f"{total_bits} input bits exceed the solver budget")
        self.total_bits = total_bits


class SolverDisagreement(AssertionError):
    pass


@dataclass(frozen=True)
class Model:
    """Concrete values for input sites 0..k-1."""
    values: tuple
    widths: tuple

    @property
    def nbits(self):
        return sum(self.widths)

    @property
    def bits(self):
        out, off = 0, 0
        for v, w in zip(self.values, self.widths):
            out |= v << off
            off += w
        return out

    @classmethod
    def from_bits(cls, bits, widths):
        vals, off = [], 0
        for w in widths:
            vals.append((bits >> off) & ((1 << w) - 1))
            off += w
        return cls(tuple(vals), tuple(widths))

    def as_dict(self):
        return dict(enumerate(self.values))

    def bit(self, index):
        return (self.bits >> index) & 1

    def __str__(self):
        return " ".join(f"x{i}={v}" for i, v in enumerate(self.values))


def to_input_vector(model, site_order=None):
    """Little-endian bytes per site, sites in read order."""
    order = range(len(model.values)) if site_order is None else site_order
    out = bytearray()
    for i in order:
        out += model.values[i].to_bytes(model.widths[i] // 8, "little")
    return bytes(out)


def bits_to_input(bits, widths):
    return bits.to_bytes(sum(widths) // 8, "little")


class Reduction:
    __slots__ = ("subst", "residual", "unsat")

    def __init__(self, subst, residual, unsat=False):
        self.subst = subst
        self.residual = residual
        self.unsat = unsat

    def extend(self, conj):
        if self.unsat:
            return self
        e = E.substitute(conj, self.subst) if self.subst else conj
        if e is E.TRUE:
            return self
        if e is E.FALSE:
            return UNSAT_REDUCTION
        pin = as_pin(e)
        if pin is None:
            if e in self.residual:
                return self
            return Reduction(self.subst, self.residual + (e,))
        subst = dict(self.subst)
        residual = list(self.residual)
        pending = [pin]
        while pending:
            o, v = pending.pop()
            if o in subst:
                if subst[o] != v:
                    return UNSAT_REDUCTION
                continue
            subst[o] = v
            kept = []
            one = {o: v}
            for r in residual:
                r2 = E.substitute(r, one)
                if r2 is E.TRUE:
                    continue
                if r2 is E.FALSE:
                    return UNSAT_REDUCTION
                p = as_pin(r2)
                if p is not None:
                    pending.append(p)
                elif r2 not in kept:
                    kept.append(r2)
            residual = kept
        return Reduction(subst, tuple(residual))


EMPTY_REDUCTION = Reduction({}, ())
UNSAT_REDUCTION = Reduction({}, (), True)


def as_pin(e):
    if e.op == "eq":
        a, b = e.args
        if a.op == "var" and b.is_const:
            return a.val, b.val
    return None


def reduction(c):
    chain = []
    node = c
    while node._red is None and node.parent is not None:
        chain.append(node)
        node = node.parent
    red = node._red if node._red is not None else EMPTY_REDUCTION
    for n in reversed(chain):
        red = red.extend(n.conjunct)
        n._red = red
    return red


def infer_widths(c, widths=None):
    """Domain of site widths covering every variable of c."""
    mentioned = c.variables()
    out = list(widths or [])
    for o in sorted(mentioned):
        while len(out) <= o:
            out.append(8)
        if out[o] != mentioned[o]:
            if o < len(widths or []):
                raise ValueError(f"site {o} has width {mentioned[o]}, "
                                 f"domain says {out[o]}")
            out[o] = mentioned[o]
    return tuple(out)


def _env_flag():
    return os.environ.get(CROSS_CHECK_ENV, "") not in ("", "0")


class Solver:
    """Reference solver; `calls` counts check and check_flip invocations."""

    def __init__(self, bit_budget=DEFAULT_BIT_BUDGET, cross_check=None,
                 cross_check_bits=16, cache=True):
        self.bit_budget = bit_budget
        self.cross_check = _env_flag() if cross_check is None else cross_check
        self.cross_check_bits = cross_check_bits
        self.cache = cache
        self.calls = 0
        self.cdcl_runs = 0

    def check(self, c, widths=None, seed=None):
        """A Model of c over the sites in `widths`, or None when unsat."""
        self.calls += 1
        return self._check(c, infer_widths(c, widths), seed)

    def check_flip(self, c, m, bit_index, seed=None):
        """A model of c whose bit `bit_index` differs from m's, or None."""
        self.calls += 1
        if not 0 <= bit_index < m.nbits:
            raise ValueError("bit index out of range")
        off = 0
        for ordinal, w in enumerate(m.widths):
            if bit_index < off + w:
                break
            off += w
        j = bit_index - off
        b = E.bit(E.var(ordinal, w), j)
        want = 1 - ((m.values[ordinal] >> j) & 1)
        conj = b if want else E.bnot(b)
        flipped = c.extend(conj)
        return self._check(flipped, infer_widths(flipped, m.widths), seed)

    def _check(self, c, widths, seed):
        key = (widths, seed)
        if self.cache and c._cache is not None and key in c._cache:
            return c._cache[key]
        model = self._solve(c, widths, seed)
        if self.cross_check and sum(widths) <= self.cross_check_bits:
            self._verify(c, widths, model)
        if self.cache:
            if c._cache is None:
                c._cache = {}
            c._cache[key] = model
        return model

    def _solve(self, c, widths, seed):
        red = reduction(c)
        if red.unsat:
            return None
        rng = random.Random(seed) if seed is not None else None
        values = {}
        if red.residual:
            mentioned = {}
            seen = set()
            for r in red.residual:
                E.variables(r, mentioned, seen)
            total = sum(mentioned.values())
            if total > self.bit_budget:
                raise BitBudgetExceeded(total)
            bl = Blaster()
            order = []
            for o in sorted(mentioned):
                bits = bl.declare(o, mentioned[o])
                order.extend(reversed(bits))  # most significant first
            for r in red.residual:
                bl.assert_true(r)
            phase = {}
            if rng is not None:
                for v in order:
                    phase[v] = rng.random() < 0.5
            self.cdcl_runs += 1
            sol = CDCL(bl.nvars, bl.clauses).solve(order, phase)
            if sol is None:
                return None
            for o, bits in bl.input_bits.items():
                values[o] = sum(1 << i for i, v in enumerate(bits) if sol[v])
        out = []
        for o, w in enumerate(widths):
            if o in values:
                out.append(values[o])
            elif o in red.subst:
                out.append(red.subst[o])
            elif rng is not None:
                out.append(rng.getrandbits(w))
            else:
                out.append(0)
        return Model(tuple(out), widths)

    def _verify(self, c, widths, model):
        conj = c.conjuncts
        sat = enum_oracle.count(conj, widths) > 0
        if sat != (model is not None):
            raise SolverDisagreement(f"solver says {'sat' if model else 'unsat'}, "
                                     f"enumeration says {'sat' if sat else 'unsat'}")
        if model is not None and not c.holds(model.as_dict()):
            raise SolverDisagreement(f"model {model} violates the constraint")


_default = Solver()


def check(c, widths=None, seed=None):
    return _default.check(c, widths, seed)


def check_flip(c, m, bit_index, seed=None):
    return _default.check_flip(c, m, bit_index, seed)


def constraint_of(*conjuncts):
    return Constraint.of(conjuncts)
