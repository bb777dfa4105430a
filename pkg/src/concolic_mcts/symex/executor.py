"""Symbolic interpretation of the IR along one known path.

`advance` runs a state forward to its next Branch (or to termination).
`step_to` and `feasible_arms` build on it. States are immutable; every
input read becomes a fresh variable numbered by its dynamic read order.
"""
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

from ..concrete import Outcome
from ..lang.ir import (AbortT, AssignI, Branch, CallI, IBinary, ICast, IChoose,
                       IConst, InputI, ISlot, IUnary, Jump, ReturnT)
from . import expr as E
from .constraint import TRUE_PC

DEFAULT_SYMEX_BUDGET = 100000


class MalformedTarget(Exception):
    pass


class BudgetExceeded(Exception):
    pass


class _Sentinel:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


INFEASIBLE = _Sentinel("Infeasible")
BUDGET = _Sentinel("Budget")


@dataclass(frozen=True)
class Frame:
    func: int
    block: int
    index: int
    locals: tuple
    ret_slot: Optional[int] = None


@dataclass(frozen=True, eq=False)
class SymbolicState:
    frames: tuple
    pc: object
    at: object
    input_widths: tuple = ()
    # conjunct added by the step that produced this state; None when the
    # branch condition simplified away or duplicated an existing conjunct
    branch_conjunct: object = None
    # set once a choose_concrete pinned a symbolic value on the way here;
    # the arms of such a state may miss concretely feasible branches
    concretized: bool = False

    @property
    def next_input_ordinal(self):
        return len(self.input_widths)

    def env(self, p):
        top = self.frames[-1]
        names = p.functions[top.func].slot_names
        return {n: v for n, v in zip(names, top.locals) if not n.startswith("$")}


class Decision(NamedTuple):
    state: SymbolicState  # positioned at the Branch, before taking it
    cond: object
    if_true: object
    if_false: object
    # model under which a symbolic divisor on the way here is zero, so the
    # run stops with RuntimeError before reaching the Branch
    witness: object = None


class Terminal(NamedTuple):
    outcome: Outcome
    state: SymbolicState


class Arm(NamedTuple):
    address: object
    state: SymbolicState

    @property
    def constraint(self):
        return self.state.pc


def _zero_locals(func):
    return tuple(E.const(t.width, 0) for t in func.slot_types)


def initial_state(p):
    main = p.functions[p.main_index]
    frame = Frame(p.main_index, 0, 0, _zero_locals(main))
    return SymbolicState((frame,), TRUE_PC, p.entry)


class _Runner:
    def __init__(self, p, s, budget, solver):
        self.p = p
        self.pc = s.pc
        self.widths = list(s.input_widths)
        self.budget = budget
        self.solver = solver
        self.steps = 0
        self.crashed = False
        self.concretized = s.concretized
        self.witness = None

    def tick(self):
        self.steps += 1
        if self.steps > self.budget:
            raise BudgetExceeded

    def value(self, e, L):
        if isinstance(e, IConst):
            return E.const(e.ty.width, e.value)
        if isinstance(e, ISlot):
            return L[e.slot]
        if isinstance(e, IUnary):
            a = self.value(e.a, L)
            return E.neg(a) if e.op == "neg" else E.bnot(a)
        if isinstance(e, ICast):
            a = self.value(e.a, L)
            src = e.a.ty
            if e.ty.width < src.width:
                return E.trunc(a, e.ty.width)
            if e.ty.width == src.width:
                return a
            return E.sext(a, e.ty.width) if src.signed else E.zext(a, e.ty.width)
        if isinstance(e, IBinary):
            return self.binary(e, L)
        if isinstance(e, IChoose):
            a = self.value(e.a, L)
            if a.is_const:
                return a
            # concretise under the zero-preferring model of the current pc
            self.concretized = True
            model = self.solver.check(self.pc, tuple(self.widths))
            values = model.as_dict() if model is not None else {}
            return E.const(a.width, E.evaluate(a, values))
        raise TypeError(e)

    def binary(self, e, L):
        a = self.value(e.a, L)
        b = self.value(e.b, L)
        signed = e.a.ty.signed
        op = e.op
        if op in ("add", "sub", "mul", "and", "or", "xor", "shl"):
            return E.binop(op, a, b)
        if op in ("div", "rem"):
            if b.is_const and b.val == 0:
                self.crashed = True
                return E.const(a.width, 0)
            if not b.is_const:
                zero = E.eq(b, E.const(b.width, 0))
                if self.witness is None and zero is not E.FALSE:
                    self.witness = self.solver.check(self.pc.extend(zero), tuple(self.widths))
                self.pc = self.pc.extend(E.bnot(zero))
            name = ("s" if signed else "u") + op
            return E.binop(name, a, b)
        if op == "shr":
            return E.binop("ashr" if signed else "lshr", a, b)
        if op == "eq":
            return E.eq(a, b)
        if op == "ne":
            return E.ne(a, b)
        lt = E.slt if signed else E.ult
        le = E.sle if signed else E.ule
        if op == "lt":
            return lt(a, b)
        if op == "le":
            return le(a, b)
        if op == "gt":
            return lt(b, a)
        if op == "ge":
            return le(b, a)
        raise ValueError(op)


def advance(p, s, budget=DEFAULT_SYMEX_BUDGET, solver=None):
    """Run s to its next Branch: a Decision, or a Terminal.

    Raises BudgetExceeded when more than `budget` instructions run.
    """
    if solver is None:
        from ..solver.core import _default as solver
    r = _Runner(p, s, budget, solver)
    # callers' frames stay frozen; only the running frame is mutable
    below = list(s.frames[:-1])
    top = s.frames[-1]
    fi, bi, ii, L, ret_slot = top.func, top.block, top.index, list(top.locals), top.ret_slot

    def snapshot():
        frames = tuple(below) + (Frame(fi, bi, ii, tuple(L), ret_slot),)
        return SymbolicState(frames, r.pc, s.at, tuple(r.widths), None, r.concretized)

    while True:
        blk = p.functions[fi].blocks[bi]
        if ii < len(blk.instrs):
            r.tick()
            ins = blk.instrs[ii]
            ii += 1
            if isinstance(ins, AssignI):
                L[ins.slot] = r.value(ins.value, L)
            elif isinstance(ins, InputI):
                L[ins.slot] = E.var(len(r.widths), ins.width)
                r.widths.append(ins.width)
            elif isinstance(ins, CallI):
                args = [r.value(a, L) for a in ins.args]
                if not r.crashed:
                    callee = p.functions[ins.func]
                    new_locals = list(_zero_locals(callee))
                    for slot, v in zip(callee.params, args):
                        new_locals[slot] = v
                    below.append(Frame(fi, bi, ii, tuple(L), ret_slot))
                    fi, bi, ii, L, ret_slot = ins.func, 0, 0, new_locals, ins.slot
            else:
                raise TypeError(ins)
            if r.crashed:
                return Terminal(Outcome.RUNTIME_ERROR, snapshot())
            continue
        r.tick()
        t = blk.term
        if isinstance(t, Jump):
            bi = t.target.block_index
            ii = 0
        elif isinstance(t, Branch):
            cond = r.value(t.cond, L)
            if r.crashed:
                return Terminal(Outcome.RUNTIME_ERROR, snapshot())
            return Decision(snapshot(), cond, t.if_true, t.if_false, r.witness)
        elif isinstance(t, ReturnT):
            v = None if t.value is None else r.value(t.value, L)
            if r.crashed:
                return Terminal(Outcome.RUNTIME_ERROR, snapshot())
            if not below:
                return Terminal(Outcome.RETURNED, snapshot())
            slot = ret_slot
            caller = below.pop()
            fi, bi, ii, L, ret_slot = (caller.func, caller.block, caller.index,
                                       list(caller.locals), caller.ret_slot)
            if slot is not None:
                L[slot] = v
        elif isinstance(t, AbortT):
            return Terminal(Outcome.ABORTED, snapshot())
        else:
            return Terminal(Outcome.ASSERT_FAILED, snapshot())


def take(d, target, solver, base_pc=None):
    """Extend a Decision toward `target`: a new state or INFEASIBLE."""
    if target == d.if_true:
        conj = d.cond
    elif target == d.if_false:
        conj = E.bnot(d.cond)
    else:
        raise MalformedTarget(f"{target} is not an arm of the next branch")
    if conj is E.FALSE:
        return INFEASIBLE
    st = d.state
    pc = st.pc.extend(conj)
    added = pc is not st.pc
    if pc is not base_pc and solver.check(pc, st.input_widths) is None:
        return INFEASIBLE
    top = st.frames[-1]
    frames = st.frames[:-1] + (replace(top, block=target.block_index, index=0),)
    return SymbolicState(frames, pc, target, st.input_widths,
                         conj if added else None, st.concretized)


def step_to(p, s, target, step_cap=DEFAULT_SYMEX_BUDGET, solver=None):
    """Symbolically follow s into the Branch arm `target`.

    Returns a SymbolicState, INFEASIBLE, or BUDGET.
    """
    if solver is None:
        from ..solver.core import _default as solver
    try:
        d = advance(p, s, step_cap, solver)
    except BudgetExceeded:
        return BUDGET
    if isinstance(d, Terminal):
        raise MalformedTarget("execution terminates before the next branch")
    return take(d, target, solver, s.pc)


def arms_of(d, solver, base_pc):
    out = []
    for target in (d.if_true, d.if_false):
        st = take(d, target, solver, base_pc)
        if st is not INFEASIBLE:
            out.append(Arm(target, st))
    return out


def feasible_arms(p, s, step_cap=DEFAULT_SYMEX_BUDGET, solver=None):
    """Satisfiable arms of the next Branch after s, as Arm(address, state).

    Empty when the program terminates first. Raises BudgetExceeded.
    """
    if solver is None:
        from ..solver.core import _default as solver
    d = advance(p, s, step_cap, solver)
    if isinstance(d, Terminal):
        return []
    return arms_of(d, solver, s.pc)
