"""Concrete execution of IR programs with branch tracing.

Expressions are compiled once per program into Python lambdas over the
frame's slot list. Steps are counted per instruction and per terminator.
"""
import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .lang.ir import (AbortT, AssertFailT, AssignI, Branch, CallI, IBinary,
                      ICast, IChoose, IConst, InputI, ISlot, IUnary, Jump,
                      ReturnT)

SEED_INPUT = b"\x00"


class Outcome(enum.Enum):
    RETURNED = "Returned"
    ABORTED = "Aborted"
    ASSERT_FAILED = "AssertFailed"
    RUNTIME_ERROR = "RuntimeError"
    DEPTH_CAPPED = "DepthCapped"
    STEP_CAPPED = "StepCapped"

    @property
    def capped(self):
        return self in (Outcome.DEPTH_CAPPED, Outcome.STEP_CAPPED)

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Trace:
    addrs: tuple
    outcome: Outcome
    bytes_read: int = 0

    def __len__(self):
        return len(self.addrs)

    def starts_with(self, prefix):
        n = len(prefix)
        return len(self.addrs) >= n and tuple(self.addrs[:n]) == tuple(prefix)


class _Fault(Exception):
    pass


def _udiv(a, b):
    if b == 0:
        raise _Fault
    return a // b


def _urem(a, b):
    if b == 0:
        raise _Fault
    return a % b


def _sdiv(a, b, w):
    if b == 0:
        raise _Fault
    sb = 1 << (w - 1)
    a = (a ^ sb) - sb
    b = (b ^ sb) - sb
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q & ((1 << w) - 1)


def _srem(a, b, w):
    if b == 0:
        raise _Fault
    sb = 1 << (w - 1)
    a = (a ^ sb) - sb
    b = (b ^ sb) - sb
    r = abs(a) % abs(b)
    if a < 0:
        r = -r
    return r & ((1 << w) - 1)


def _shl(a, b, w):
    return (a << b) & ((1 << w) - 1) if b < w else 0


def _ashr(a, b, w):
    sb = 1 << (w - 1)
    return (((a ^ sb) - sb) >> min(b, w)) & ((1 << w) - 1)


HELPERS = {"_udiv": _udiv, "_urem": _urem, "_sdiv": _sdiv, "_srem": _srem,
           "_shl": _shl, "_ashr": _ashr}


def expr_source(e):
    """Python source computing IR expression e over slot list `L`."""
    if isinstance(e, IConst):
        return str(e.value)
    if isinstance(e, ISlot):
        return f"L[{e.slot}]"
    if isinstance(e, IChoose):
        return expr_source(e.a)
    w = e.ty.width
    m = e.ty.mask
    if isinstance(e, IUnary):
        a = expr_source(e.a)
        if e.op == "neg":
            return f"((-{a}) & {m})"
        return f"({a} ^ {m})"
    if isinstance(e, ICast):
        src = e.a.ty
        a = expr_source(e.a)
        if e.ty.width <= src.width:
            return f"({a} & {m})"
        if src.signed:
            sb = 1 << (src.width - 1)
            return f"((({a} ^ {sb}) - {sb}) & {m})"
        return a
    if isinstance(e, IBinary):
        a, b = expr_source(e.a), expr_source(e.b)
        ot = e.a.ty
        ow = ot.width
        op = e.op
        if op == "add":
            return f"(({a} + {b}) & {m})"
        if op == "sub":
            return f"(({a} - {b}) & {m})"
        if op == "mul":
            return f"(({a} * {b}) & {m})"
        if op in ("and", "or", "xor"):
            sym = {"and": "&", "or": "|", "xor": "^"}[op]
            return f"({a} {sym} {b})"
        if op == "div":
            return f"_sdiv({a}, {b}, {w})" if ot.signed else f"_udiv({a}, {b})"
        if op == "rem":
            return f"_srem({a}, {b}, {w})" if ot.signed else f"_urem({a}, {b})"
        if op == "shl":
            return f"_shl({a}, {b}, {w})"
        if op == "shr":
            return f"_ashr({a}, {b}, {w})" if ot.signed else f"({a} >> {b})"
        if op in ("eq", "ne"):
            sym = "==" if op == "eq" else "!="
            return f"(1 if {a} {sym} {b} else 0)"
        sym = {"lt": "<", "le": "<=", "gt": ">", "ge": ">="}[op]
        if ot.signed:
            sb = 1 << (ow - 1)
            return f"(1 if ({a} ^ {sb}) {sym} ({b} ^ {sb}) else 0)"
        return f"(1 if {a} {sym} {b} else 0)"
    raise TypeError(e)


def compile_expr(e):
    return eval(f"lambda L: {expr_source(e)}", dict(HELPERS))


# op codes for compiled instructions and terminators
OP_ASSIGN, OP_INPUT, OP_CALL = 0, 1, 2
T_JUMP, T_BRANCH, T_RETURN, T_ABORT, T_ASSERT = 0, 1, 2, 3, 4


def compile_program(p):
    if p._compiled is not None:
        return p._compiled
    funcs = []
    for f in p.functions:
        blocks = []
        for b in f.blocks:
            ops = []
            for ins in b.instrs:
                if isinstance(ins, AssignI):
                    ops.append((OP_ASSIGN, ins.slot, compile_expr(ins.value)))
                elif isinstance(ins, InputI):
                    ops.append((OP_INPUT, ins.slot, ins.width // 8))
                elif isinstance(ins, CallI):
                    ops.append((OP_CALL, ins.slot, ins.func,
                                tuple(compile_expr(a) for a in ins.args)))
                else:
                    raise TypeError(ins)
            t = b.term
            if isinstance(t, Jump):
                term = (T_JUMP, t.target.block_index)
            elif isinstance(t, Branch):
                term = (T_BRANCH, compile_expr(t.cond), t.if_true.block_index,
                        t.if_false.block_index, t.if_true, t.if_false)
            elif isinstance(t, ReturnT):
                term = (T_RETURN, None if t.value is None else compile_expr(t.value))
            elif isinstance(t, AbortT):
                term = (T_ABORT,)
            elif isinstance(t, AssertFailT):
                term = (T_ASSERT,)
            else:
                raise TypeError(t)
            blocks.append((tuple(ops), term))
        funcs.append((tuple(blocks), f.nslots, f.params))
    p._compiled = tuple(funcs)
    return p._compiled


def execute(p, data, depth_cap, step_cap):
    """Run p on input bytes; return the Trace of Branch arms taken."""
    if depth_cap < 1 or step_cap < 1:
        raise ValueError("caps must be >= 1")
    code = compile_program(p)
    data = bytes(data)
    ndata = len(data)
    pos = 0
    trace = []
    steps = 0
    stack = []
    blocks, nslots, _ = code[p.main_index]
    L = [0] * nslots
    bi = 0
    oi = 0
    outcome = None
    try:
        while outcome is None:
            ops, term = blocks[bi]
            called = False
            while oi < len(ops):
                steps += 1
                if steps > step_cap:
                    outcome = Outcome.STEP_CAPPED
                    break
                op = ops[oi]
                oi += 1
                kind = op[0]
                if kind == OP_ASSIGN:
                    L[op[1]] = op[2](L)
                elif kind == OP_INPUT:
                    n = op[2]
                    if pos + n <= ndata:
                        L[op[1]] = int.from_bytes(data[pos:pos + n], "little")
                    else:
                        L[op[1]] = int.from_bytes(data[pos:ndata], "little")
                    pos += n
                else:
                    args = [f(L) for f in op[3]]
                    stack.append((blocks, bi, oi, L, op[1]))
                    blocks, nslots, params = code[op[2]]
                    L = [0] * nslots
                    for slot, v in zip(params, args):
                        L[slot] = v
                    bi = 0
                    oi = 0
                    called = True
                    break
            if outcome is not None or called:
                continue
            steps += 1
            if steps > step_cap:
                outcome = Outcome.STEP_CAPPED
                break
            k = term[0]
            oi = 0
            if k == T_BRANCH:
                if len(trace) >= depth_cap:
                    outcome = Outcome.DEPTH_CAPPED
                    break
                if term[1](L):
                    trace.append(term[4])
                    bi = term[2]
                else:
                    trace.append(term[5])
                    bi = term[3]
            elif k == T_JUMP:
                bi = term[1]
            elif k == T_RETURN:
                v = term[1](L) if term[1] is not None else 0
                if not stack:
                    outcome = Outcome.RETURNED
                    break
                blocks, bi, oi, L, slot = stack.pop()
                if slot is not None:
                    L[slot] = v
            elif k == T_ABORT:
                outcome = Outcome.ABORTED
            else:
                outcome = Outcome.ASSERT_FAILED
    except _Fault:
        outcome = Outcome.RUNTIME_ERROR
    return Trace(tuple(trace), outcome, pos)


_worker_program = None


def _init_worker(p):
    global _worker_program
    _worker_program = p


def _run_chunk(args):
    inputs, depth_cap, step_cap = args
    return [execute(_worker_program, d, depth_cap, step_cap) for d in inputs]


class WorkerPool:
    """Process pool that runs batches of inputs for one program."""

    def __init__(self, p, cores, min_batch=32):
        self.p = p
        self.cores = max(1, cores)
        self.min_batch = min_batch
        self._pool = None

    def map(self, inputs, depth_cap, step_cap):
        inputs = list(inputs)
        if self.cores <= 1 or len(inputs) < self.min_batch:
            return [execute(self.p, d, depth_cap, step_cap) for d in inputs]
        if self._pool is None:
            self._pool = ProcessPoolExecutor(self.cores, initializer=_init_worker,
                                             initargs=(self.p,))
        size = -(-len(inputs) // self.cores)
        chunks = [(inputs[i:i + size], depth_cap, step_cap)
                  for i in range(0, len(inputs), size)]
        out = []
        for part in self._pool.map(_run_chunk, chunks):
            out.extend(part)
        return out

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def execute_batch(p, inputs, depth_cap, step_cap, cores=1, min_batch=32):
    """execute() over a list of inputs, order preserved."""
    with WorkerPool(p, cores, min_batch) as pool:
        return pool.map(inputs, depth_cap, step_cap)


def usable_cores(requested):
    return max(1, min(requested, os.cpu_count() or 1))
