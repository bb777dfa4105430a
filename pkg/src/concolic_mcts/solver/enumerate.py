"""Brute-force model enumeration, vectorised over all assignments.

This is the reference the CDCL path is checked against: it evaluates each
conjunct directly on every point of the input space with numpy, sharing
nothing with the bit-blaster.
"""
import numpy as np

MAX_BITS = 20

U64 = np.uint64


class TooLarge(Exception):
    pass


def _mask(w):
    return (1 << w) - 1


def _signed(a, w):
    sb = 1 << (w - 1)
    return (a ^ U64(sb)).astype(np.int64) - sb


def _eval(e, env, memo):
    key = id(e)
    hit = memo.get(key)
    if hit is not None:
        return hit
    op, w = e.op, e.width
    m = U64(_mask(w))
    if op == "const":
        out = U64(e.val)
    elif op == "var":
        out = env[e.val]
    else:
        args = [_eval(a, env, memo) for a in e.args]
        out = _apply(op, w, m, args, e)
    memo[key] = out
    return out


def _apply(op, w, m, args, e):
    if op == "not":
        return args[0] ^ m
    if op == "neg":
        return (U64(0) - args[0]) & m
    if op == "zext":
        return args[0]
    if op == "sext":
        n = e.val
        sb = U64(1 << (n - 1))
        return ((args[0] ^ sb) - sb) & m
    if op == "trunc":
        return args[0] & m
    if op == "bit":
        return (args[0] >> U64(e.val)) & U64(1)
    a, b = args
    if op == "add":
        return (a + b) & m
    if op == "sub":
        return (a - b) & m
    if op == "mul":
        return (a * b) & m
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "udiv":
        safe = np.where(b == 0, U64(1), b)
        return np.where(b == 0, m, a // safe)
    if op == "urem":
        safe = np.where(b == 0, U64(1), b)
        return np.where(b == 0, a, a % safe)
    if op in ("sdiv", "srem"):
        sa, sb = _signed(a, w), _signed(b, w)
        safe = np.where(sb == 0, 1, np.abs(sb))
        if op == "sdiv":
            q = np.abs(sa) // safe
            q = np.where((sa < 0) != (sb < 0), -q, q)
            q = np.where(sb == 0, np.where(sa < 0, 1, -1), q)
            return q.astype(U64) & m
        r = np.abs(sa) % safe
        r = np.where(sa < 0, -r, r)
        r = np.where(sb == 0, sa, r)
        return r.astype(U64) & m
    if op == "shl":
        return np.where(b >= w, U64(0), (a << np.minimum(b, U64(63))) & m)
    if op == "lshr":
        return np.where(b >= w, U64(0), a >> np.minimum(b, U64(63)))
    if op == "ashr":
        sa = _signed(a, w)
        return (sa >> np.minimum(b, U64(w - 1)).astype(np.int64)).astype(U64) & m
    if op == "eq":
        return (a == b).astype(U64)
    if op == "ult":
        return (a < b).astype(U64)
    if op == "ule":
        return (a <= b).astype(U64)
    n = e.val
    sb = U64(1 << (n - 1))
    if op == "slt":
        return ((a ^ sb) < (b ^ sb)).astype(U64)
    if op == "sle":
        return ((a ^ sb) <= (b ^ sb)).astype(U64)
    raise ValueError(op)


def domain_env(widths):
    total = sum(widths)
    if total > MAX_BITS:
        raise TooLarge(total)
    idx = np.arange(1 << total, dtype=U64)
    env = {}
    off = 0
    for ordinal, w in enumerate(widths):
        env[ordinal] = (idx >> U64(off)) & U64(_mask(w))
        off += w
    return env, idx


def satisfying(conjuncts, widths):
    """Boolean array over all bit-strings of the domain: which satisfy."""
    env, idx = domain_env(widths)
    ok = np.ones(len(idx), dtype=bool)
    memo = {}
    with np.errstate(over="ignore"):
        for c in conjuncts:
            v = _eval(c, env, memo)
            ok &= np.broadcast_to(v == 1, ok.shape)
    return ok


def models(conjuncts, widths):
    """Sorted list of satisfying bit-strings (site 0 at the low bits)."""
    return [int(i) for i in np.flatnonzero(satisfying(conjuncts, widths))]


def count(conjuncts, widths):
    return int(satisfying(conjuncts, widths).sum())
