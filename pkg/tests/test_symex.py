import pytest
from hypothesis import given, settings, strategies as st

from concolic_mcts.concrete import Outcome, SEED_INPUT, execute
from concolic_mcts.lang import branch_addresses
from concolic_mcts.solver.core import Solver, to_input_vector
from concolic_mcts.solver.enumerate import models
from concolic_mcts.symex import expr as E
from concolic_mcts.symex.constraint import TRUE_PC, Constraint, parse_constraint
from concolic_mcts.symex.executor import (BUDGET, INFEASIBLE, BudgetExceeded,
                                          MalformedTarget, advance, feasible_arms,
                                          initial_state, step_to)

from conftest import bench, compile_text

X = E.var(0, 8)


def c8(v):
    return E.const(8, v)


# expressions

def test_hash_consing():
    assert E.var(0, 8) is E.var(0, 8)
    assert E.binop("add", X, c8(1)) is E.binop("add", X, c8(1))
    assert E.binop("add", c8(200), c8(100)) is c8(44)


def test_constant_folding_and_tautology():
    assert E.eq(X, X) is E.TRUE
    assert E.ult(X, c8(0)) is E.FALSE
    assert E.bnot(E.bnot(E.ult(c8(3), X))) is E.ult(c8(3), X)


def test_width_mismatch_rejected():
    with pytest.raises(ValueError):
        E.binop("add", X, E.const(16, 1))


OPS = ["add", "sub", "mul", "and", "or", "xor", "udiv", "urem", "shl", "lshr",
       "ashr", "sdiv", "srem"]


def ref_op(op, a, b):
    """Plain Python semantics for 8-bit operations."""
    def s(v):
        return v - 256 if v & 0x80 else v
    if op == "add":
        return (a + b) & 255
    if op == "sub":
        return (a - b) & 255
    if op == "mul":
        return (a * b) & 255
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "udiv":
        return a // b if b else 255
    if op == "urem":
        return a % b if b else a
    if op == "shl":
        return (a << b) & 255 if b < 8 else 0
    if op == "lshr":
        return a >> b if b < 8 else 0
    if op == "ashr":
        return (s(a) >> min(b, 8)) & 255
    if op == "sdiv":
        if b == 0:
            return 1 if s(a) < 0 else 255
        q = abs(s(a)) // abs(s(b))
        return (-q if (s(a) < 0) != (s(b) < 0) else q) & 255
    if op == "srem":
        if b == 0:
            return a
        r = abs(s(a)) % abs(s(b))
        return (-r if s(a) < 0 else r) & 255
    raise ValueError(op)


leaf = st.one_of(st.integers(0, 255).map(lambda v: ("c", v)),
                 st.sampled_from([("v", 0), ("v", 1)]))
trees = st.recursive(leaf, lambda kids: st.tuples(st.sampled_from(OPS), kids, kids),
                     max_leaves=8)


def build(t):
    if t[0] == "c":
        return c8(t[1])
    if t[0] == "v":
        return E.var(t[1], 8)
    return E.binop(t[0], build(t[1]), build(t[2]))


def ref_eval(t, env):
    if t[0] == "c":
        return t[1]
    if t[0] == "v":
        return env[t[1]]
    return ref_op(t[0], ref_eval(t[1], env), ref_eval(t[2], env))


@settings(max_examples=300, deadline=None)
@given(trees, st.integers(0, 255), st.integers(0, 255),
       st.sampled_from(["eq", "ult", "ule", "slt", "sle"]), st.integers(0, 255))
def test_simplified_expressions_keep_semantics(t, x0, x1, cmp, k):
    env = {0: x0, 1: x1}
    e = build(t)
    assert E.evaluate(e, env) == ref_eval(t, env)
    c = getattr(E, cmp)(e, c8(k))
    v = ref_eval(t, env)
    sv, sk = (v - 256 if v > 127 else v), (k - 256 if k > 127 else k)
    want = {"eq": v == k, "ult": v < k, "ule": v <= k, "slt": sv < sk, "sle": sv <= sk}[cmp]
    assert E.evaluate(c, env) == int(want)


def test_constraint_text_round_trip():
    c = Constraint.of([E.ult(c8(250), X), E.ne(E.var(1, 16), E.const(16, 7))])
    back, widths = parse_constraint(c.to_text([8, 16]))
    assert widths == [8, 16]
    assert back.conjuncts == c.conjuncts


def test_constraint_drops_duplicates():
    a = E.ult(c8(250), X)
    c = TRUE_PC.extend(a)
    assert c.extend(a) is c
    assert TRUE_PC.extend(E.TRUE) is TRUE_PC


# initial state

def test_initial_state(gt250):
    s = initial_state(gt250)
    assert len(s.pc) == 0
    assert s.at == gt250.entry
    assert Solver().check(s.pc, (8,)).values == (0,)


@pytest.mark.parametrize("name", ["chokepoint", "rangeweave", "ackermann"])
def test_root_replay_matches_seed_run(name):
    p = bench(name)
    s = initial_state(p)
    first = execute(p, SEED_INPUT, 100, 10 ** 5).addrs[0]
    arms = {a.address: a for a in feasible_arms(p, s)}
    assert first in arms
    m = Solver().check(arms[first].state.pc, arms[first].state.input_widths)
    assert execute(p, to_input_vector(m), 100, 10 ** 5).addrs[0] == first


# step_to

def test_step_to_adds_comparison(gt250):
    yes, _ = branch_addresses(gt250)
    s = step_to(gt250, initial_state(gt250), yes)
    assert s.pc.conjuncts == (E.ult(c8(250), X),)
    assert s.at == yes


def test_nested_contradiction_is_infeasible():
    p = compile_text("fn main() { x = input(8); if (x > 250) { if (x < 10) { abort(); } } }")
    a_out, _, a_in, _ = branch_addresses(p)
    s = step_to(p, initial_state(p), a_out)
    assert step_to(p, s, a_in) is INFEASIBLE
    pc = s.pc.extend(E.ult(X, c8(10)))
    assert models(pc.conjuncts, [8]) == []


def test_tautology_leaves_pc_unchanged():
    p = bench("tautology")
    yes = branch_addresses(p)[0]
    s0 = initial_state(p)
    s = step_to(p, s0, yes)
    assert s.pc is s0.pc
    assert s.branch_conjunct is None


def test_duplicate_condition_leaves_pc_unchanged():
    p = bench("tautology")
    arms = branch_addresses(p)
    s = initial_state(p)
    s = step_to(p, s, arms[0])
    s = step_to(p, s, arms[2])
    assert s.branch_conjunct is not None
    t = step_to(p, s, arms[4])
    assert t.pc is s.pc and t.branch_conjunct is None


def test_malformed_target(gt250):
    with pytest.raises(MalformedTarget):
        step_to(gt250, initial_state(gt250), gt250.entry)
    p = compile_text("fn main() { }")
    with pytest.raises(MalformedTarget):
        step_to(p, initial_state(p), p.entry)


def test_budget():
    p = bench("ackermann")
    s = initial_state(p)
    arms = branch_addresses(p)
    assert step_to(p, s, arms[0], step_cap=2) is BUDGET
    with pytest.raises(BudgetExceeded):
        feasible_arms(p, s, step_cap=2)


# feasible_arms

def test_feasible_arms_root(gt250):
    out = feasible_arms(gt250, initial_state(gt250))
    assert [a.address for a in out] == branch_addresses(gt250)


def arms_after(pc_conj, cond):
    p = compile_text(f"fn main() {{ x = input(8); if ({cond}) {{ abort(); }} }}")
    s = initial_state(p)
    s = type(s)(s.frames, s.pc.extend(pc_conj), s.at, s.input_widths)
    return p, feasible_arms(p, s)


def test_feasible_arms_both_under_range():
    p, out = arms_after(E.ult(c8(250), X), "x > 254")
    assert len(out) == 2
    for a in out:
        assert models(a.constraint.conjuncts, [8])
    assert models(out[0].constraint.conjuncts, [8]) == [255]
    assert models(out[1].constraint.conjuncts, [8]) == [251, 252, 253, 254]


def test_feasible_arms_single_under_equality():
    p, out = arms_after(E.eq(X, c8(7)), "x > 9")
    assert [a.address for a in out] == [branch_addresses(p)[1]]


def test_feasible_arms_agree_with_check():
    p = bench("rangeweave")
    s = initial_state(p)
    solver = Solver()
    for addr in branch_addresses(p)[:2]:
        nxt = step_to(p, s, addr)
        assert (nxt is not INFEASIBLE) == any(a.address == addr for a in feasible_arms(p, s))
        if nxt is not INFEASIBLE:
            assert solver.check(nxt.pc, nxt.input_widths) is not None


def test_terminal_state_has_no_arms():
    p = compile_text("fn main() { x = input(8); }")
    assert feasible_arms(p, initial_state(p)) == []


# soundness: following a concrete trace symbolically

def values_of(data, widths):
    out, pos = {}, 0
    for i, w in enumerate(widths):
        n = w // 8
        out[i] = int.from_bytes(data[pos:pos + n].ljust(n, b"\0"), "little")
        pos += n
    return out


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["chokepoint", "rangeweave", "ackermann", "eqchain"]),
       st.binary(min_size=2, max_size=2))
def test_path_condition_soundness(name, data):
    p = bench(name)
    solver = Solver()
    trace = execute(p, data, 10 ** 5, 10 ** 6)
    s = initial_state(p)
    for i, addr in enumerate(trace.addrs[:25]):
        s = step_to(p, s, addr, solver=solver)
        assert s is not INFEASIBLE and s is not BUDGET
        # the input that produced the trace satisfies the path condition
        assert s.pc.holds(values_of(data, s.input_widths))
        # and any model of the path condition follows the same prefix
        m = solver.check(s.pc, s.input_widths)
        replay = execute(p, to_input_vector(m), 10 ** 5, 10 ** 6)
        assert replay.addrs[:i + 1] == trace.addrs[:i + 1]


def test_concretisation_marks_state():
    p = bench("mismatch")
    s = initial_state(p)
    out = feasible_arms(p, s)
    assert all(a.state.concretized for a in out)
    # symbolic side sees y == 0, so only the false arm of y == 7 is feasible
    assert len(out) == 1
    assert execute(p, b"\x07", 10, 100).outcome is Outcome.ABORTED


def test_zero_divisor_witness():
    p = compile_text("fn main() { x: u8 = input(8); y: u8 = 9 / (x ^ 0x5A); if (y > 1) { abort(); } }")
    d = advance(p, initial_state(p))
    assert d.witness is not None
    data = to_input_vector(d.witness)
    assert data == b"\x5a"
    assert execute(p, data, 100, 10 ** 5).outcome is Outcome.RUNTIME_ERROR
    # the continuing runs carry the divisor guard
    assert not d.state.pc.holds({0: 0x5A}) and d.state.pc.holds({0: 0})


def test_no_witness_when_divisor_cannot_be_zero():
    p = compile_text("""fn main() {
        x: u8 = input(8);
        if (x > 3) {
            y: u8 = 9 / x;
            if (y > 1) { abort(); }
        }
    }""")
    arms = feasible_arms(p, initial_state(p))
    big = [a for a in arms if a.state.pc.holds({0: 4})][0]
    d = advance(p, big.state)
    assert d.witness is None
