import pytest
from hypothesis import given, settings, strategies as st

from concolic_mcts.solver.core import (BitBudgetExceeded, Model, Solver,
                                       SolverDisagreement, bits_to_input,
                                       to_input_vector)
from concolic_mcts.solver.enumerate import TooLarge, count, models
from concolic_mcts.symex import expr as E
from concolic_mcts.symex.constraint import TRUE_PC, Constraint

X = E.var(0, 8)


def c8(v):
    return E.const(8, v)


def plain():
    return Solver(cross_check=False)


def test_true_gives_zero_model():
    m = plain().check(TRUE_PC, (8,))
    assert m.values == (0,)


def test_forced_range():
    m = plain().check(Constraint.of([E.ult(c8(250), X)]), (8,))
    assert 251 <= m.values[0] <= 255


def test_contradiction_unsat():
    c = Constraint.of([E.ult(c8(250), X), E.ult(X, c8(10))])
    assert plain().check(c, (8,)) is None
    assert count(c.conjuncts, [8]) == 0


def test_flip_on_true():
    m = Model((0,), (8,))
    out = plain().check_flip(TRUE_PC, m, 0)
    assert out.bit(0) == 1


def test_flip_on_singleton_unsat():
    c = Constraint.of([E.eq(X, c8(7))])
    m = Model((7,), (8,))
    for i in range(8):
        assert plain().check_flip(c, m, i) is None


def test_flip_bit2_under_range():
    c = Constraint.of([E.ult(c8(250), X)])
    out = plain().check_flip(c, Model((255,), (8,)), 2)
    allowed = [v for v in models(c.conjuncts, [8]) if not (v >> 2) & 1]
    assert allowed == [0b11111011]
    assert out.values == (251,)


def test_flip_index_out_of_range():
    with pytest.raises(ValueError):
        plain().check_flip(TRUE_PC, Model((0,), (8,)), 8)


def test_to_input_vector():
    assert to_input_vector(Model((0x05,), (8,))) == b"\x05"
    assert to_input_vector(Model((0x0102,), (16,))) == b"\x02\x01"
    m = Model((0x0102, 0xAB, 0xDEADBEEF), (16, 8, 32))
    data = to_input_vector(m)
    assert bits_to_input(m.bits, m.widths) == data
    vals, pos = [], 0
    for w in m.widths:
        vals.append(int.from_bytes(data[pos:pos + w // 8], "little"))
        pos += w // 8
    assert tuple(vals) == m.values


def test_unmentioned_sites_zero_filled():
    c = Constraint.of([E.eq(E.var(1, 8), c8(9))])
    m = plain().check(c, (8, 8))
    assert to_input_vector(m) == b"\x00\x09"


def test_bit_budget():
    wide = E.var(0, 32)
    c = Constraint.of([E.ult(E.binop("mul", wide, wide), E.const(32, 5)),
                       E.ult(E.const(32, 1), wide)])
    with pytest.raises(BitBudgetExceeded) as ei:
        Solver(bit_budget=16, cross_check=False).check(c, (32,))
    assert ei.value.total_bits == 32


def test_enumeration_limit():
    with pytest.raises(TooLarge):
        count([E.TRUE], [16, 8])


def test_seeded_determinism():
    c = Constraint.of([E.ult(c8(20), X)])
    a = [plain().check(c, (8, 8), seed=s) for s in range(5)]
    b = [plain().check(c, (8, 8), seed=s) for s in range(5)]
    assert a == b


def test_cross_check_catches_bad_models():
    s = Solver(cross_check=True)
    c = Constraint.of([E.eq(X, c8(3))])
    with pytest.raises(SolverDisagreement):
        s._verify(c, (8,), Model((4,), (8,)))
    with pytest.raises(SolverDisagreement):
        s._verify(c, (8,), None)


def test_call_counter():
    s = plain()
    s.check(TRUE_PC, (8,))
    s.check_flip(TRUE_PC, Model((0,), (8,)), 3)
    assert s.calls == 2


OPS = ["add", "sub", "mul", "and", "or", "xor", "udiv", "urem", "sdiv", "srem",
       "shl", "lshr", "ashr"]
CMPS = ["eq", "ult", "ule", "slt", "sle"]

leaf = st.one_of(st.integers(0, 255).map(c8), st.sampled_from([E.var(0, 8), E.var(1, 8)]))
terms = st.recursive(leaf, lambda k: st.builds(E.binop, st.sampled_from(OPS), k, k),
                     max_leaves=6)


@st.composite
def conjunct(draw):
    e = getattr(E, draw(st.sampled_from(CMPS)))(draw(terms), draw(terms))
    return E.bnot(e) if draw(st.booleans()) else e


@settings(max_examples=250, deadline=None)
@given(st.lists(conjunct(), min_size=1, max_size=3))
def test_agrees_with_enumeration(conj):
    c = Constraint.of(conj)
    m = plain().check(c, (8, 8))
    n = count(c.conjuncts, [8, 8])
    assert (m is not None) == (n > 0)
    if m is not None:
        assert c.holds(m.as_dict())


@settings(max_examples=150, deadline=None)
@given(st.lists(conjunct(), min_size=1, max_size=2), st.integers(0, 15))
def test_flip_contract(conj, i):
    c = Constraint.of(conj)
    s = plain()
    m = s.check(c, (8, 8))
    if m is None:
        return
    out = s.check_flip(c, m, i)
    sols = models(c.conjuncts, [8, 8])
    other = [v for v in sols if (v >> i) & 1 != m.bit(i)]
    assert (out is not None) == bool(other)
    if out is not None:
        assert c.holds(out.as_dict())
        assert out.bit(i) != m.bit(i)


leaf16 = st.one_of(st.integers(0, 0xFFFF).map(lambda v: E.const(16, v)), st.just(E.var(0, 16)))
terms16 = st.recursive(leaf16, lambda k: st.builds(E.binop, st.sampled_from(OPS), k, k),
                       max_leaves=4)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.builds(lambda op, a, b: getattr(E, op)(a, b),
                          st.sampled_from(CMPS), terms16, terms16), min_size=1, max_size=2))
def test_agrees_with_enumeration_16_bit(conj):
    c = Constraint.of(conj)
    m = plain().check(c, (16,))
    assert (m is not None) == (count(c.conjuncts, [16]) > 0)
    if m is not None:
        assert c.holds(m.as_dict())
