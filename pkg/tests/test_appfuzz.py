import random

import pytest

from concolic_mcts.appfuzz import (MUTANT, SOLVER, LengthMismatch, app_fuzz,
                                   mutate, new_sampler, next_batch,
                                   preservation_rate, sample)
from concolic_mcts.lang import branch_addresses
from concolic_mcts.solver.core import Solver, bits_to_input
from concolic_mcts.symex import expr as E
from concolic_mcts.symex.constraint import TRUE_PC, Constraint
from concolic_mcts.symex.executor import initial_state, step_to

X = E.var(0, 8)


def test_mutate_examples():
    assert mutate("0000", "0011", "0101") == "0111"
    assert mutate("1010", "0110", "1010") == "0110"
    assert mutate("1010", "0110", "0110") == "0110"
    assert mutate(0b1100, 0b1010, 0b1100) == 0b1010


def test_mutate_length_mismatch():
    with pytest.raises(LengthMismatch):
        mutate("01", "011", "010")
    with pytest.raises(LengthMismatch):
        mutate(0, 0x100, 0, nbits=8)


def test_mutate_keeps_agreeing_bits():
    rng = random.Random(3)
    for _ in range(500):
        s, a, b = (rng.getrandbits(16) for _ in range(3))
        agree = ~((s ^ a) | (s ^ b)) & 0xFFFF
        assert mutate(s, a, b) & agree == s & agree


def test_unsat_constraint():
    c = TRUE_PC.extend(E.eq(X, E.const(8, 1))).extend(E.eq(X, E.const(8, 2)))
    st = new_sampler(c, (8,))
    out, st = next_batch(st, Solver())
    assert out == [] and st.exhausted
    assert st.solver_calls == 1
    out, st = next_batch(st, Solver())
    assert out == [] and st.solver_calls == 1


def test_singleton_exhausts_after_all_flips():
    c = Constraint.of([E.eq(X, E.const(8, 7))])
    solver = Solver()
    st = new_sampler(c, (8,))
    out, st = next_batch(st, solver)
    assert out == [(7, SOLVER)]
    for i in range(8):
        assert not st.exhausted
        out, st = next_batch(st, solver)
        assert out == []
    assert st.exhausted
    assert st.solver_calls == solver.calls == 9


def test_batch_growth_on_four_bits():
    # a single 4-bit site is not expressible as program input, but the
    # sampler works on any widths
    solver = Solver()
    st = new_sampler(TRUE_PC, (4,))
    sizes = []
    while not st.exhausted and len(sizes) < 5:
        out, st = next_batch(st, solver)
        sizes.append(len(out))
    assert sizes == [1, 1, 2, 4, 8]
    assert solver.calls == st.batches == 5


def test_one_solver_call_per_batch():
    c = Constraint.of([E.ult(E.const(8, 30), X)])
    solver = Solver()
    st = new_sampler(c, (8, 8))
    for _ in range(12):
        before = solver.calls
        was_exhausted = st.exhausted
        _, st = next_batch(st, solver)
        assert solver.calls - before == (0 if was_exhausted else 1)
    assert st.solver_calls == solver.calls


def test_no_duplicates_and_solver_strings_satisfy():
    c = Constraint.of([E.ult(E.const(8, 100), X), E.ne(E.var(1, 8), E.const(8, 3))])
    solver = Solver()
    st = new_sampler(c, (8, 8), seed=5)
    seen = []
    for _ in range(200):
        if st.exhausted:
            break
        out, st = next_batch(st, solver)
        for bits, tag in out:
            seen.append(bits)
            if tag == SOLVER:
                vals = {0: bits & 0xFF, 1: bits >> 8}
                assert c.holds(vals)
    assert len(seen) == len(set(seen))


def test_app_fuzz_single_sample():
    c = Constraint.of([E.ult(E.const(8, 250), X)])
    out, st = app_fuzz(new_sampler(c, (8,)), 1, Solver())
    m = Solver().check(c, (8,))
    assert out == [(m.bits, SOLVER)]


def test_app_fuzz_three_samples():
    out, st = app_fuzz(new_sampler(TRUE_PC, (8,)), 3, Solver())
    assert len(out) >= 3
    assert len({b for b, _ in out}) == len(out)


def test_app_fuzz_exhausted_state():
    c = Constraint.of([E.eq(X, E.const(8, 7))])
    st = new_sampler(c, (8,))
    out, st = app_fuzz(st, 100, Solver())
    assert [b for b, _ in out] == [7] and st.exhausted
    out, st = app_fuzz(st, 1, Solver())
    assert out == []


def test_app_fuzz_rejects_zero():
    with pytest.raises(ValueError):
        app_fuzz(new_sampler(TRUE_PC, (8,)), 0, Solver())


def test_mutants_are_tagged():
    out, _ = app_fuzz(new_sampler(TRUE_PC, (8,)), 8, Solver())
    assert {t for _, t in out} == {SOLVER, MUTANT}


def test_mutation_depth_adds_pair_mutants():
    c = Constraint.of([E.ult(E.const(8, 3), X)])
    a, _ = sample(c, (8, 8), 40, mutation_depth=1)
    b, _ = sample(c, (8, 8), 40, mutation_depth=2)
    assert len(b) >= len(a)


def test_preservation_rate_of_solver_models(gt250):
    yes, _ = branch_addresses(gt250)
    s = step_to(gt250, initial_state(gt250), yes)
    inputs = []
    solver = Solver()
    for seed in range(3):
        m = solver.check(s.pc, s.input_widths, seed=seed)
        inputs.append(bits_to_input(m.bits, m.widths))
    r = preservation_rate(gt250, (yes,), inputs)
    assert r.rate == 1.0 and r.total == 3 and not r.vacuous


def test_preservation_rate_vacuous(gt250):
    r = preservation_rate(gt250, branch_addresses(gt250)[:1], [])
    assert r.rate == 1.0 and r.vacuous
