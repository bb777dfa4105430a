import pytest
from hypothesis import given, settings, strategies as st

from concolic_mcts.concrete import (Outcome, SEED_INPUT, WorkerPool, execute,
                                    execute_batch)
from concolic_mcts.lang import branch_addresses

from conftest import bench, compile_text


def arms(p):
    a_true, a_false = branch_addresses(p)
    return a_true, a_false


def test_empty_program_returns():
    p = compile_text("fn main() { }")
    t = execute(p, b"", 100, 1000)
    assert t.addrs == () and t.outcome is Outcome.RETURNED


def test_gt250_true_arm(gt250):
    yes, _ = arms(gt250)
    t = execute(gt250, b"\xff", 100, 1000)
    assert t.addrs == (yes,) and t.outcome is Outcome.ABORTED


def test_gt250_seed_takes_common_arm(gt250):
    _, no = arms(gt250)
    t = execute(gt250, SEED_INPUT, 100, 1000)
    assert t.addrs == (no,) and t.outcome is Outcome.RETURNED


def test_reads_past_end_are_zero(gt250):
    assert execute(gt250, b"", 100, 1000) == execute(gt250, b"\x00", 100, 1000)


def test_little_endian_reads():
    p = compile_text("fn main() { x: u16 = input(16); if (x == 0x0102) { abort(); } }")
    assert execute(p, b"\x02\x01", 10, 100).outcome is Outcome.ABORTED
    assert execute(p, b"\x01\x02", 10, 100).outcome is Outcome.RETURNED


def test_truncated_wide_read_zero_extends():
    p = compile_text("fn main() { x: u16 = input(16); if (x == 0x00ab) { abort(); } }")
    assert execute(p, b"\xab", 10, 100).outcome is Outcome.ABORTED


def test_division_by_zero_is_runtime_error():
    p = compile_text("fn main() { x: u8 = input(8); y: u8 = 10 / x; }")
    assert execute(p, b"\x00", 10, 100).outcome is Outcome.RUNTIME_ERROR
    assert execute(p, b"\x02", 10, 100).outcome is Outcome.RETURNED


def test_wrapping_and_signed_ops():
    p = compile_text("""
fn main() {
    a: i8 = input(8) as i8;
    b: i8 = a * 2;
    if (b < 0) { abort(); }
    if (a / 2 == -3) { assert(a % 2 == 0); }
}""")
    assert execute(p, bytes([0x40]), 10, 100).outcome is Outcome.ABORTED  # 64*2 wraps
    assert execute(p, bytes([0xF9]), 10, 100).outcome is Outcome.ABORTED  # -7*2 = -14
    # -7 / 2 truncates to -3 and -7 % 2 == -1
    q = compile_text("fn main() { a: i8 = input(8) as i8; if (a / 2 == -3) { assert(a % 2 == 0); } }")
    assert execute(q, bytes([0xF9]), 10, 100).outcome is Outcome.ASSERT_FAILED
    assert execute(q, bytes([0xFA]), 10, 100).outcome is Outcome.RETURNED


def test_recursion():
    p = bench("ackermann")
    # ack(3, 3) = 61 passes the assert
    assert execute(p, bytes([3, 3]), 10 ** 5, 10 ** 6).outcome is Outcome.RETURNED


def test_depth_cap_truncates_to_prefix():
    p = bench("ackermann")
    full = execute(p, bytes([2, 5]), 10 ** 5, 10 ** 6)
    capped = execute(p, bytes([2, 5]), 10, 10 ** 6)
    assert capped.outcome is Outcome.DEPTH_CAPPED
    assert len(capped) == 10
    assert full.addrs[:10] == capped.addrs


def test_step_cap():
    p = compile_text("fn main() { x = input(8); while (x < 200) { x = x + 0; } }")
    assert execute(p, b"\x00", 10 ** 5, 500).outcome is Outcome.STEP_CAPPED


def test_caps_must_be_positive(gt250):
    with pytest.raises(ValueError):
        execute(gt250, b"", 0, 10)


def test_batch_empty_and_order(gt250):
    assert execute_batch(gt250, [], 10, 100) == []
    vs = [b"\xff", b"\x00"]
    assert execute_batch(gt250, vs, 10, 100) == [execute(gt250, v, 10, 100) for v in vs]


def test_pool_matches_sequential():
    p = bench("ackermann")
    inputs = [bytes([m, n]) for m in range(4) for n in (0, 2)]
    with WorkerPool(p, 8, min_batch=1) as pool:
        par = pool.map(inputs, 10 ** 5, 20000)
    with WorkerPool(p, 1) as pool:
        seq = pool.map(inputs, 10 ** 5, 20000)
    assert len(inputs) == 8
    assert par == seq


@settings(max_examples=60, deadline=None)
@given(st.binary(max_size=4), st.integers(0, 3))
def test_zero_extension_never_changes_trace(data, pad):
    p = bench("chokepoint")
    assert execute(p, data, 100, 10 ** 4) == execute(p, data + bytes(pad), 100, 10 ** 4)


@settings(max_examples=40, deadline=None)
@given(st.binary(min_size=2, max_size=2), st.integers(1, 30), st.integers(1, 30))
def test_monotone_truncation(data, d1, d2):
    p = bench("ackermann")
    d1, d2 = sorted((d1, d2))
    t1 = execute(p, data, d1, 10 ** 6)
    t2 = execute(p, data, d2, 10 ** 6)
    if t1.outcome is Outcome.DEPTH_CAPPED:
        assert t2.addrs[:len(t1)] == t1.addrs
