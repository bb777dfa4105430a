import pytest

from concolic_mcts.concrete import execute
from concolic_mcts.lang import (Address, LangError, MiniSyntaxError, SourceProgram,
                                TypeMismatch, UnknownIdentifier, branch_addresses,
                                compile_source, parse)
from concolic_mcts.lang import ast as A
from concolic_mcts.lang.ir import Branch, ReturnT
from concolic_mcts.cli.main import bench_source

from conftest import GT250, bench, compile_text


def branch_terms(p):
    return [b.term for f in p.functions for b in f.blocks if isinstance(b.term, Branch)]


def decision_count(tree):
    """Conditionals plus short-circuit operators, counted on the AST alone."""
    total = 0

    def logic_ops(e):
        n = 0
        stack = [e]
        while stack:
            x = stack.pop()
            if isinstance(x, A.Binary):
                if x.op in ("&&", "||"):
                    n += 1
                stack += [x.left, x.right]
            elif isinstance(x, (A.Unary, A.Cast, A.ChooseConcrete)):
                stack.append(x.operand)
            elif isinstance(x, A.Call):
                stack += list(x.args)
        return n

    def stmts(body):
        nonlocal total
        for s in body:
            if isinstance(s, (A.If, A.While, A.Assert)):
                total += 1 + logic_ops(s.cond)
            elif isinstance(s, A.Assign):
                v = s.value
                if isinstance(v, A.Binary) and v.op in ("&&", "||"):
                    total += 1
                total += logic_ops(v)
            if isinstance(s, A.If):
                stmts(s.then)
                stmts(s.orelse)
            elif isinstance(s, A.While):
                stmts(s.body)

    for f in tree.functions:
        stmts(f.body)
    return total


def test_parse_empty_main():
    tree = parse(SourceProgram("fn main() { }"))
    assert len(tree.functions) == 1
    assert tree.functions[0].body == []


def test_parse_if_with_input():
    tree = parse(SourceProgram(GT250))
    body = tree.functions[0].body
    assert sum(isinstance(s, A.If) for s in A.walk_stmts(body)) == 1
    inputs = [e for s in A.walk_stmts(body) for x in A.stmt_exprs(s)
              for e in A.walk_exprs(x) if isinstance(e, A.Input)]
    assert len(inputs) == 1 and inputs[0].width == 8


def test_syntax_error_points_at_brace():
    with pytest.raises(MiniSyntaxError) as ei:
        parse(SourceProgram("fn main() { if } "))
    assert (ei.value.line, ei.value.col) == (1, 16)
    assert ei.value.found == "}"


@pytest.mark.parametrize("text, exc", [
    ("fn main() { y = x; }", UnknownIdentifier),
    ("fn main() { x: u8 = input(8); y: u16 = input(16); z = x + y; }", TypeMismatch),
    ("fn main() { x = input(12); }", LangError),
    ("fn f() { } ", LangError),
    ("fn main(a: u8) { }", LangError),
    ("fn main() { } fn main() { }", LangError),
    ("   ", ValueError),
])
def test_rejects(text, exc):
    with pytest.raises(exc):
        compile_source(SourceProgram(text))


def test_explicit_cast_fixes_width_mismatch():
    p = compile_text("fn main() { x: u8 = input(8); y: u16 = input(16); z = (x as u16) + y; }")
    assert p.input_widths == [8, 16]


def test_lower_empty_main():
    p = compile_text("fn main() { }")
    assert len(p.blocks) == 1
    assert isinstance(p.blocks[0].term, ReturnT)
    assert branch_addresses(p) == []


def test_lower_single_if(gt250):
    assert len(gt250.blocks) >= 3
    assert len(branch_terms(gt250)) == 1
    assert len(branch_addresses(gt250)) == 2


def test_short_circuit_gives_one_branch_per_operand():
    p = compile_text("fn main() { a = input(8); b = input(8); if (a > 1 && b > 2 || a == 0) { abort(); } }")
    assert len(branch_terms(p)) == 3


def test_value_context_logic_branches():
    p = compile_text("fn main() { a = input(8); t = a > 1 && a < 9; if (t) { abort(); } }")
    tree = parse(SourceProgram("fn main() { a = input(8); t = a > 1 && a < 9; if (t) { abort(); } }"))
    assert len(branch_terms(p)) == decision_count(tree) == 3


def test_ackermann_branch_count_matches_ast_walk():
    text = bench_source("ackermann")
    p = compile_text(text)
    n = decision_count(parse(SourceProgram(text)))
    assert n == 8
    assert len(branch_terms(p)) == n
    assert len(branch_addresses(p)) == 2 * n


@pytest.mark.parametrize("name", ["chokepoint", "eqchain", "rangeweave", "tautology", "mismatch"])
def test_bench_branch_counts(name):
    text = bench_source(name)
    p = compile_text(text)
    assert len(branch_terms(p)) == decision_count(parse(SourceProgram(text)))
    arms = branch_addresses(p)
    assert len(arms) == len(set(arms)) == 2 * len(branch_terms(p))


def test_lowering_is_stable():
    text = bench_source("ackermann")
    assert compile_text(text).dump() == compile_text(text).dump()


def test_address_order_and_text():
    assert Address(0, 5) < Address(1, 0) < Address(1, 2)
    assert str(Address(1, 2)) == "f1.b2"
    assert Address.parse("f1.b2") == Address(1, 2)
    with pytest.raises(ValueError):
        Address.parse("x1.b2")


def test_dump_ir_format(gt250):
    lines = gt250.dump().splitlines()
    assert lines[0].startswith("f0.b0: branch")
    assert all(line.split(":")[0].startswith("f0.b") for line in lines)


@pytest.mark.parametrize("name", ["ackermann", "chokepoint", "rangeweave", "mismatch"])
def test_traces_use_branch_arms_only(name):
    p = bench(name)
    arms = set(branch_addresses(p))
    for v in range(0, 1 << 16, 251):
        t = execute(p, v.to_bytes(2, "little"), 10 ** 5, 20000)
        assert set(t.addrs) <= arms
