import os

# every solver call on a small instance is checked against enumeration,
# except in full-budget runs where it would dominate the run time
CROSS_CHECK = "CONCOLIC_MCTS_SOLVER_CROSSCHECK"
os.environ.setdefault(CROSS_CHECK, "1")

import pytest

from concolic_mcts.cli.main import bench_source
from concolic_mcts.lang import SourceProgram, compile_source


def compile_text(text):
    return compile_source(SourceProgram(text))


def bench(name):
    return compile_text(bench_source(name))


GT250 = "fn main() { x = input(8); if (x > 250) { abort(); } }"


@pytest.fixture(autouse=True)
def _cross_check(request, monkeypatch):
    if request.node.get_closest_marker("long_run"):
        monkeypatch.setenv(CROSS_CHECK, "0")


@pytest.fixture
def gt250():
    return compile_text(GT250)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance.py::test_criterion_" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::")[-1][len("test_criterion_"):]
            num, _, title = name.partition("_")
            detail = dict(rep.user_properties).get("detail", "")
            lines.append((int(num), f"criterion {int(num):2d} {title}: "
                                    f"{'PASS' if outcome == 'passed' else 'FAIL'}  {detail}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
