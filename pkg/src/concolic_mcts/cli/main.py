"""Command-line interface.

    concolic-mcts run PROGRAM [--sim-budget N] [--seed S] [--out DIR] ...
    concolic-mcts replay DIR PROGRAM
    concolic-mcts oracle PROGRAM
    concolic-mcts sensitivity [PROGRAM ...] [--seeds K]
    concolic-mcts sampler CONSTRAINT_FILE --n K [--seed S]
    concolic-mcts solver check CONSTRAINT_FILE
"""
import argparse
import json
import logging
import math
import os
import sys
from importlib import resources
from pathlib import Path

from ..lang import LangError, SourceProgram, compile_source
from ..lang.ir import Address
from ..mcts.engine import HyperParams, run
from ..solver.core import Solver, bits_to_input
from ..solver.enumerate import TooLarge
from ..symex.constraint import parse_constraint
from ..symex.executor import (BUDGET, INFEASIBLE, MalformedTarget,
                              initial_state, step_to)

log = logging.getLogger("concolic_mcts")

BENCH_NAMES = ["ackermann", "chokepoint", "eqchain", "eqchain16x3", "mismatch",
               "rangeweave", "straightline", "tautology"]


class CliError(Exception):
    pass


def setup_logging():
    level = os.environ.get("LEGION_LOG", "off").lower()
    levels = {"off": logging.CRITICAL + 1, "info": logging.INFO, "debug": logging.DEBUG}
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(levels.get(level, logging.CRITICAL + 1))


def bench_source(name):
    return resources.files("concolic_mcts").joinpath("bench", name + ".mini").read_text()


def read_program(path):
    """(source text, IrProgram). Paths under bench/ fall back to the bundled corpus."""
    p = Path(path)
    if p.exists():
        text = p.read_text()
    elif p.parent.name == "bench" and p.stem in BENCH_NAMES:
        text = bench_source(p.stem)
    else:
        raise CliError(f"no such file: {path}")
    try:
        return text, compile_source(SourceProgram(text, str(path)))
    except LangError as e:
        raise CliError(f"{path}: {e}") from e
    except ValueError as e:
        raise CliError(f"{path}: {e}") from e


def nonneg_float(s):
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def count(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def add_hp_flags(ap):
    d = HyperParams()
    ap.add_argument("--rho", type=nonneg_float, default=math.sqrt(2))
    ap.add_argument("--cores", type=count, default=d.cores)
    ap.add_argument("--tree-depth", type=count, default=d.tree_depth)
    ap.add_argument("--conex-budget", type=count, default=d.conex_budget,
                    help="step cap of one concrete execution")
    ap.add_argument("--symex-budget", type=count, default=d.symex_budget,
                    help="instruction cap of one symbolic step")
    ap.add_argument("--n-samples", type=count, default=d.n_samples)
    ap.add_argument("--persistent", action="store_true")
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--sim-budget", type=count, default=d.sim_budget)
    ap.add_argument("--max-seconds", type=nonneg_float, default=0.0)
    ap.add_argument("--score", choices=["uct", "random"], default="uct")
    ap.add_argument("--mutation-depth", type=count, default=1)


def hp_from(args):
    return HyperParams(rho=args.rho, cores=args.cores, tree_depth=args.tree_depth,
                       conex_budget=args.conex_budget, symex_budget=args.symex_budget,
                       n_samples=args.n_samples, persistent=args.persistent,
                       seed=args.seed, sim_budget=args.sim_budget, score=args.score,
                       mutation_depth=args.mutation_depth, max_seconds=args.max_seconds)


def parse_addr_path(text):
    try:
        return [Address.parse(a.strip()) for a in text.split(",") if a.strip()]
    except ValueError as e:
        raise CliError(f"bad address path {text!r}: {e}") from e


def dump_pc(p, addrs, budget):
    s = initial_state(p)
    for a in addrs:
        try:
            nxt = step_to(p, s, a, budget)
        except MalformedTarget as e:
            raise CliError(f"{a}: {e}") from e
        if nxt is INFEASIBLE:
            raise CliError(f"{a}: arm is infeasible")
        if nxt is BUDGET:
            raise CliError(f"{a}: symbolic budget exhausted")
        s = nxt
    return s.pc.to_text(s.input_widths)


def cmd_run(args):
    from .suite import stats_summary, write_suite
    text, p = read_program(args.program)
    if args.dump_ir:
        print(p.dump())
        return 0
    if args.dump_pc is not None:
        sys.stdout.write(dump_pc(p, parse_addr_path(args.dump_pc), args.symex_budget))
        return 0
    hp = hp_from(args)
    eng, suite, stats = run(p, hp, wall_clock=args.wall_ms)
    summary = stats_summary(eng, stats)
    if args.out:
        write_suite(args.out, text, eng, suite, stats)
        summary["out"] = str(args.out)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_replay(args):
    from .suite import replay
    text, p = read_program(args.program)
    try:
        report, manifest, same = replay(args.dir, p, text)
    except (OSError, KeyError, ValueError) as e:
        raise CliError(f"cannot read suite in {args.dir}: {e}") from e
    if not same:
        print("warning: program differs from the one the suite was generated for",
              file=sys.stderr)
    recorded = manifest["branch_cov"]
    out = {"branch_cov": report.branch_cov, "recorded_branch_cov": recorded,
           "branches_hit": report.branches_hit, "branches_total": report.branches_total,
           "paths_found": report.paths_found, "tests": len(manifest["tests"])}
    print(json.dumps(out, sort_keys=True))
    return 0 if report.branch_cov >= recorded else 1


def cmd_oracle(args):
    from .oracle import oracle_outcomes
    _, p = read_program(args.program)
    try:
        counts = oracle_outcomes(p, args.tree_depth, args.conex_budget)
    except TooLarge as e:
        raise CliError(str(e)) from e
    for (addrs, outcome), n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0][0])):
        print(n, outcome.value, " ".join(str(a) for a in addrs) or "-")
    print(f"paths={len({a for a, _ in counts})}")
    return 0


def cmd_sensitivity(args):
    from .sensitivity import sensitivity, to_csv
    progs = {}
    for path in args.programs or [f"bench/{n}.mini" for n in ("chokepoint", "rangeweave", "eqchain")]:
        _, p = read_program(path)
        progs[Path(path).stem] = p

    def progress(label, override):
        log.info("setting %s %s done", label, override)

    try:
        rows = sensitivity(progs, list(range(args.seeds)), args.sim_budget, progress=progress)
    except ValueError as e:
        raise CliError(str(e)) from None
    text = to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def read_constraint(path):
    try:
        return parse_constraint(Path(path).read_text())
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}") from e
    except ValueError as e:
        raise CliError(f"{path}: {e}") from e


def cmd_sampler(args):
    from ..appfuzz import app_fuzz, new_sampler
    from ..solver.core import infer_widths
    c, widths = read_constraint(args.constraint)
    widths = infer_widths(c, widths)
    solver = Solver()
    st = new_sampler(c, widths, seed=args.seed, mutation_depth=args.mutation_depth)
    out, st = app_fuzz(st, args.n, solver)
    for bits, _ in out:
        print(bits_to_input(bits, widths).hex())
    print(f"batches={st.batches} solver_calls={st.solver_calls} inputs={len(out)}")
    return 0


def cmd_solver(args):
    c, widths = read_constraint(args.constraint)
    m = Solver().check(c, widths)
    print("unsat" if m is None else f"sat {m}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="concolic-mcts",
                                 description="Concolic test generation guided by Monte Carlo tree search.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="explore a program and emit a test suite")
    r.add_argument("program")
    add_hp_flags(r)
    r.add_argument("--out", help="directory for suite.json, test_*.bin and stats")
    r.add_argument("--dump-ir", action="store_true", help="print the IR and exit")
    r.add_argument("--dump-pc", metavar="ADDRS",
                   help="print the path condition along comma-separated arm addresses and exit")
    r.add_argument("--wall-ms", action="store_true", help="fill the wall_ms CSV column")
    r.set_defaults(func=cmd_run)

    rp = sub.add_parser("replay", help="re-run a stored suite and report coverage")
    rp.add_argument("dir")
    rp.add_argument("program")
    rp.set_defaults(func=cmd_replay)

    o = sub.add_parser("oracle", help="enumerate every input of a small program")
    o.add_argument("program")
    o.add_argument("--tree-depth", type=count, default=HyperParams().tree_depth)
    o.add_argument("--conex-budget", type=count, default=HyperParams().conex_budget)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sensitivity", help="one-factor hyperparameter study")
    s.add_argument("programs", nargs="*")
    s.add_argument("--seeds", type=count, default=5)
    s.add_argument("--sim-budget", type=count, default=30)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sensitivity)

    sm = sub.add_parser("sampler", help="sample inputs for a constraint file")
    sm.add_argument("constraint")
    sm.add_argument("--n", type=count, default=1,
                    help="sample until at least N inputs are out or the sampler is exhausted")
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--mutation-depth", type=count, default=1)
    sm.set_defaults(func=cmd_sampler)

    sv = sub.add_parser("solver", help="solver utilities")
    svs = sv.add_subparsers(dest="solver_cmd", required=True)
    chk = svs.add_parser("check", help="check a constraint file")
    chk.add_argument("constraint")
    chk.set_defaults(func=cmd_solver)
    return ap


def main(argv=None):
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
