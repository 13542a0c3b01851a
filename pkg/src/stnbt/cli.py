"""Command line front end: ``stnbt {compile,validate,execute,generate,bench}``.

Exit status: 0 success, 1 plan invalid or execution FAILURE, 2 input or
compile error.
"""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import fixtures
from .bt import build_bt, export_bt_dot, export_bt_xml
from .causal import analyze, causal_report_json
from .executor import gantt, gantt_svg, run, simulated_performer, trace_jsonl
from .generator import PlanGeneratorConfig, generate
from .pddl import PddlError, Problem, TemporalPlan, parse_domain, parse_plan, parse_problem, parse_seconds
from .pddl import render_domain, render_plan, render_problem
from .pipeline import InvalidPlan, compile_plan
from .simple_plan import state_sequence, validate_plan
from .stn import InconsistentStn, export_stn_dot, propagate, stn_from_json, stn_to_json

log = logging.getLogger("stnbt")

COMPILE_ARTIFACTS = ("stn.dot", "stn.json", "bt.xml", "bt.dot", "causal.json")
EXECUTE_ARTIFACTS = ("trace.jsonl", "gantt.svg", "gantt.txt")
DEFAULT_COMPILE_EMIT = ("stn.dot", "stn.json", "bt.xml", "bt.dot")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    domain_path: Path | None = None
    problem_path: Path | None = None
    plan_path: Path | None = None
    fixture: str | None = None
    flexible: bool = False
    literal_threats: bool = False
    monitor_overall: bool = False
    clock: str = "virtual"
    seed: int = 0
    durations: dict[str, str] = field(default_factory=dict)
    emit: tuple[str, ...] = ()
    out: Path = Path(".")
    stn_in: Path | None = None
    validate: bool = True


def _read(path: Path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_inputs(cfg: RunConfig) -> tuple[Problem, TemporalPlan]:
    if cfg.fixture:
        try:
            f = fixtures.load(cfg.fixture)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        return f.problem, f.plan
    if not (cfg.domain_path and cfg.problem_path and cfg.plan_path):
        raise UsageError("give --fixture NAME or all of DOMAIN PROBLEM PLAN")
    texts = [_read(p) for p in (cfg.domain_path, cfg.problem_path, cfg.plan_path)]
    domain = parse_domain(texts[0])
    problem = parse_problem(texts[1], domain)
    return problem, parse_plan(texts[2], domain, problem)


def _load_durations(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    try:
        data = json.loads(_read(Path(path)))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if not isinstance(data, dict) or not all(isinstance(v, str) for v in data.values()):
        raise UsageError(f"{path}: expected a JSON object of name -> distribution strings")
    return data


def _write(cfg: RunConfig, name: str, text: str) -> None:
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / name).write_text(text)
    print(f"wrote {cfg.out / name}")


# --------------------------------------------------------------------------
# commands


def cmd_compile(cfg: RunConfig) -> int:
    emit = cfg.emit or DEFAULT_COMPILE_EMIT
    if cfg.stn_in is not None:
        g = stn_from_json(_read(cfg.stn_in))
        dm = propagate(g)
        artifacts = {"stn.dot": lambda: export_stn_dot(g), "stn.json": lambda: stn_to_json(g)}
        tree = build_bt(g, dm)
        artifacts.update({"bt.xml": lambda: export_bt_xml(tree), "bt.dot": lambda: export_bt_dot(tree)})
    else:
        problem, plan = load_inputs(cfg)
        c = compile_plan(problem, plan, cfg.flexible, check=cfg.validate, literal_threats=cfg.literal_threats)
        states = state_sequence(problem, c.simple_plan)
        artifacts = {
            "stn.dot": lambda: export_stn_dot(c.stn),
            "stn.json": lambda: stn_to_json(c.stn),
            "bt.xml": lambda: export_bt_xml(c.bt),
            "bt.dot": lambda: export_bt_dot(c.bt),
            "causal.json": lambda: causal_report_json(
                c.simple_plan, analyze(c.simple_plan, states, cfg.literal_threats)
            ),
        }
    for name in emit:
        if name not in artifacts:
            raise UsageError(f"compile cannot emit {name!r}")
        _write(cfg, name, artifacts[name]())
    return 0


def cmd_validate(cfg: RunConfig) -> int:
    problem, plan = load_inputs(cfg)
    report = validate_plan(problem, plan)
    print(report.to_json())
    return 0 if report.valid else 1


def _execute_once(cfg: RunConfig, problem: Problem, plan: TemporalPlan, seed: int):
    c = compile_plan(problem, plan, cfg.flexible, check=cfg.validate, literal_threats=cfg.literal_threats)
    performer = simulated_performer(cfg.durations, seed)
    return run(c.bt, problem, performer, cfg.clock, cfg.monitor_overall)


def cmd_execute(cfg: RunConfig) -> int:
    problem, plan = load_inputs(cfg)
    try:
        result = _execute_once(cfg, problem, plan, cfg.seed)
    except InconsistentStn as exc:
        print(f"FAILURE: inconsistent STN: {exc}")
        return 1
    artifacts = {
        "trace.jsonl": lambda: trace_jsonl(result.trace),
        "gantt.svg": lambda: gantt_svg(result.trace),
        "gantt.txt": lambda: gantt(result.trace),
    }
    for name in cfg.emit:
        if name not in artifacts:
            raise UsageError(f"execute cannot emit {name!r}")
        _write(cfg, name, artifacts[name]())
    print(gantt(result.trace), end="")
    print(f"{result.status.value} makespan={result.makespan / 1000:.3f}s")
    if result.diagnostic:
        print(result.diagnostic)
    return 0 if result.ok else 1


def cmd_generate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.count):
        seed = args.seed + k
        gcfg = PlanGeneratorConfig(
            action_pool=args.actions,
            fluent_pool=args.fluents,
            length=args.length,
            duration_min=parse_seconds(args.dmin),
            duration_max=parse_seconds(args.dmax),
            seed=seed,
        )
        inst = generate(gcfg)
        stem = f"gen{seed}"
        (out / f"{stem}_domain.pddl").write_text(render_domain(inst.domain))
        (out / f"{stem}_problem.pddl").write_text(render_problem(inst.problem))
        (out / f"{stem}_plan.txt").write_text(render_plan(inst.plan))
        print(f"wrote {out / stem}_{{domain.pddl,problem.pddl,plan.txt}}")
    return 0


BENCH_COLUMNS = ("Mean", "Stdev", "Median", "Max", "Min")


def bench_stats(makespans_s: list[float]) -> dict[str, float]:
    return {
        "Mean": statistics.fmean(makespans_s),
        "Stdev": statistics.stdev(makespans_s) if len(makespans_s) > 1 else 0.0,
        "Median": statistics.median(makespans_s),
        "Max": max(makespans_s),
        "Min": min(makespans_s),
    }


def cmd_bench(cfg: RunConfig, runs: int) -> int:
    if runs < 1:
        raise UsageError("--runs must be >= 1")
    problem, plan = load_inputs(cfg)
    makespans, failures = [], 0
    for k in range(runs):
        result = _execute_once(cfg, problem, plan, cfg.seed + k)
        failures += not result.ok
        makespans.append(result.makespan / 1000)
    sequential = sum(s.d for s in plan.steps) / 1000
    stats = bench_stats(makespans)
    print(f"{'':<16}" + "".join(f"{c:>10}" for c in BENCH_COLUMNS))
    print(f"{'stn-bt':<16}" + "".join(f"{stats[c]:>10.3f}" for c in BENCH_COLUMNS))
    print(f"sequential (planned durations): {sequential:.3f}")
    print(f"runs={runs} failures={failures}")
    return 0 if failures == 0 else 1


# --------------------------------------------------------------------------
# argument parsing


def _add_inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("domain", nargs="?", type=Path, help="PDDL domain file")
    p.add_argument("problem", nargs="?", type=Path, help="PDDL problem file")
    p.add_argument("plan", nargs="?", type=Path, help="time-triggered plan file")
    p.add_argument("--fixture", choices=fixtures.NAMES, help="use a bundled instance instead of files")


def _add_compile_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--flexible", action="store_true", help="root -> START links [t, inf) instead of [t, t]")
    p.add_argument("--literal-threats", action="store_true", help="guarded threat search without fluent-overlap rule")
    p.add_argument("--no-validate", dest="validate", action="store_false", help="skip the plan validity check")


def _add_exec_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--clock", choices=("virtual", "wall"), default="virtual")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--durations", help="JSON file: action name or signature -> distribution, e.g. \"uniform(18,22)\"")
    p.add_argument("--monitor-overall", action="store_true", help="check over-all conditions continuously")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stnbt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="build the STN and behavior tree")
    _add_inputs(p)
    _add_compile_opts(p)
    p.add_argument("--emit", action="append", choices=COMPILE_ARTIFACTS, help="artifact to write (repeatable)")
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--stn-in", type=Path, help="compile a BT from an STN JSON file instead of a plan")

    p = sub.add_parser("validate", help="check plan validity")
    _add_inputs(p)

    p = sub.add_parser("execute", help="compile then run against simulated performers")
    _add_inputs(p)
    _add_compile_opts(p)
    _add_exec_opts(p)
    p.add_argument("--emit", action="append", choices=EXECUTE_ARTIFACTS)
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("generate", help="write random valid instances")
    p.add_argument("--length", type=int, default=3)
    p.add_argument("--actions", type=int, default=4)
    p.add_argument("--fluents", type=int, default=5)
    p.add_argument("--dmin", default="1", help="seconds")
    p.add_argument("--dmax", default="5", help="seconds")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out", default=".")

    p = sub.add_parser("bench", help="makespan statistics over seeded runs")
    _add_inputs(p)
    _add_compile_opts(p)
    _add_exec_opts(p)
    p.add_argument("--runs", type=int, default=10)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        domain_path=args.domain,
        problem_path=args.problem,
        plan_path=args.plan,
        fixture=args.fixture,
        flexible=getattr(args, "flexible", False),
        literal_threats=getattr(args, "literal_threats", False),
        monitor_overall=getattr(args, "monitor_overall", False),
        clock=getattr(args, "clock", "virtual"),
        seed=getattr(args, "seed", 0),
        durations=_load_durations(getattr(args, "durations", None)),
        emit=tuple(getattr(args, "emit", None) or ()),
        out=getattr(args, "out", Path(".")),
        stn_in=getattr(args, "stn_in", None),
        validate=getattr(args, "validate", True),
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        if args.command == "generate":
            return cmd_generate(args)
        cfg = _config(args)
        if args.command == "compile":
            return cmd_compile(cfg)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "execute":
            return cmd_execute(cfg)
        return cmd_bench(cfg, args.runs)
    except InvalidPlan as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InconsistentStn as exc:
        print(f"error: inconsistent STN: {exc}", file=sys.stderr)
        return 2
    except (PddlError, UsageError, ValueError) as exc:  # ValueError: bad distributions, bad STN JSON
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
