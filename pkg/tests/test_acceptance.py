"""Acceptance criteria 1-8. Each test prints one PASS/FAIL line, which the
terminal summary repeats (see conftest)."""

from __future__ import annotations

import hashlib
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import linearizations, replay_linearization, replay_trace
from stnbt import fixtures
from stnbt.bt import export_bt_dot, export_bt_xml
from stnbt.cli import main
from stnbt.executor import action_intervals, run, simulated_performer, trace_jsonl
from stnbt.generator import PlanGeneratorConfig, generate, mutate
from stnbt.pddl import TemporalPlan
from stnbt.pipeline import compile_plan, execute_plan
from stnbt.simple_plan import validate_plan
from stnbt.stn import LinkKind, NodeKind, StnNode, Stn, build_stn, export_stn_dot, propagate, schedule_violations

MATCH_DURATIONS = {"light_match": "uniform(8,9)", "mend_fuse": "uniform(4,5)"}
MOVE_DURATIONS = {"move": "uniform(18,22)"}

REPORT: list[str] = []


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    REPORT.append(line)
    print(line)


def span(spans, signature, start):
    return spans[f"{signature}@{start}"]


def matchcellar_runs(fx, seeds):
    yield execute_plan(fx.problem, fx.plan)
    compiled = compile_plan(fx.problem, fx.plan, flexible=True)
    for seed in seeds:
        yield run(compiled.bt, fx.problem, simulated_performer(MATCH_DURATIONS, seed))


def test_c1_matchcellar_containment(matchcellar):
    t0 = time.perf_counter()
    g = build_stn(matchcellar.problem, matchcellar.plan)
    labels = {(g.nodes[p].label().split("@")[0], g.nodes[lk.peer].label().split("@")[0]) for p, lk in g.links()}
    links_ok = True
    for i in (1, 2):
        lm, mf = f"(light_match match{i})", f"(mend_fuse fuse{i} match{i})"
        links_ok &= (f"START{lm}", f"START{mf}") in labels
        links_ok &= (f"END{mf}", f"END{lm}") in labels
    starts = {s.action.signature: s.t for s in matchcellar.plan}
    traces_ok, runs = True, 0
    for res in matchcellar_runs(matchcellar, range(20)):
        runs += 1
        spans = action_intervals(res.trace)
        traces_ok &= res.ok
        for i in (1, 2):
            lm, mf = f"(light_match match{i})", f"(mend_fuse fuse{i} match{i})"
            (ls, le), (ms, me) = span(spans, lm, starts[lm]), span(spans, mf, starts[mf])
            traces_ok &= ls <= ms and me <= le
    elapsed = time.perf_counter() - t0
    ok = links_ok and traces_ok and elapsed < 1.0
    report(1, ok, f"containment links present={links_ok}, {runs} traces contained={traces_ok}, {elapsed:.2f}s")
    assert ok


def test_c2_mutual_exclusion(matchcellar):
    t0 = time.perf_counter()
    compiled = compile_plan(matchcellar.problem, matchcellar.plan, flexible=True)
    overlaps = failures = 0
    for seed in range(100):
        res = run(compiled.bt, matchcellar.problem, simulated_performer(MATCH_DURATIONS, seed))
        failures += not res.ok
        spans = action_intervals(res.trace)
        (s1, e1) = span(spans, "(mend_fuse fuse1 match1)", 1)
        (s2, e2) = span(spans, "(mend_fuse fuse2 match2)", 5002)
        overlaps += max(s1, s2) < min(e1, e2)
    elapsed = time.perf_counter() - t0
    ok = overlaps == 0 and failures == 0 and elapsed < 10
    report(2, ok, f"100 runs, {overlaps} mend_fuse overlaps, {failures} failures, {elapsed:.2f}s")
    assert ok


def test_c3_success_iff_valid():
    t0 = time.perf_counter()
    valid_runs = valid_fail = 0
    mutants = mismatches = invalid_mutants = 0
    seed = 0
    while valid_runs < 500 or mutants < 500:
        cfg = PlanGeneratorConfig(length=1 + seed % 7, fluent_pool=3 + seed % 4, seed=seed)
        inst = generate(cfg)
        assert validate_plan(inst.problem, inst.plan).valid
        valid_runs += 1
        valid_fail += not execute_plan(inst.problem, inst.plan).ok
        m = mutate(inst, seed)
        verdict = validate_plan(m.problem, m.plan).valid
        invalid_mutants += not verdict
        mutants += 1
        mismatches += execute_plan(m.problem, m.plan).ok != verdict
        seed += 1
    elapsed = time.perf_counter() - t0
    ok = valid_fail == 0 and mismatches == 0 and elapsed < 120
    report(
        3,
        ok,
        f"{valid_runs} valid plans ({valid_fail} not SUCCESS), {mutants} mutants "
        f"({invalid_mutants} invalid, {mismatches} verdict mismatches), {elapsed:.1f}s",
    )
    assert ok


def test_c4_planned_schedule_satisfies_stn():
    instances = [(f.problem, f.plan) for f in map(fixtures.load, fixtures.NAMES)]
    for seed in range(300):
        inst = generate(PlanGeneratorConfig(length=seed % 8, fluent_pool=2 + seed % 6, seed=seed))
        instances.append((inst.problem, inst.plan))
    bad = 0
    for problem, plan in instances:
        for flexible in (False, True):
            g = build_stn(problem, plan, flexible=flexible)
            violations = schedule_violations(g)
            dm = propagate(g)
            bad += bool(violations) or not np.all(np.diag(dm.d) == 0)
    ok = bad == 0
    report(4, ok, f"{len(instances)} instances x 2 modes, {bad} with violated links or nonzero d[i][i]")
    assert ok


def test_c5_every_linearization_reaches_goal():
    t0 = time.perf_counter()
    plans = orders = bad = 0
    for seed in range(600):
        inst = generate(PlanGeneratorConfig(length=1 + seed % 4, fluent_pool=3 + seed % 4, seed=seed))
        g = build_stn(inst.problem, inst.plan)
        plans += 1
        for order in linearizations(g):
            orders += 1
            goal_ok, conds_ok = replay_linearization(inst.problem, g, order)
            bad += not (goal_ok and conds_ok)
    elapsed = time.perf_counter() - t0
    ok = orders > 0 and bad == 0 and elapsed < 30
    report(5, ok, f"{plans} plans of <= 4 actions, {orders} linearizations, {bad} invalid, {elapsed:.1f}s")
    assert ok


def test_c6_parallel_overlap_benefit(assembly, capsys):
    durations = str(Path(fixtures.__file__).parent / "assembly_durations.json")
    code = main(["bench", "--fixture", "assembly", "--flexible", "--durations", durations, "--runs", "10"])
    out = capsys.readouterr().out.splitlines()
    mean = float(out[1].split()[1])
    sequential = sum(s.d for s in assembly.plan) / 1000
    compiled = compile_plan(assembly.problem, assembly.plan, flexible=True)
    overlapping = 0
    for seed in range(10):
        res = run(compiled.bt, assembly.problem, simulated_performer(MOVE_DURATIONS, seed))
        spans = action_intervals(res.trace)
        moves = [v for k, v in spans.items() if k.startswith("(move ")]
        pres = [v for k, v in spans.items() if k.startswith(("(prepick ", "(prerelease "))]
        overlapping += any(max(a, c) < min(b, d) for a, b in pres for c, d in moves)
    ok = code == 0 and mean < sequential and overlapping >= 9
    report(6, ok, f"bench mean {mean:.3f}s < sequential {sequential:.3f}s, overlap in {overlapping}/10 runs")
    assert ok


def test_c7_stn_micro_example():
    g = Stn()
    g.add_node(StnNode(0, NodeKind.START, 0))
    g.add_node(StnNode(1, NodeKind.START, 0))
    g.add_link(0, 1, 6, 10, LinkKind.CAUSAL)  # distance graph: 0->1 weight 10, 1->0 weight -6
    dm = propagate(g)
    ok = dm.bounds(0, 1) == (6, 10) and dm.d[0, 1] == 10 and dm.d[1, 0] == -6
    report(7, ok, f"implied bounds {dm.bounds(0, 1)}")
    assert ok


def artifact_hashes(name: str) -> dict[str, str]:
    fx = fixtures.load(name)
    c = compile_plan(fx.problem, fx.plan)
    flex = compile_plan(fx.problem, fx.plan, flexible=True)
    durations = MATCH_DURATIONS if name == "matchcellar" else MOVE_DURATIONS
    texts = {
        "stn.dot": export_stn_dot(c.stn),
        "bt.xml": export_bt_xml(c.bt),
        "bt.dot": export_bt_dot(c.bt),
        "trace": trace_jsonl(run(c.bt, fx.problem).trace),
        "trace.seeded": trace_jsonl(run(flex.bt, fx.problem, simulated_performer(durations, 3)).trace),
    }
    return {k: hashlib.sha256(v.encode()).hexdigest() for k, v in texts.items()}


def test_c8_determinism(tmp_path, capsys):
    same = all(artifact_hashes(n) == artifact_hashes(n) for n in fixtures.NAMES)
    # and across CLI invocations writing files
    digests = []
    for k in range(2):
        out = tmp_path / str(k)
        for name in fixtures.NAMES:
            main(["compile", "--fixture", name, "--out", str(out / name)])
            main(["execute", "--fixture", name, "--emit", "trace.jsonl", "--out", str(out / name)])
        digests.append({p.relative_to(out): hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(out.rglob("*.*"))})
    capsys.readouterr()
    ok = same and digests[0] == digests[1] and len(digests[0]) == 10
    report(8, ok, f"in-process hashes equal={same}, {len(digests[0])} CLI artifacts byte-identical={digests[0] == digests[1]}")
    assert ok


def test_replay_of_acceptance_traces(matchcellar):
    # the traces used above replay cleanly against the tree they came from
    compiled = compile_plan(matchcellar.problem, matchcellar.plan, flexible=True)
    for seed in range(5):
        res = run(compiled.bt, matchcellar.problem, simulated_performer(MATCH_DURATIONS, seed))
        assert replay_trace(compiled.bt, matchcellar.problem.init_state, res.trace) == []


@pytest.mark.parametrize("name", fixtures.NAMES)
def test_fixture_plans_are_valid(name):
    fx = fixtures.load(name)
    assert validate_plan(fx.problem, fx.plan).valid
    assert not validate_plan(fx.problem, TemporalPlan()).valid
