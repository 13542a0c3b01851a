"""Tick-based execution of a compiled behavior tree.

The executor owns a single world state, a clock in milliseconds and the set
of finished snap actions. Leaves that reach SUCCESS or FAILURE keep that
status (one-shot semantics); SEQUENCE nodes remember their position.

With the virtual clock the root is re-ticked at the same instant while new
events keep appearing; once the instant is quiet the clock jumps to the next
pending release (a WAIT_TIME deadline or a performer completion).
"""

from __future__ import annotations

import enum
import json
import random
import re
import time
from dataclasses import dataclass, field
from typing import Mapping, Protocol

from .bt import BehaviorTree, BtKind, BtNode, SnapRef
from .pddl import Fluent, Problem, format_ms
from .simple_plan import apply_effects, check_conditions, unmet_literal

__all__ = [
    "TickStatus",
    "PollStatus",
    "ActionPerformer",
    "Fixed",
    "Uniform",
    "Normal",
    "parse_distribution",
    "SimulatedPerformer",
    "simulated_performer",
    "TraceEvent",
    "ExecutionContext",
    "ExecutionResult",
    "tick",
    "run",
    "action_intervals",
    "gantt",
    "gantt_svg",
    "trace_jsonl",
]


class TickStatus(enum.Enum):
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"
    RUNNING = "RUNNING"


class PollStatus(enum.Enum):
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


class ActionPerformer(Protocol):
    def start(self, signature: str, planned_ms: int, clock: int) -> object: ...

    def poll(self, token: object, clock: int) -> PollStatus: ...

    def next_event(self, clock: int) -> int | None:
        """Earliest completion time after ``clock``, if known."""
        ...


# --------------------------------------------------------------------------
# duration distributions (parameters in milliseconds)


@dataclass(frozen=True)
class Fixed:
    ms: int | None = None  # None: the planned duration

    def sample(self, rng: random.Random, planned: int) -> int:
        return planned if self.ms is None else self.ms


@dataclass(frozen=True)
class Uniform:
    lo: int
    hi: int

    def sample(self, rng: random.Random, planned: int) -> int:
        return round(rng.uniform(self.lo, self.hi))


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def sample(self, rng: random.Random, planned: int) -> int:
        return max(0, round(rng.gauss(self.mu, self.sigma)))


_DIST = re.compile(r"^\s*(fixed|uniform|normal)\s*\(([^)]*)\)\s*$", re.IGNORECASE)


def parse_distribution(text: str):
    """``fixed(5)``, ``uniform(18,22)``, ``normal(20,1.5)`` or ``planned``;
    numbers are seconds."""
    if text.strip().lower() == "planned":
        return Fixed()
    m = _DIST.match(text)
    if not m:
        raise ValueError(f"bad duration distribution {text!r}")
    kind = m.group(1).lower()
    try:
        args = [float(x) * 1000 for x in m.group(2).split(",")]
    except ValueError:
        raise ValueError(f"bad duration distribution {text!r}") from None
    arity = {"fixed": 1, "uniform": 2, "normal": 2}[kind]
    if len(args) != arity or any(a < 0 for a in args):
        raise ValueError(f"bad duration distribution {text!r}")
    if kind == "fixed":
        return Fixed(round(args[0]))
    if kind == "uniform":
        lo, hi = sorted(args)
        return Uniform(round(lo), round(hi))
    return Normal(args[0], args[1])


@dataclass
class _Job:
    signature: str
    started: int
    done_at: int
    fails: bool


class SimulatedPerformer:
    """Completes each dispatched action after a sampled duration.

    ``config`` maps a full signature ``(name args..)`` or a bare action name
    to a distribution; ``"*"`` is the fallback. Unlisted actions run for
    their planned duration. Signatures or names in ``failing`` report
    failure at their completion time.
    """

    def __init__(self, config: Mapping[str, object] | None = None, seed: int = 0, failing=()):
        self.config = dict(config or {})
        self.rng = random.Random(seed)
        self.failing = frozenset(failing)
        self.jobs: list[_Job] = []

    def _dist(self, signature: str):
        name = signature.strip("()").split()[0]
        for key in (signature, name, "*"):
            if key in self.config:
                return self.config[key]
        return Fixed()

    def start(self, signature: str, planned_ms: int, clock: int) -> int:
        d = self._dist(signature).sample(self.rng, planned_ms)
        name = signature.strip("()").split()[0]
        fails = signature in self.failing or name in self.failing
        self.jobs.append(_Job(signature, clock, clock + d, fails))
        return len(self.jobs) - 1

    def poll(self, token: int, clock: int) -> PollStatus:
        job = self.jobs[token]
        if clock < job.done_at:
            return PollStatus.RUNNING
        return PollStatus.FAILED if job.fails else PollStatus.DONE

    def next_event(self, clock: int) -> int | None:
        pending = [j.done_at for j in self.jobs if j.done_at > clock]
        return min(pending, default=None)


def simulated_performer(config: Mapping[str, object] | None = None, seed: int = 0, failing=()) -> SimulatedPerformer:
    parsed = {k: parse_distribution(v) if isinstance(v, str) else v for k, v in (config or {}).items()}
    return SimulatedPerformer(parsed, seed, failing)


# --------------------------------------------------------------------------
# execution state


@dataclass(frozen=True)
class TraceEvent:
    clock_ms: int
    node: int
    event: str
    action: str | None = None

    def to_json(self) -> str:
        data = {"clock_ms": self.clock_ms, "node": self.node, "event": self.event}
        if self.action is not None:
            data["action"] = self.action
        return json.dumps(data, sort_keys=True)


@dataclass
class ExecutionContext:
    tree: BehaviorTree
    state: frozenset[Fluent]
    performer: ActionPerformer
    clock: int = 0
    finished: dict[SnapRef, int] = field(default_factory=dict)
    trace: list[TraceEvent] = field(default_factory=list)
    status: dict[int, TickStatus] = field(default_factory=dict)
    cursor: dict[int, int] = field(default_factory=dict)
    tokens: dict[tuple[str, int], object] = field(default_factory=dict)
    first_tick: dict[int, int] = field(default_factory=dict)
    deadlines: set[int] = field(default_factory=set)
    settling: bool = False
    diagnostic: str = ""

    def record(self, node: BtNode, status: TickStatus) -> TickStatus:
        if self.status.get(node.id) is not status:
            self.status[node.id] = status
            action = str(node.ref) if node.kind is BtKind.EXECUTE_ACTION else None
            self.trace.append(TraceEvent(self.clock, node.id, status.value, action))
        return status

    def fail(self, node: BtNode, why: str) -> TickStatus:
        if not self.diagnostic:
            self.diagnostic = f"{format_ms(self.clock)}: {node.kind.value} #{node.id}: {why}"
        return self.record(node, TickStatus.FAILURE)

    def running(self) -> list[SnapRef]:
        """START refs dispatched whose END has not been applied."""
        out = []
        for ref in self.finished:
            if ref.snap == "START" and SnapRef(ref.action, ref.start, "END") not in self.finished:
                out.append(ref)
        return out


_DONE = (TickStatus.SUCCESS, TickStatus.FAILURE)


def tick(node: BtNode, ctx: ExecutionContext) -> TickStatus:
    prev = ctx.status.get(node.id)
    if prev in _DONE:
        return prev
    ctx.first_tick.setdefault(node.id, ctx.clock)
    kind = node.kind
    S, F, R = TickStatus.SUCCESS, TickStatus.FAILURE, TickStatus.RUNNING

    if kind is BtKind.SEQUENCE:
        i = ctx.cursor.get(node.id, 0)
        while i < len(node.children):
            st = tick(ctx.tree.nodes[node.children[i]], ctx)
            if st is not S:
                ctx.cursor[node.id] = i
                return ctx.record(node, st)
            i += 1
        ctx.cursor[node.id] = i
        return ctx.record(node, S)

    if kind is BtKind.PARALLEL:
        result = S
        for c in node.children:
            st = tick(ctx.tree.nodes[c], ctx)
            if st is F:
                return ctx.record(node, F)
            if st is R:
                result = R
        return ctx.record(node, result)

    if kind is BtKind.SUCCESS_LEAF:
        return ctx.record(node, S)

    if kind is BtKind.WAIT_TIME:
        if ctx.clock >= node.time:
            return ctx.record(node, S)
        ctx.deadlines.add(node.time)
        return ctx.record(node, R)

    if kind is BtKind.CHECK_TIME:
        if ctx.clock > node.time:
            return ctx.fail(node, f"clock {ctx.clock} past upper bound {node.time}")
        return ctx.record(node, S)

    if kind is BtKind.WAIT_ACTION:
        return ctx.record(node, S if node.ref in ctx.finished else R)

    if kind is BtKind.CHECK_ACTION:
        if node.ref in ctx.finished:
            return ctx.record(node, S)
        # tolerate ordering among steps that complete in the same instant
        if ctx.clock == ctx.first_tick[node.id] and not ctx.settling:
            return ctx.record(node, R)
        return ctx.fail(node, f"{node.ref} has not happened")

    if kind in (BtKind.CHECK_AT_START, BtKind.CHECK_AT_END, BtKind.CHECK_OVERALL, BtKind.CHECK_GOAL):
        if check_conditions(node.literals, ctx.state):
            return ctx.record(node, S)
        return ctx.fail(node, f"condition {unmet_literal(node.literals, ctx.state)} does not hold")

    if kind in (BtKind.APPLY_AT_START, BtKind.APPLY_AT_END):
        ctx.state = apply_effects(ctx.state, node.literals)
        if kind is BtKind.APPLY_AT_END:
            ctx.finished[node.ref] = ctx.clock
        return ctx.record(node, S)

    if kind is BtKind.EXECUTE_ACTION:
        key = (node.ref.action, node.ref.start)
        if node.ref.snap == "START":
            ctx.tokens[key] = ctx.performer.start(node.ref.action, node.duration, ctx.clock)
            ctx.finished[node.ref] = ctx.clock
            return ctx.record(node, S)
        poll = ctx.performer.poll(ctx.tokens[key], ctx.clock)
        if poll is PollStatus.FAILED:
            return ctx.fail(node, f"performer reported failure of {node.ref.action}")
        return ctx.record(node, S if poll is PollStatus.DONE else R)

    raise ValueError(f"unknown node kind {kind}")


@dataclass(frozen=True)
class ExecutionResult:
    status: TickStatus
    makespan: int
    trace: tuple[TraceEvent, ...]
    final_state: frozenset[Fluent]
    diagnostic: str = ""

    @property
    def ok(self) -> bool:
        return self.status is TickStatus.SUCCESS


def _overall_violation(ctx: ExecutionContext, overall: Mapping[tuple[str, int], BtNode]) -> str | None:
    for ref in ctx.running():
        node = overall.get((ref.action, ref.start))
        if node is not None and not check_conditions(node.literals, ctx.state):
            return f"{format_ms(ctx.clock)}: over-all condition {unmet_literal(node.literals, ctx.state)} of {ref.action} broken"
    return None


def run(
    tree: BehaviorTree,
    problem: Problem | frozenset[Fluent],
    performer: ActionPerformer | None = None,
    clock_mode: str = "virtual",
    monitor_overall: bool = False,
    cadence_ms: int = 100,
    max_ticks: int = 1_000_000,
) -> ExecutionResult:
    """Tick the root until it returns SUCCESS or FAILURE."""
    state = problem.init_state if isinstance(problem, Problem) else frozenset(problem)
    ctx = ExecutionContext(tree, state, performer or SimulatedPerformer())
    root = tree.nodes[tree.root]
    overall = {(n.ref.action, n.ref.start): n for n in tree.nodes.values() if n.kind is BtKind.CHECK_OVERALL}
    if clock_mode == "wall":
        status = _run_wall(root, ctx, cadence_ms, max_ticks)
    elif clock_mode == "virtual":
        status = _run_virtual(root, ctx, overall if monitor_overall else {}, max_ticks)
    else:
        raise ValueError(f"unknown clock mode {clock_mode!r}")
    return ExecutionResult(status, ctx.clock, tuple(ctx.trace), ctx.state, ctx.diagnostic)


def _run_virtual(root: BtNode, ctx: ExecutionContext, overall, max_ticks: int) -> TickStatus:
    for _ in range(max_ticks):
        before = len(ctx.trace)
        ctx.deadlines = set()
        status = tick(root, ctx)
        if status is not TickStatus.RUNNING:
            return status
        if len(ctx.trace) > before:
            ctx.settling = False
            continue
        if not ctx.settling:
            ctx.settling = True
            continue
        ctx.settling = False
        why = _overall_violation(ctx, overall)
        if why:
            ctx.diagnostic = why
            return TickStatus.FAILURE
        candidates = [t for t in ctx.deadlines if t > ctx.clock]
        nxt = ctx.performer.next_event(ctx.clock)
        if nxt is not None:
            candidates.append(nxt)
        if not candidates:
            ctx.diagnostic = f"{format_ms(ctx.clock)}: deadlock, nothing pending can release the running nodes"
            return TickStatus.FAILURE
        ctx.clock = min(candidates)
    ctx.diagnostic = "tick budget exhausted"
    return TickStatus.FAILURE


def _run_wall(root: BtNode, ctx: ExecutionContext, cadence_ms: int, max_ticks: int) -> TickStatus:
    t0 = time.monotonic()
    for _ in range(max_ticks):
        ctx.clock = int((time.monotonic() - t0) * 1000)
        # settle the instant: CHECK_ACTION may only fail on the second pass
        for ctx.settling in (False, True):
            status = tick(root, ctx)
            if status is not TickStatus.RUNNING:
                return status
        ctx.settling = False
        time.sleep(cadence_ms / 1000)
    ctx.diagnostic = "tick budget exhausted"
    return TickStatus.FAILURE


# --------------------------------------------------------------------------
# reporting


def trace_jsonl(trace) -> str:
    return "".join(e.to_json() + "\n" for e in trace)


def action_intervals(trace) -> dict[str, tuple[int, int | None]]:
    """Per plan step: (dispatch clock, completion clock) from the trace.

    Keys are ``"(sig)@planned_start"``; the completion is the clock at
    which the end-join leaf succeeded."""
    out: dict[str, list] = {}
    for e in trace:
        if e.action is None or e.event != "SUCCESS":
            continue
        snap, rest = e.action.split("(", 1)
        key = "(" + rest
        if snap == "START":
            out.setdefault(key, [None, None])
            if out[key][0] is None:
                out[key][0] = e.clock_ms
        elif snap == "END":
            out.setdefault(key, [None, None])
            if out[key][1] is None:
                out[key][1] = e.clock_ms
    return {k: (v[0], v[1]) for k, v in out.items()}


def gantt(trace, width: int = 60) -> str:
    rows = action_intervals(trace)
    col = max([len(k) for k in rows] + [len("action")])
    lines = [f"{'action':<{col}} {'start':>9} {'end':>9}"]
    if not rows:
        return lines[0] + "\n"
    horizon = max((e if e is not None else s) for s, e in rows.values()) or 1
    for name, (s, e) in sorted(rows.items(), key=lambda kv: (kv[1][0], kv[0])):
        end = e if e is not None else horizon
        a = round(s / horizon * width)
        b = max(a + 1, round(end / horizon * width))
        bar = " " * a + "#" * (b - a)
        end_txt = format_ms(e) if e is not None else "-"
        lines.append(f"{name:<{col}} {format_ms(s):>9} {end_txt:>9} |{bar:<{width}}|")
    return "\n".join(lines) + "\n"


def gantt_svg(trace, scale: float = 0.005) -> str:
    """Bars with x in ms times ``scale`` px."""
    rows = sorted(action_intervals(trace).items(), key=lambda kv: (kv[1][0], kv[0]))
    horizon = max([(e if e is not None else s) for _, (s, e) in rows], default=0)
    label_w, row_h = 280, 20
    w = label_w + int(horizon * scale) + 20
    h = row_h * (len(rows) + 1)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="monospace" font-size="11">']
    for i, (name, (s, e)) in enumerate(rows):
        y = i * row_h + 4
        end = e if e is not None else horizon
        x = label_w + s * scale
        out.append(f'  <text x="4" y="{y + 12}">{name.replace("&", "&amp;").replace("<", "&lt;")}</text>')
        out.append(f'  <rect x="{x:.1f}" y="{y}" width="{max(1.0, (end - s) * scale):.1f}" height="14" fill="#4a7ab5"><title>{format_ms(s)} - {format_ms(end)}</title></rect>')
    out.append(f'  <text x="{label_w}" y="{h - 4}">0 .. {format_ms(horizon)} s</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
