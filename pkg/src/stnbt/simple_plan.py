"""Happening points, the induced simple plan, state sequences and the
plan-validity oracle.

A temporal plan is flattened into timed instantaneous steps: one START and
one END per plan action, plus an OVERALL check at the midpoint of every pair
of consecutive happenings the action spans (only for actions that have an
over-all condition). An INIT step at -1 ms carries the initial state and a
GOAL step at the last happening carries the goal.
"""

from __future__ import annotations

import bisect
import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .pddl import Fluent, Literal, Problem, TemporalPlan, format_ms

__all__ = [
    "StepKind",
    "SimpleStep",
    "SimplePlan",
    "WorldState",
    "StateSequence",
    "Failure",
    "ValidationReport",
    "happenings",
    "induced_simple_plan",
    "apply_effects",
    "check_conditions",
    "unmet_literal",
    "state_sequence",
    "validate_plan",
]

INIT_TIME = -1

WorldState = frozenset  # frozenset[Fluent]; closed world


class StepKind(enum.IntEnum):
    # value order is the tie-break order at equal times
    INIT = 0
    START = 1
    OVERALL = 2
    END = 3
    GOAL = 4


@dataclass(frozen=True)
class SimpleStep:
    at: Fraction  # exact time in ms; OVERALL steps sit on half milliseconds
    kind: StepKind
    owner: tuple[str, int] | None  # (signature, plan start ms); None for INIT/GOAL
    conds: frozenset[Literal] = frozenset()
    effs: frozenset[Literal] = frozenset()
    order: int = 0  # index of the owning plan step (file order)

    @property
    def t(self) -> int:
        """Time in whole milliseconds, midpoints rounded half up."""
        return int(self.at + Fraction(1, 2)) if self.at.denominator != 1 else int(self.at)

    @property
    def ident(self) -> tuple:
        return (self.kind, self.owner, self.at)

    @property
    def is_snap(self) -> bool:
        return self.kind in (StepKind.START, StepKind.END)

    def sort_key(self) -> tuple:
        return (self.at, self.kind, self.order)

    def label(self) -> str:
        if self.owner is None:
            return self.kind.name
        sig, _ = self.owner
        return f"{self.kind.name}{sig}@{format_ms(self.t)}"

    def __str__(self) -> str:
        return self.label()


@dataclass(frozen=True)
class SimplePlan:
    steps: tuple[SimpleStep, ...]
    happenings: tuple[int, ...]
    _by_happening: Mapping[int, tuple[SimpleStep, ...]] = field(default_factory=dict, repr=False, compare=False)
    _position: Mapping[tuple, int] = field(default_factory=dict, repr=False, compare=False)

    def __iter__(self) -> Iterator[SimpleStep]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def init(self) -> SimpleStep:
        return self.steps[0]

    @property
    def goal(self) -> SimpleStep | None:
        last = self.steps[-1]
        return last if last.kind is StepKind.GOAL else None

    def position(self, step: SimpleStep) -> int:
        return self._position[step.ident]

    def at_happening(self, t: int) -> tuple[SimpleStep, ...]:
        """START/END steps applied at happening ``t`` (S(t)), in plan order."""
        return self._by_happening.get(t, ())

    def window(self, lo: int, hi: float) -> list[SimpleStep]:
        """START/END steps at ``lo`` and OVERALL steps with lo <= at < hi."""
        out = list(self.at_happening(lo))
        out.extend(s for s in self.steps if s.kind is StepKind.OVERALL and lo <= s.at < hi)
        return out

    def previous(self, t: int) -> int | None:
        i = bisect.bisect_left(self.happenings, t)
        return self.happenings[i - 1] if i > 0 else None

    def next(self, t: int) -> int | None:
        i = bisect.bisect_right(self.happenings, t)
        return self.happenings[i] if i < len(self.happenings) else None

    def anchor(self, step: SimpleStep) -> int | None:
        """Happening a step is evaluated at: its own time, or for OVERALL
        steps the last happening strictly before it."""
        if step.kind is StepKind.OVERALL:
            i = bisect.bisect_left(self.happenings, step.at)
            return self.happenings[i - 1] if i > 0 else None
        if step.kind is StepKind.INIT:
            return None
        return int(step.at)


def happenings(plan: TemporalPlan) -> list[int]:
    points = {s.t for s in plan.steps} | {s.t + s.d for s in plan.steps}
    return sorted(points)


def induced_simple_plan(plan: TemporalPlan, problem: Problem | None = None) -> SimplePlan:
    hs = happenings(plan)
    steps: list[SimpleStep] = []
    for order, ta in enumerate(plan.steps):
        act = ta.action
        steps.append(SimpleStep(Fraction(ta.t), StepKind.START, ta.key, act.cond_start, act.eff_start, order))
        steps.append(SimpleStep(Fraction(ta.end), StepKind.END, ta.key, act.cond_end, act.eff_end, order))
        if act.cond_overall:
            lo = bisect.bisect_left(hs, ta.t)
            hi = bisect.bisect_left(hs, ta.end)
            for i in range(lo, hi):
                mid = Fraction(hs[i] + hs[i + 1], 2)
                steps.append(SimpleStep(mid, StepKind.OVERALL, ta.key, act.cond_overall, frozenset(), order))
    steps.sort(key=SimpleStep.sort_key)
    init = SimpleStep(Fraction(INIT_TIME), StepKind.INIT, None, frozenset(), problem.init if problem else frozenset(), -1)
    out = [init, *steps]
    if problem is not None:
        goal_at = Fraction(hs[-1]) if hs else Fraction(0)
        out.append(SimpleStep(goal_at, StepKind.GOAL, None, problem.goal, frozenset(), len(plan.steps)))
    by_h: dict[int, list[SimpleStep]] = {}
    for s in steps:
        if s.is_snap:
            by_h.setdefault(int(s.at), []).append(s)
    return SimplePlan(
        tuple(out),
        tuple(hs),
        {t: tuple(v) for t, v in by_h.items()},
        {s.ident: i for i, s in enumerate(out)},
    )


def apply_effects(state: frozenset[Fluent], effs: Iterable[Literal]) -> frozenset[Fluent]:
    add = {lit.fluent for lit in effs if lit.positive}
    delete = {lit.fluent for lit in effs if not lit.positive}
    if not add and not delete:
        return state
    return frozenset((state - delete) | add)


def check_conditions(conds: Iterable[Literal], state: frozenset[Fluent]) -> bool:
    return all((lit.fluent in state) == lit.positive for lit in conds)


def unmet_literal(conds: Iterable[Literal], state: frozenset[Fluent]) -> Literal | None:
    for lit in sorted(conds):
        if (lit.fluent in state) != lit.positive:
            return lit
    return None


@dataclass(frozen=True)
class StateSequence:
    initial: frozenset[Fluent]
    states: Mapping[int, frozenset[Fluent]]  # state after every step at the happening
    _times: tuple[int, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_times", tuple(sorted(self.states)))

    def before(self, t: int) -> frozenset[Fluent]:
        """State in force just before happening ``t``."""
        i = bisect.bisect_left(self._times, t)
        return self.states[self._times[i - 1]] if i > 0 else self.initial

    def after(self, t: int) -> frozenset[Fluent]:
        return self.states[t]

    @property
    def final(self) -> frozenset[Fluent]:
        return self.states[max(self.states)] if self.states else self.initial


def state_sequence(initial: frozenset[Fluent] | Problem, sp: SimplePlan) -> StateSequence:
    init = initial.init_state if isinstance(initial, Problem) else frozenset(initial)
    states: dict[int, frozenset[Fluent]] = {}
    current = init
    for t in sp.happenings:
        for step in sp.at_happening(t):
            current = apply_effects(current, step.effs)
        states[t] = current
    return StateSequence(init, states)


# --------------------------------------------------------------------------
# validation oracle


@dataclass(frozen=True)
class Failure:
    time_ms: int
    step: str
    literal: str

    def to_json(self) -> dict:
        return {"time_ms": self.time_ms, "step": self.step, "literal": self.literal}


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    failures: tuple[Failure, ...] = ()

    @property
    def first_failure(self) -> Failure | None:
        return self.failures[0] if self.failures else None

    def to_json(self) -> str:
        return json.dumps(
            {"valid": self.valid, "failures": [f.to_json() for f in self.failures]}, sort_keys=True
        )


def _holds_after_some_subset(
    step: SimpleStep, others: list[SimpleStep], before: frozenset[Fluent]
) -> bool:
    # any subset of the other steps at the happening may have fired first
    for size in range(len(others) + 1):
        for subset in combinations(others, size):
            state = before
            for s in subset:
                state = apply_effects(state, s.effs)
            if check_conditions(step.conds, state):
                return True
    return False


def validate_plan(problem: Problem, plan: TemporalPlan) -> ValidationReport:
    """Simulate ``plan`` from the initial state and report every unmet
    condition: snap conditions at their happening, over-all conditions at
    each midpoint the action spans, and the goal at the end."""
    sp = induced_simple_plan(plan, problem)
    failures: list[Failure] = []
    state = problem.init_state
    overall = [s for s in sp.steps if s.kind is StepKind.OVERALL]
    for t in sp.happenings:
        here = list(sp.at_happening(t))
        for step in here:
            if not _holds_after_some_subset(step, [s for s in here if s is not step], state):
                lit = unmet_literal(step.conds, state)
                failures.append(Failure(t, step.label(), str(lit)))
        for step in here:
            state = apply_effects(state, step.effs)
        nxt = sp.next(t)
        for step in overall:
            if t < step.at and (nxt is None or step.at < nxt):
                lit = unmet_literal(step.conds, state)
                if lit is not None:
                    failures.append(Failure(step.t, step.label(), str(lit)))
    lit = unmet_literal(problem.goal, state)
    if lit is not None:
        end = sp.happenings[-1] if sp.happenings else 0
        failures.append(Failure(end, "GOAL", str(lit)))
    return ValidationReport(not failures, tuple(failures))
