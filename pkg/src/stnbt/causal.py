"""Satisfying and threat relations between steps of an induced simple plan.

Both searches walk backward over the happening points from the step under
examination. A supporter is a step whose effects turn one of the step's
conditions from false to true; a threat is a step that, were the two placed
at the same happening, would break the other's conditions or touch the same
fluent ("no moving targets").
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from itertools import combinations

from .pddl import Fluent
from .simple_plan import (
    SimplePlan,
    SimpleStep,
    StateSequence,
    StepKind,
    apply_effects,
    check_conditions,
)

__all__ = [
    "CausalLinkKind",
    "ThreatRule",
    "CausalResult",
    "intermediate_state",
    "state_diff",
    "get_satisfy",
    "get_threat",
    "threat_rules",
    "analyze",
    "causal_report_json",
]


class CausalLinkKind(enum.Enum):
    SATISFY = "satisfy"
    THREAT = "threat"


class ThreatRule(enum.IntEnum):
    # a's effects break a_k's conditions
    BREAKS_OTHER = 1
    # a_k's effects break a's conditions
    BROKEN_BY_OTHER = 2
    # both change the same fluent
    MOVING_TARGET = 3


def state_diff(x: frozenset[Fluent], y: frozenset[Fluent]) -> frozenset[Fluent]:
    return x ^ y


def intermediate_state(
    a: SimpleStep, sp: SimplePlan, t: int, x1: frozenset[Fluent]
) -> frozenset[Fluent]:
    """First state reachable from ``x1`` by applying the effects of some
    subset of the other START/END steps at happening ``t`` that satisfies
    ``a``'s conditions; ``x1`` itself if no subset works.

    Subsets are tried by increasing size, then in plan order.
    """
    others = [s for s in sp.at_happening(t) if s.ident != a.ident]
    for size in range(len(others) + 1):
        for subset in combinations(others, size):
            state = x1
            for s in subset:
                state = apply_effects(state, s.effs)
            if check_conditions(a.conds, state):
                return state
    return x1


def _walk(sp: SimplePlan, a: SimpleStep):
    """Yield happenings from ``a``'s anchor back to the first one."""
    anchor = sp.anchor(a)
    if anchor is None:
        return
    for t2 in reversed(sp.happenings):
        if t2 <= anchor:
            yield t2


def get_satisfy(a: SimpleStep, sp: SimplePlan, states: StateSequence) -> set[tuple]:
    found: set[tuple] = set()
    for t2 in _walk(sp, a):
        x1 = states.before(t2)
        for r in a.conds:
            if check_conditions((r,), x1):
                continue
            for ak in sp.at_happening(t2):
                if ak.ident == a.ident:
                    continue
                if check_conditions((r,), apply_effects(x1, ak.effs)):
                    found.add(ak.ident)
    if any(check_conditions((r,), states.initial) for r in a.conds):
        found.add(sp.init.ident)
    return found


def _fluents(lits) -> frozenset[Fluent]:
    return frozenset(lit.fluent for lit in lits)


def _broken(conds, before: frozenset[Fluent], after: frozenset[Fluent], literal: bool) -> bool:
    if literal:
        return not check_conditions(conds, after)
    # only literals that actually held can be broken
    return any(check_conditions((c,), before) and not check_conditions((c,), after) for c in conds)


def threat_rules(
    a: SimpleStep, sp: SimplePlan, states: StateSequence, literal: bool = False
) -> dict[tuple, ThreatRule]:
    """Threat search keyed by step identity; the value is the first rule
    that fired for the pair.

    With ``literal`` set, a happening is only examined when ``a``'s
    conditions could hold there, and the moving-target rule compares state
    differences only. The default (complete) mode examines every happening,
    counts a condition as broken only if it held before the other step's
    effects, and also flags two steps whose effects touch the same fluent;
    together these make every linearization of the resulting partial order
    valid.
    """
    found: dict[tuple, ThreatRule] = {}
    a_overall = a.kind is StepKind.OVERALL
    for t2 in _walk(sp, a):
        x1 = states.before(t2)
        xa = intermediate_state(a, sp, t2, x1)
        if literal and not check_conditions(a.conds, xa):
            continue
        t3 = sp.next(t2)
        for ak in sp.window(t2, float("inf") if t3 is None else t3):
            if ak.ident == a.ident:
                continue
            k_overall = ak.kind is StepKind.OVERALL
            xk = intermediate_state(ak, sp, t2, x1)
            x_hat = apply_effects(xk, a.effs)
            x_bar = apply_effects(xa, ak.effs)
            rule = None
            if not a_overall and _broken(ak.conds, xk, x_hat, literal):
                rule = ThreatRule.BREAKS_OTHER
            elif not k_overall and _broken(a.conds, xa, x_bar, literal):
                rule = ThreatRule.BROKEN_BY_OTHER
            elif not a_overall and not k_overall:
                if state_diff(xk, x_hat) & state_diff(xa, x_bar):
                    rule = ThreatRule.MOVING_TARGET
                elif not literal and _fluents(a.effs) & _fluents(ak.effs):
                    rule = ThreatRule.MOVING_TARGET
            if rule is not None:
                found.setdefault(ak.ident, rule)
    return found


def get_threat(a: SimpleStep, sp: SimplePlan, states: StateSequence, literal: bool = False) -> set[tuple]:
    return set(threat_rules(a, sp, states, literal))


@dataclass(frozen=True)
class CausalResult:
    step: SimpleStep
    supporters: frozenset[tuple]
    threats: dict[tuple, ThreatRule]

    def to_json(self, sp: SimplePlan) -> dict:
        def label(ident: tuple) -> str:
            return sp.steps[sp._position[ident]].label()

        return {
            "step": self.step.label(),
            "supporters": sorted(label(i) for i in self.supporters),
            "threats": sorted([label(i), int(r)] for i, r in self.threats.items()),
        }


def analyze(sp: SimplePlan, states: StateSequence, literal: bool = False) -> list[CausalResult]:
    """Causal results for every step after INIT. The GOAL pseudo-step only
    collects supporters."""
    out = []
    for step in sp.steps[1:]:
        supporters = frozenset(get_satisfy(step, sp, states))
        threats = {} if step.kind is StepKind.GOAL else threat_rules(step, sp, states, literal)
        out.append(CausalResult(step, supporters, threats))
    return out


def causal_report_json(sp: SimplePlan, results: list[CausalResult]) -> str:
    return json.dumps([r.to_json(sp) for r in results], indent=2, sort_keys=True) + "\n"
