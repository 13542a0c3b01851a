"""Random valid temporal planning instances and single-literal mutants.

Instances use zero-arity fluents ``p0 .. p{m-1}`` and one schema per plan
step, so mutating a schema touches exactly one step. Plans are built
forward in time: every snap action draws its conditions from the state it
will see and its effects avoid fluents that a running action's over-all
condition depends on. All 2n happenings are distinct.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .pddl import (
    Domain,
    DurativeActionSchema,
    Fluent,
    Literal,
    Problem,
    TemporalPlan,
    TimedAction,
)
from .simple_plan import apply_effects

__all__ = ["PlanGeneratorConfig", "Instance", "generate", "mutate", "MUTABLE_SETS"]

MUTABLE_SETS = ("cond_start", "cond_overall", "cond_end", "eff_start", "eff_end")


@dataclass(frozen=True)
class PlanGeneratorConfig:
    action_pool: int = 4
    fluent_pool: int = 5
    length: int = 3
    duration_min: int = 1000
    duration_max: int = 5000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.length < 0 or self.fluent_pool < 1:
            raise ValueError("length must be >= 0 and fluent_pool >= 1")
        if not 1 <= self.duration_min <= self.duration_max:
            raise ValueError("need 1 <= duration_min <= duration_max")


@dataclass(frozen=True)
class Instance:
    domain: Domain
    problem: Problem
    plan: TemporalPlan


def _pick_literals(rng: random.Random, fluents: list[Fluent], state: frozenset[Fluent], k: int) -> frozenset[Literal]:
    """``k`` literals true in ``state``."""
    chosen = rng.sample(fluents, min(k, len(fluents)))
    return frozenset(Literal(f, f in state) for f in chosen)


def _pick_effects(rng: random.Random, fluents: list[Fluent], state, locked: set[Fluent], k: int) -> frozenset[Literal]:
    free = [f for f in fluents if f not in locked]
    chosen = rng.sample(free, min(k, len(free)))
    # mostly toggle, sometimes re-assert
    return frozenset(Literal(f, (f not in state) if rng.random() < 0.8 else (f in state)) for f in chosen)


def _schedule(rng: random.Random, cfg: PlanGeneratorConfig) -> list[tuple[int, int]]:
    """(start, duration) pairs with pairwise distinct happenings."""
    out: list[tuple[int, int]] = []
    used: set[int] = set()
    t = 0
    gap = max(2, cfg.duration_max)
    for _ in range(cfg.length):
        # redraw until neither snap lands on an existing happening
        while True:
            d = rng.randint(cfg.duration_min, cfg.duration_max)
            if t not in used and t + d not in used:
                break
            t += rng.randint(1, gap)
        out.append((t, d))
        used |= {t, t + d}
        t += rng.randint(1, gap)
    return out


def generate(cfg: PlanGeneratorConfig) -> Instance:
    rng = random.Random(cfg.seed)
    fluents = [Fluent(f"p{i}") for i in range(cfg.fluent_pool)]
    init = frozenset(f for f in fluents if rng.random() < 0.5)
    sched = _schedule(rng, cfg)
    # events in time order: (time, kind, step); kind 0 = start, 1 = end
    events = sorted([(s, 0, i) for i, (s, _) in enumerate(sched)] + [(s + d, 1, i) for i, (s, d) in enumerate(sched)])
    parts: dict[int, dict[str, frozenset[Literal]]] = {i: {} for i in range(cfg.length)}
    locks: dict[int, frozenset[Fluent]] = {}
    state = init
    for _, kind, i in events:
        locked = set().union(*(v for j, v in locks.items() if j != i)) if locks else set()
        p = parts[i]
        if kind == 0:
            p["cond_start"] = _pick_literals(rng, fluents, state, rng.randint(0, 2))
            p["eff_start"] = _pick_effects(rng, fluents, state, locked, rng.randint(0, 2))
            state = apply_effects(state, p["eff_start"])
            overall = _pick_literals(rng, fluents, state, rng.randint(0, 1))
            p["cond_overall"] = overall
            locks[i] = frozenset(lit.fluent for lit in overall)
        else:
            locks.pop(i)
            p["cond_end"] = _pick_literals(rng, fluents, state, rng.randint(0, 2))
            p["eff_end"] = _pick_effects(rng, fluents, state, locked, rng.randint(1, 2))
            state = apply_effects(state, p["eff_end"])
    pool = max(cfg.action_pool, cfg.length)
    schemas = {}
    for i in range(pool):
        d = sched[i][1] if i < cfg.length else cfg.duration_min
        schemas[f"a{i}"] = DurativeActionSchema(f"a{i}", (), duration_min=d, duration_max=d, **parts.get(i, {}))
    positives = sorted(state)
    goal = frozenset(Literal(f) for f in rng.sample(positives, min(len(positives), rng.randint(1, 3))))
    domain = Domain(
        f"gen{cfg.seed}",
        (":strips", ":typing", ":negative-preconditions", ":durative-actions"),
        predicates={f.name: () for f in fluents},
        schemas=schemas,
    )
    problem = Problem(f"gen{cfg.seed}-p", domain.name, {}, frozenset(Literal(f) for f in init), goal)
    steps = tuple(TimedAction(s, schemas[f"a{i}"].ground(()), d) for i, (s, d) in enumerate(sched))
    return Instance(domain, problem, TemporalPlan(steps, problem.name))


def mutate(inst: Instance, seed: int) -> Instance:
    """Flip the polarity of, or swap the fluent of, one literal in one
    condition or effect set of one used schema."""
    rng = random.Random(seed)
    if not inst.plan.steps:
        return inst
    fluents = sorted(inst.domain.predicates)
    for _ in range(1000):
        step_i = rng.randrange(len(inst.plan.steps))
        schema = inst.plan.steps[step_i].action.schema
        which = rng.choice(MUTABLE_SETS)
        lits = sorted(getattr(schema, which))
        if not lits:
            continue
        old = rng.choice(lits)
        if rng.random() < 0.5:
            new = old.negate()
        else:
            others = [f for f in fluents if f != old.fluent.name]
            if not others:
                continue
            new = Literal(Fluent(rng.choice(others)), old.positive)
        changed = (set(lits) - {old}) | {new}
        if any(x.negate() in changed for x in changed) or len(changed) != len(lits):
            continue
        new_schema = replace(schema, **{which: frozenset(changed)})
        schemas = dict(inst.domain.schemas)
        schemas[schema.name] = new_schema
        domain = replace(inst.domain, schemas=schemas)
        steps = tuple(
            TimedAction(s.t, domain.schemas[s.action.name].ground(s.action.args), s.d) for s in inst.plan.steps
        )
        return Instance(domain, inst.problem, TemporalPlan(steps, inst.plan.problem_ref))
    return inst
