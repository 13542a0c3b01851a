from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stnbt.generator import MUTABLE_SETS, PlanGeneratorConfig, generate, mutate
from stnbt.pddl import render_domain, render_plan, render_problem
from stnbt.simple_plan import induced_simple_plan, state_sequence, validate_plan


def texts(inst):
    return render_domain(inst.domain), render_problem(inst.problem), render_plan(inst.plan)


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        PlanGeneratorConfig(length=-1)
    with pytest.raises(ValueError):
        PlanGeneratorConfig(duration_min=0)
    with pytest.raises(ValueError):
        PlanGeneratorConfig(duration_min=5, duration_max=4)


def test_same_seed_same_instance():
    cfg = PlanGeneratorConfig(length=4, seed=11)
    assert texts(generate(cfg)) == texts(generate(cfg))
    assert texts(generate(cfg)) != texts(generate(PlanGeneratorConfig(length=4, seed=12)))


def test_schema_pool_covers_plan():
    inst = generate(PlanGeneratorConfig(action_pool=2, length=5, seed=3))
    assert len(inst.domain.schemas) == 5
    assert len({s.action.name for s in inst.plan}) == 5
    inst = generate(PlanGeneratorConfig(action_pool=6, length=2, seed=3))
    assert len(inst.domain.schemas) == 6


def test_empty_instance():
    inst = generate(PlanGeneratorConfig(length=0, seed=1))
    assert not inst.plan.steps
    assert validate_plan(inst.problem, inst.plan).valid
    assert mutate(inst, 0) is inst


@settings(max_examples=100, deadline=None)
@given(
    seed=st.integers(0, 1_000_000),
    length=st.integers(0, 7),
    fluents=st.integers(1, 8),
    dmin=st.integers(1, 3000),
    span=st.integers(0, 4000),
)
def test_generated_instances_are_valid(seed, length, fluents, dmin, span):
    cfg = PlanGeneratorConfig(fluent_pool=fluents, length=length, duration_min=dmin, duration_max=dmin + span, seed=seed)
    inst = generate(cfg)
    assert validate_plan(inst.problem, inst.plan).valid
    assert len(inst.plan) == length
    for s in inst.plan:
        assert dmin <= s.d <= dmin + span
        assert s.action.schema.admits(s.d)
    assert all(g.positive for g in inst.problem.goal)
    # goals are drawn from fluents true at the end; none if nothing is
    assert len(inst.problem.goal) <= 3
    final = state_sequence(inst.problem, induced_simple_plan(inst.plan, inst.problem)).final
    assert bool(inst.problem.goal) == bool(final)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 1_000_000), length=st.integers(1, 6), mseed=st.integers(0, 1_000_000))
def test_mutant_differs_in_exactly_one_literal(seed, length, mseed):
    inst = generate(PlanGeneratorConfig(length=length, seed=seed))
    m = mutate(inst, mseed)
    assert m.problem == inst.problem
    assert [(s.t, s.d, s.action.name) for s in m.plan] == [(s.t, s.d, s.action.name) for s in inst.plan]
    changed = []
    for name, schema in inst.domain.schemas.items():
        other = m.domain.schemas[name]
        for which in MUTABLE_SETS:
            a, b = getattr(schema, which), getattr(other, which)
            if a != b:
                changed.append((name, which, a - b, b - a))
    assert len(changed) == 1
    _, _, removed, added = changed[0]
    assert len(removed) == len(added) == 1
    (new,) = added
    assert new.negate() not in getattr(m.domain.schemas[changed[0][0]], changed[0][1])
