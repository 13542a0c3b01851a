"""Bundled example instances: ``matchcellar`` and ``assembly``."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from ..pddl import Domain, Problem, TemporalPlan, parse_domain, parse_plan, parse_problem

NAMES = ("matchcellar", "assembly")


@dataclass(frozen=True)
class Fixture:
    name: str
    domain: Domain
    problem: Problem
    plan: TemporalPlan


def fixture_text(name: str, part: str) -> str:
    suffix = "plan.txt" if part == "plan" else f"{part}.pddl"
    return resources.files(__package__).joinpath(f"{name}_{suffix}").read_text()


def load(name: str) -> Fixture:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(NAMES)}")
    domain = parse_domain(fixture_text(name, "domain"))
    problem = parse_problem(fixture_text(name, "problem"), domain)
    plan = parse_plan(fixture_text(name, "plan"), domain, problem)
    return Fixture(name, domain, problem, plan)
