"""Parse-to-execution pipeline shared by the CLI and the tests."""

from __future__ import annotations

from dataclasses import dataclass

from .bt import BehaviorTree, build_bt
from .executor import ActionPerformer, ExecutionResult, TickStatus, run
from .pddl import PlanError, Problem, TemporalPlan
from .simple_plan import SimplePlan, ValidationReport, induced_simple_plan, validate_plan
from .stn import DistanceMatrix, InconsistentStn, Stn, build_stn, propagate

__all__ = ["InvalidPlan", "Compiled", "compile_plan", "execute_plan"]


class InvalidPlan(PlanError):
    def __init__(self, report: ValidationReport):
        f = report.first_failure
        super().__init__(f"plan is not valid: {f.step} at {f.time_ms} ms needs {f.literal}")
        self.report = report


@dataclass(frozen=True)
class Compiled:
    simple_plan: SimplePlan
    stn: Stn
    dm: DistanceMatrix
    bt: BehaviorTree


def compile_plan(
    problem: Problem,
    plan: TemporalPlan,
    flexible: bool = False,
    check: bool = True,
    literal_threats: bool = False,
) -> Compiled:
    """Validate (unless ``check`` is off), build and propagate the STN, then
    compile the behavior tree. Raises InvalidPlan or InconsistentStn."""
    if check:
        report = validate_plan(problem, plan)
        if not report.valid:
            raise InvalidPlan(report)
    sp = induced_simple_plan(plan, problem)
    g = build_stn(problem, plan, flexible, sp, literal_threats)
    dm = propagate(g)
    return Compiled(sp, g, dm, build_bt(g, dm))


def execute_plan(
    problem: Problem,
    plan: TemporalPlan,
    performer: ActionPerformer | None = None,
    flexible: bool = False,
    monitor_overall: bool = False,
    check: bool = False,
    clock_mode: str = "virtual",
    literal_threats: bool = False,
) -> ExecutionResult:
    """Compile and run. An STN found inconsistent at compile time counts as
    an execution FAILURE (the tree can never be dispatched)."""
    try:
        compiled = compile_plan(problem, plan, flexible, check, literal_threats)
    except InconsistentStn as exc:
        return ExecutionResult(TickStatus.FAILURE, 0, (), problem.init_state, f"inconsistent STN: {exc}")
    return run(compiled.bt, problem, performer, clock_mode, monitor_overall)
