"""PDDL 2.1 subset: STRIPS literals, typing and durative actions, plus the
time-triggered plan format ``TIME: (NAME ARGS...) [DURATION]``.

All times are integer milliseconds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal, InvalidOperation
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "PddlError",
    "UnsupportedFeature",
    "PlanError",
    "Fluent",
    "Literal",
    "ConditionSet",
    "make_conditions",
    "DurativeActionSchema",
    "GroundedDurativeAction",
    "TimedAction",
    "TemporalPlan",
    "Domain",
    "Problem",
    "parse_domain",
    "parse_problem",
    "parse_plan",
    "parse_literal",
    "render_plan",
    "render_domain",
    "render_problem",
    "parse_seconds",
    "format_ms",
]


class PddlError(ValueError):
    """Syntax or semantic error in a PDDL or plan file."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class UnsupportedFeature(PddlError):
    def __init__(self, feature: str, line: int | None = None, col: int | None = None):
        self.feature = feature
        super().__init__(f"unsupported PDDL feature: {feature}", line, col)


class PlanError(PddlError):
    pass


# --------------------------------------------------------------------------
# literals


@dataclass(frozen=True, order=True)
class Fluent:
    name: str
    args: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("fluent name must be nonempty")

    def __str__(self) -> str:
        return "(" + " ".join((self.name, *self.args)) + ")"


@dataclass(frozen=True, order=True)
class Literal:
    fluent: Fluent
    positive: bool = True

    def negate(self) -> Literal:
        return Literal(self.fluent, not self.positive)

    def __str__(self) -> str:
        return str(self.fluent) if self.positive else f"(not {self.fluent})"


ConditionSet = frozenset  # frozenset[Literal], contradiction-free


def make_conditions(literals: Iterable[Literal], what: str = "condition") -> frozenset[Literal]:
    lits = frozenset(literals)
    for lit in lits:
        if lit.negate() in lits:
            raise PddlError(f"{what} set contains both {lit.fluent} and its negation")
    return lits


_LIT_RE = re.compile(r"\(\s*not\s*(\(.*\))\s*\)\s*$")


def parse_literal(text: str) -> Literal:
    """Parse ``(p a b)`` or ``(not (p a b))``."""
    text = text.strip()
    m = _LIT_RE.match(text)
    positive = m is None
    if m:
        text = m.group(1)
    if not (text.startswith("(") and text.endswith(")")):
        raise PddlError(f"malformed literal {text!r}")
    parts = text[1:-1].split()
    if not parts:
        raise PddlError("empty literal")
    return Literal(Fluent(parts[0].lower(), tuple(p.lower() for p in parts[1:])), positive)


# --------------------------------------------------------------------------
# time helpers


def parse_seconds(text: str) -> int:
    """Decimal seconds -> integer milliseconds (round half up)."""
    try:
        value = Decimal(text)
    except InvalidOperation as exc:
        raise PlanError(f"bad number {text!r}") from exc
    return int((value * 1000).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def format_ms(ms: int) -> str:
    sign = "-" if ms < 0 else ""
    ms = abs(ms)
    return f"{sign}{ms // 1000}.{ms % 1000:03d}"


# --------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class DurativeActionSchema:
    name: str
    params: tuple[tuple[str, str], ...]  # (?var, type)
    cond_start: frozenset[Literal] = frozenset()
    cond_overall: frozenset[Literal] = frozenset()
    cond_end: frozenset[Literal] = frozenset()
    eff_start: frozenset[Literal] = frozenset()
    eff_end: frozenset[Literal] = frozenset()
    duration_min: int = 0
    duration_max: int | None = None  # None: unbounded

    def __post_init__(self) -> None:
        if self.duration_max is not None and self.duration_min > self.duration_max:
            raise PddlError(f"action {self.name}: duration_min > duration_max")
        for what in ("cond_start", "cond_overall", "cond_end", "eff_start", "eff_end"):
            make_conditions(getattr(self, what), f"{self.name} {what}")

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p for p, _ in self.params)

    def ground(self, args: Sequence[str]) -> GroundedDurativeAction:
        if len(args) != len(self.params):
            raise PlanError(
                f"action {self.name} expects {len(self.params)} arguments, got {len(args)}"
            )
        binding = dict(zip(self.param_names, args))

        def sub(lits: frozenset[Literal]) -> frozenset[Literal]:
            out = set()
            for lit in lits:
                try:
                    grounded = tuple(binding[a] if a.startswith("?") else a for a in lit.fluent.args)
                except KeyError as exc:
                    raise PddlError(f"action {self.name}: unbound parameter {exc.args[0]}") from None
                out.add(Literal(Fluent(lit.fluent.name, grounded), lit.positive))
            return frozenset(out)

        return GroundedDurativeAction(
            schema=self,
            args=tuple(args),
            cond_start=sub(self.cond_start),
            cond_overall=sub(self.cond_overall),
            cond_end=sub(self.cond_end),
            eff_start=make_conditions(sub(self.eff_start), f"{self.name} at-start effect"),
            eff_end=make_conditions(sub(self.eff_end), f"{self.name} at-end effect"),
        )

    def admits(self, duration: int) -> bool:
        if duration < self.duration_min:
            return False
        return self.duration_max is None or duration <= self.duration_max


@dataclass(frozen=True)
class GroundedDurativeAction:
    schema: DurativeActionSchema = field(repr=False)
    args: tuple[str, ...]
    cond_start: frozenset[Literal]
    cond_overall: frozenset[Literal]
    cond_end: frozenset[Literal]
    eff_start: frozenset[Literal]
    eff_end: frozenset[Literal]

    @property
    def name(self) -> str:
        return self.schema.name

    @property
    def binding(self) -> dict[str, str]:
        return dict(zip(self.schema.param_names, self.args))

    @property
    def signature(self) -> str:
        return "(" + " ".join((self.schema.name, *self.args)) + ")"

    def __str__(self) -> str:
        return self.signature


@dataclass(frozen=True)
class TimedAction:
    t: int
    action: GroundedDurativeAction
    d: int

    def __post_init__(self) -> None:
        if self.t < 0:
            raise PlanError(f"negative start time for {self.action.signature}")
        if self.d < 0:
            raise PlanError(f"negative duration for {self.action.signature}")

    @property
    def key(self) -> tuple[str, int]:
        """Plan-step identity."""
        return (self.action.signature, self.t)

    @property
    def end(self) -> int:
        return self.t + self.d


@dataclass(frozen=True)
class TemporalPlan:
    steps: tuple[TimedAction, ...] = ()
    problem_ref: str = ""

    def __post_init__(self) -> None:
        seen: set[tuple[str, int]] = set()
        for step in self.steps:
            if step.key in seen:
                raise PlanError(f"duplicate plan step {step.action.signature} at {format_ms(step.t)}")
            seen.add(step.key)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self) -> Iterator[TimedAction]:
        return iter(self.steps)


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...] = ()
    types: Mapping[str, str] = field(default_factory=dict)  # type -> parent
    constants: Mapping[str, str] = field(default_factory=dict)
    predicates: Mapping[str, tuple[str, ...]] = field(default_factory=dict)
    schemas: Mapping[str, DurativeActionSchema] = field(default_factory=dict)

    def is_subtype(self, t: str, of: str) -> bool:
        seen = set()
        while t not in seen:
            if t == of:
                return True
            seen.add(t)
            t = self.types.get(t, "object")
        return of == "object"


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str = ""
    objects: Mapping[str, str] = field(default_factory=dict)
    init: frozenset[Literal] = frozenset()
    goal: frozenset[Literal] = frozenset()

    def __post_init__(self) -> None:
        for lit in self.init:
            if not lit.positive:
                raise PddlError(f"initial state must be positive (closed world): {lit}")

    @property
    def init_state(self) -> frozenset[Fluent]:
        return frozenset(lit.fluent for lit in self.init)


# --------------------------------------------------------------------------
# s-expressions


@dataclass
class _Tok:
    text: str
    line: int
    col: int


class _List(list):
    line: int = 0
    col: int = 0


_TOKEN_RE = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:  # pragma: no cover - the pattern matches any char
            raise PddlError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        chunk = m.group(0)
        if not (chunk[0].isspace() or chunk[0] == ";"):
            toks.append(_Tok(chunk.lower(), line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return toks


def _parse_sexpr(text: str):
    toks = _tokenize(text)
    if not toks:
        raise PddlError("empty input", 1, 1)
    stack: list[_List] = []
    result = None
    for tok in toks:
        if tok.text == "(":
            lst = _List()
            lst.line, lst.col = tok.line, tok.col
            stack.append(lst)
        elif tok.text == ")":
            if not stack:
                raise PddlError("unbalanced ')'", tok.line, tok.col)
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            elif result is None:
                result = done
            else:
                raise PddlError("trailing content after top-level expression", tok.line, tok.col)
        else:
            if not stack:
                raise PddlError(f"unexpected token {tok.text!r}", tok.line, tok.col)
            stack[-1].append(tok)
    if stack:
        raise PddlError("unbalanced '(' (missing ')')", stack[-1].line, stack[-1].col)
    return result


def _pos(x) -> tuple[int | None, int | None]:
    return (x.line, x.col) if isinstance(x, (_Tok, _List)) else (None, None)


def _atom(x, what: str) -> str:
    if not isinstance(x, _Tok):
        raise PddlError(f"expected {what}", *_pos(x))
    return x.text


def _typed_list(items: Sequence) -> list[tuple[str, str]]:
    """``a b - t c`` -> [(a, t), (b, t), (c, object)]."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        tok = items[i]
        name = _atom(tok, "name in typed list")
        if name == "-":
            if i + 1 >= len(items):
                raise PddlError("missing type after '-'", *_pos(tok))
            nxt = items[i + 1]
            if isinstance(nxt, _List):
                raise UnsupportedFeature("either types", *_pos(nxt))
            out.extend((p, nxt.text) for p in pending)
            pending = []
            i += 2
            continue
        pending.append(name)
        i += 1
    out.extend((p, "object") for p in pending)
    return out


_UNSUPPORTED_REQS = {
    ":fluents": "numeric fluents",
    ":numeric-fluents": "numeric fluents",
    ":object-fluents": "object fluents",
    ":conditional-effects": "conditional effects",
    ":universal-preconditions": "universal preconditions",
    ":existential-preconditions": "existential preconditions",
    ":quantified-preconditions": "quantified preconditions",
    ":timed-initial-literals": "timed initial literals",
    ":continuous-effects": "continuous effects",
    ":duration-inequalities": None,  # handled: [min, max]
    ":derived-predicates": "derived predicates",
    ":time": "PDDL+ processes",
}

_UNSUPPORTED_HEADS = {
    "when": "conditional effects",
    "forall": "universal quantification",
    "exists": "existential quantification",
    "or": "disjunctive conditions",
    "imply": "implications",
    "increase": "numeric fluents",
    "decrease": "numeric fluents",
    "assign": "numeric fluents",
    "scale-up": "numeric fluents",
    "scale-down": "numeric fluents",
    "=": "equality / numeric constraints",
    "<": "numeric fluents",
    ">": "numeric fluents",
    "<=": "numeric fluents",
    ">=": "numeric fluents",
}


class _LiteralReader:
    def __init__(self, predicates: Mapping[str, tuple[str, ...]] | None, variables: set[str] | None):
        self.predicates = predicates
        self.variables = variables

    def literal(self, expr) -> Literal:
        if not isinstance(expr, _List) or not expr:
            raise PddlError("expected literal", *_pos(expr))
        head = _atom(expr[0], "predicate name")
        if head == "not":
            if len(expr) != 2:
                raise PddlError("'not' takes exactly one argument", *_pos(expr))
            return self.literal(expr[1]).negate()
        if head in _UNSUPPORTED_HEADS:
            raise UnsupportedFeature(_UNSUPPORTED_HEADS[head], *_pos(expr))
        args = tuple(_atom(a, "argument") for a in expr[1:])
        if self.predicates is not None:
            if head not in self.predicates:
                raise PddlError(f"undeclared predicate {head!r}", *_pos(expr))
            if len(self.predicates[head]) != len(args):
                raise PddlError(
                    f"predicate {head!r} expects {len(self.predicates[head])} arguments, got {len(args)}",
                    *_pos(expr),
                )
        if self.variables is not None:
            for a in args:
                if a.startswith("?") and a not in self.variables:
                    raise PddlError(f"unknown parameter {a}", *_pos(expr))
        return Literal(Fluent(head, args))

    def conjunction(self, expr) -> list:
        """Flatten ``(and ...)``; returns the raw conjuncts."""
        if isinstance(expr, _List) and expr and isinstance(expr[0], _Tok) and expr[0].text == "and":
            out = []
            for sub in expr[1:]:
                out.extend(self.conjunction(sub))
            return out
        if isinstance(expr, _List) and not expr:
            return []
        return [expr]


def _section(expr, key: str):
    return isinstance(expr, _List) and expr and isinstance(expr[0], _Tok) and expr[0].text == key


def _parse_duration(expr) -> tuple[int, int | None]:
    lo, hi = 0, None
    reader = _LiteralReader(None, None)
    for c in reader.conjunction(expr):
        if not isinstance(c, _List) or len(c) != 3:
            raise PddlError("malformed duration constraint", *_pos(c))
        op = _atom(c[0], "duration operator")
        if _atom(c[1], "?duration") != "?duration":
            raise PddlError("duration constraint must constrain ?duration", *_pos(c))
        if isinstance(c[2], _List):
            raise UnsupportedFeature("numeric fluents in duration", *_pos(c[2]))
        try:
            value = parse_seconds(c[2].text)
        except PlanError:
            raise PddlError(f"bad duration value {c[2].text!r}", *_pos(c[2])) from None
        if op == "=":
            lo, hi = value, value
        elif op in (">=", ">"):
            lo = max(lo, value)
        elif op in ("<=", "<"):
            hi = value if hi is None else min(hi, value)
        else:
            raise PddlError(f"unknown duration operator {op!r}", *_pos(c))
    return lo, hi


def _parse_action(expr, predicates) -> DurativeActionSchema:
    name = _atom(expr[1], "action name")
    fields_: dict[str, object] = {}
    i = 2
    while i < len(expr):
        key = _atom(expr[i], "action field")
        if i + 1 >= len(expr):
            raise PddlError(f"missing value for {key}", *_pos(expr[i]))
        fields_[key] = expr[i + 1]
        i += 2
    params = _typed_list(fields_.get(":parameters", _List()))
    reader = _LiteralReader(predicates, {p for p, _ in params})
    if ":duration" in fields_:
        dmin, dmax = _parse_duration(fields_[":duration"])
    else:
        dmin, dmax = 0, None

    conds: dict[str, set[Literal]] = {"at start": set(), "over all": set(), "at end": set()}
    for c in reader.conjunction(fields_.get(":condition", _List())):
        when, lit = _timed(c, reader, allow_overall=True)
        conds[when].add(lit)
    effs: dict[str, set[Literal]] = {"at start": set(), "at end": set()}
    for e in reader.conjunction(fields_.get(":effect", _List())):
        when, lit = _timed(e, reader, allow_overall=False)
        effs[when].add(lit)
    try:
        return DurativeActionSchema(
            name=name,
            params=tuple(params),
            cond_start=make_conditions(conds["at start"]),
            cond_overall=make_conditions(conds["over all"]),
            cond_end=make_conditions(conds["at end"]),
            eff_start=make_conditions(effs["at start"], "effect"),
            eff_end=make_conditions(effs["at end"], "effect"),
            duration_min=dmin,
            duration_max=dmax,
        )
    except PddlError as exc:
        raise PddlError(f"action {name}: {exc}", *_pos(expr)) from None


def _timed(expr, reader: _LiteralReader, allow_overall: bool) -> tuple[str, Literal]:
    if isinstance(expr, _List) and expr and isinstance(expr[0], _Tok) and expr[0].text in _UNSUPPORTED_HEADS:
        raise UnsupportedFeature(_UNSUPPORTED_HEADS[expr[0].text], *_pos(expr))
    if not isinstance(expr, _List) or len(expr) != 3 or not isinstance(expr[0], _Tok):
        raise PddlError("expected (at start ...), (at end ...) or (over all ...)", *_pos(expr))
    a, b = expr[0].text, _atom(expr[1], "time specifier")
    when = f"{a} {b}"
    if when not in ("at start", "at end", "over all") or (when == "over all" and not allow_overall):
        raise PddlError(f"invalid time specifier {when!r}", *_pos(expr))
    return when, reader.literal(expr[2])


def parse_domain(text: str) -> Domain:
    """Parse a PDDL 2.1 domain restricted to ``:strips :typing :durative-actions``."""
    root = _parse_sexpr(text)
    if not root or _atom(root[0], "define") != "define":
        raise PddlError("expected (define (domain NAME) ...)", *_pos(root))
    if not (isinstance(root[1], _List) and _section(root[1], "domain") and len(root[1]) == 2):
        raise PddlError("expected (domain NAME)", *_pos(root[1]))
    name = _atom(root[1][1], "domain name")
    reqs: list[str] = []
    types: dict[str, str] = {}
    constants: dict[str, str] = {}
    predicates: dict[str, tuple[str, ...]] = {}
    schemas: dict[str, DurativeActionSchema] = {}
    for sec in root[2:]:
        if not isinstance(sec, _List) or not sec:
            raise PddlError("expected domain section", *_pos(sec))
        head = _atom(sec[0], "section name")
        if head == ":requirements":
            for r in sec[1:]:
                req = _atom(r, "requirement")
                if _UNSUPPORTED_REQS.get(req):
                    raise UnsupportedFeature(_UNSUPPORTED_REQS[req], *_pos(r))
                reqs.append(req)
        elif head == ":types":
            types.update(_typed_list(sec[1:]))
        elif head == ":constants":
            constants.update(_typed_list(sec[1:]))
        elif head == ":predicates":
            for p in sec[1:]:
                if not isinstance(p, _List) or not p:
                    raise PddlError("expected predicate declaration", *_pos(p))
                predicates[_atom(p[0], "predicate name")] = tuple(t for _, t in _typed_list(p[1:]))
        elif head == ":functions":
            raise UnsupportedFeature("numeric fluents", *_pos(sec))
        elif head == ":durative-action":
            schema = _parse_action(sec, predicates)
            if schema.name in schemas:
                raise PddlError(f"duplicate action {schema.name!r}", *_pos(sec))
            schemas[schema.name] = schema
        elif head == ":action":
            raise UnsupportedFeature("instantaneous actions", *_pos(sec))
        else:
            raise UnsupportedFeature(head, *_pos(sec))
    return Domain(name, tuple(reqs), types, constants, predicates, schemas)


def parse_problem(text: str, domain: Domain) -> Problem:
    root = _parse_sexpr(text)
    if not root or _atom(root[0], "define") != "define":
        raise PddlError("expected (define (problem NAME) ...)", *_pos(root))
    if not (isinstance(root[1], _List) and _section(root[1], "problem") and len(root[1]) == 2):
        raise PddlError("expected (problem NAME)", *_pos(root[1]))
    name = _atom(root[1][1], "problem name")
    dname = ""
    objects: dict[str, str] = dict(domain.constants)
    init_exprs: list = []
    goal_expr = None
    for sec in root[2:]:
        if not isinstance(sec, _List) or not sec:
            raise PddlError("expected problem section", *_pos(sec))
        head = _atom(sec[0], "section name")
        if head == ":domain":
            dname = _atom(sec[1], "domain name")
            if dname != domain.name:
                raise PddlError(f"problem is for domain {dname!r}, not {domain.name!r}", *_pos(sec))
        elif head == ":objects":
            for obj, typ in _typed_list(sec[1:]):
                if typ != "object" and typ not in domain.types:
                    raise PddlError(f"unknown type {typ!r} for object {obj!r}", *_pos(sec))
                objects[obj] = typ
        elif head == ":init":
            init_exprs = list(sec[1:])
        elif head == ":goal":
            goal_expr = sec[1] if len(sec) > 1 else _List()
        elif head in (":metric", ":requirements"):
            continue
        else:
            raise UnsupportedFeature(head, *_pos(sec))

    reader = _LiteralReader(domain.predicates, set())

    def check(lit: Literal, at) -> Literal:
        types = domain.predicates[lit.fluent.name]
        for arg, typ in zip(lit.fluent.args, types):
            if arg not in objects:
                raise PddlError(f"undeclared object {arg!r}", *_pos(at))
            if not domain.is_subtype(objects[arg], typ):
                raise PddlError(
                    f"type mismatch: {arg!r} is {objects[arg]}, {lit.fluent.name} expects {typ}", *_pos(at)
                )
        return lit

    init = set()
    for e in init_exprs:
        lit = check(reader.literal(e), e)
        if not lit.positive:
            raise PddlError("negative literal in :init (closed world)", *_pos(e))
        init.add(lit)
    goal = set()
    if goal_expr is not None:
        for g in reader.conjunction(goal_expr):
            goal.add(check(reader.literal(g), g))
    return Problem(name, dname, objects, frozenset(init), make_conditions(goal, "goal"))


# --------------------------------------------------------------------------
# plans

_PLAN_RE = re.compile(
    r"^\s*(?:[A-Za-z_][\w-]*\s+)?"  # optional step label, e.g. "A1"
    r"(?P<t>\d+(?:\.\d*)?)\s*:\s*"
    r"\((?P<body>[^()]*)\)\s*"
    r"\[\s*(?P<d>\d+(?:\.\d*)?)\s*\]\s*$"
)


def parse_plan(text: str, domain: Domain, problem: Problem | None = None) -> TemporalPlan:
    """Parse a time-triggered plan; steps keep file order."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0]
        if not line.strip():
            continue
        m = _PLAN_RE.match(line)
        if m is None:
            raise PlanError(f"malformed plan line {raw.strip()!r}", lineno, 1)
        parts = m.group("body").lower().split()
        if not parts:
            raise PlanError("empty action", lineno, m.start("body") + 1)
        schema = domain.schemas.get(parts[0])
        if schema is None:
            raise PlanError(f"unknown action {parts[0]!r}", lineno, m.start("body") + 1)
        args = parts[1:]
        if problem is not None:
            for arg, (_, typ) in zip(args, schema.params):
                if arg not in problem.objects:
                    raise PlanError(f"unknown object {arg!r}", lineno, m.start("body") + 1)
                if not domain.is_subtype(problem.objects[arg], typ):
                    raise PlanError(f"object {arg!r} is not a {typ}", lineno, m.start("body") + 1)
        t, d = parse_seconds(m.group("t")), parse_seconds(m.group("d"))
        try:
            action = schema.ground(args)
        except PddlError as exc:
            raise PlanError(str(exc), lineno, 1) from None
        if not schema.admits(d):
            hi = "inf" if schema.duration_max is None else format_ms(schema.duration_max)
            raise PlanError(
                f"duration {format_ms(d)} of {action.signature} outside "
                f"[{format_ms(schema.duration_min)}, {hi}]",
                lineno,
                m.start("d") + 1,
            )
        steps.append(TimedAction(t, action, d))
    return TemporalPlan(tuple(steps), problem.name if problem else "")


def render_plan(plan: TemporalPlan) -> str:
    return "".join(f"{format_ms(s.t)}: {s.action.signature} [{format_ms(s.d)}]\n" for s in plan.steps)


def _render_lits(lits: Iterable[Literal], wrap: str | None = None, indent: str = "") -> str:
    items = sorted(lits)
    parts = [f"({wrap} {lit})" if wrap else str(lit) for lit in items]
    return " ".join(parts)


def render_domain(domain: Domain) -> str:
    out = [f"(define (domain {domain.name})"]
    if domain.requirements:
        out.append(f"  (:requirements {' '.join(domain.requirements)})")
    if domain.types:
        out.append(f"  (:types {' '.join(f'{t} - {p}' for t, p in domain.types.items())})")
    if domain.constants:
        out.append(f"  (:constants {' '.join(f'{c} - {t}' for c, t in domain.constants.items())})")
    preds = []
    for name, types in domain.predicates.items():
        args = " ".join(f"?x{i} - {t}" for i, t in enumerate(types))
        preds.append(f"({name}{' ' + args if args else ''})")
    out.append(f"  (:predicates {' '.join(preds)})")
    for s in domain.schemas.values():
        params = " ".join(f"{p} - {t}" for p, t in s.params)
        if s.duration_max == s.duration_min:
            dur = f"(= ?duration {format_ms(s.duration_min)})"
        else:
            parts = [f"(>= ?duration {format_ms(s.duration_min)})"]
            if s.duration_max is not None:
                parts.append(f"(<= ?duration {format_ms(s.duration_max)})")
            dur = f"(and {' '.join(parts)})"
        conds = " ".join(
            x
            for x in (
                _render_lits(s.cond_start, "at start"),
                _render_lits(s.cond_overall, "over all"),
                _render_lits(s.cond_end, "at end"),
            )
            if x
        )
        effs = " ".join(x for x in (_render_lits(s.eff_start, "at start"), _render_lits(s.eff_end, "at end")) if x)
        out.append(f"  (:durative-action {s.name}")
        out.append(f"    :parameters ({params})")
        out.append(f"    :duration {dur}")
        out.append(f"    :condition (and {conds})")
        out.append(f"    :effect (and {effs}))")
    out.append(")")
    return "\n".join(out) + "\n"


def render_problem(problem: Problem) -> str:
    objs = " ".join(f"{o} - {t}" for o, t in problem.objects.items())
    return (
        f"(define (problem {problem.name})\n"
        f"  (:domain {problem.domain_name})\n"
        f"  (:objects {objs})\n"
        f"  (:init {_render_lits(problem.init)})\n"
        f"  (:goal (and {_render_lits(problem.goal)}))\n"
        ")\n"
    )
