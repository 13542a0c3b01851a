"""Simple Temporal Network built from a temporal plan.

Nodes are the start/end snap actions of the plan plus a root (initial state)
and a goal node. Every link ``p -> c`` with bounds ``[lower, upper]``
constrains ``lower <= T_c - T_p <= upper`` (milliseconds).
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .causal import ThreatRule, get_satisfy, threat_rules
from .pddl import Literal, Problem, TemporalPlan, format_ms, parse_literal
from .simple_plan import SimplePlan, SimpleStep, StepKind, induced_simple_plan, state_sequence

__all__ = [
    "INF",
    "InconsistentStn",
    "NodeKind",
    "LinkKind",
    "StnLink",
    "StnNode",
    "Stn",
    "DistanceMatrix",
    "init_graph",
    "build_stn",
    "prune_links",
    "check_paths",
    "propagate",
    "schedule_violations",
    "planned_times",
    "export_stn_dot",
    "stn_to_json",
    "stn_from_json",
]

log = logging.getLogger(__name__)

INF = math.inf


class InconsistentStn(ValueError):
    """The network has a negative cycle."""

    def __init__(self, message: str, nodes: Iterable[int] = ()):
        super().__init__(message)
        self.nodes = tuple(nodes)


class NodeKind(enum.Enum):
    INIT = "INIT"
    START = "START"
    END = "END"
    GOAL = "GOAL"


class LinkKind(enum.Enum):
    ROOT = "root"  # root -> start, planned offset
    DURATION = "duration"  # start -> end, [d, d]
    CAUSAL = "causal"  # satisfy / threat, [0, inf)
    GOAL = "goal"  # sink end -> goal, [0, inf)


@dataclass
class StnLink:
    peer: int
    lower: float
    upper: float
    kind: LinkKind = LinkKind.CAUSAL


@dataclass
class StnNode:
    id: int
    l: NodeKind
    t: int  # planned time of this time point
    a: str = ""  # action signature
    d: int = 0
    start: int = 0  # planned start of the owning action; with `a` the plan-step identity
    R: frozenset[Literal] = frozenset()
    E: frozenset[Literal] = frozenset()
    overall: frozenset[Literal] = frozenset()
    U: list[StnLink] = field(default_factory=list)
    Y: list[StnLink] = field(default_factory=list)

    @property
    def key(self) -> tuple[str, int]:
        return (self.a, self.start)

    def label(self) -> str:
        if self.l in (NodeKind.INIT, NodeKind.GOAL):
            return f"{self.l.value}@{format_ms(self.t)}"
        return f"{self.l.value}{self.a}@{format_ms(self.t)}"


class Stn:
    def __init__(self) -> None:
        self.nodes: dict[int, StnNode] = {}
        self.root = 0
        self.goal = 0
        self._snaps: dict[tuple[tuple[str, int], NodeKind], int] = {}

    def add_node(self, node: StnNode) -> StnNode:
        self.nodes[node.id] = node
        if node.l in (NodeKind.START, NodeKind.END):
            self._snaps[(node.key, node.l)] = node.id
        return node

    def snap(self, key: tuple[str, int], kind: NodeKind) -> StnNode:
        return self.nodes[self._snaps[(key, kind)]]

    def partner(self, node: StnNode) -> StnNode:
        other = NodeKind.END if node.l is NodeKind.START else NodeKind.START
        return self.snap(node.key, other)

    def link(self, p: int, c: int) -> StnLink | None:
        for lk in self.nodes[p].Y:
            if lk.peer == c:
                return lk
        return None

    def add_link(self, p: int, c: int, lower: float, upper: float, kind: LinkKind = LinkKind.CAUSAL) -> None:
        if p == c:
            raise ValueError(f"self-loop on node {p}")
        if lower > upper:
            raise ValueError(f"link {p}->{c}: lower {lower} > upper {upper}")
        if self.link(p, c) is not None:
            raise ValueError(f"duplicate link {p}->{c}")
        self.nodes[p].Y.append(StnLink(c, lower, upper, kind))
        self.nodes[c].U.append(StnLink(p, lower, upper, kind))
        self.nodes[p].Y.sort(key=lambda lk: lk.peer)
        self.nodes[c].U.sort(key=lambda lk: lk.peer)

    def remove_link(self, p: int, c: int) -> None:
        self.nodes[p].Y = [lk for lk in self.nodes[p].Y if lk.peer != c]
        self.nodes[c].U = [lk for lk in self.nodes[c].U if lk.peer != p]

    def links(self) -> list[tuple[int, StnLink]]:
        return [(nid, lk) for nid in sorted(self.nodes) for lk in self.nodes[nid].Y]

    def has_path(self, src: int, dst: int) -> bool:
        """Directed path ``src -> ... -> dst`` of length >= 1."""
        stack = [lk.peer for lk in self.nodes[src].Y]
        seen: set[int] = set()
        while stack:
            n = stack.pop()
            if n == dst:
                return True
            if n in seen:
                continue
            seen.add(n)
            stack.extend(lk.peer for lk in self.nodes[n].Y)
        return False

    def reachable(self, src: int) -> set[int]:
        seen = {src}
        stack = [src]
        while stack:
            for lk in self.nodes[stack.pop()].Y:
                if lk.peer not in seen:
                    seen.add(lk.peer)
                    stack.append(lk.peer)
        return seen

    def __len__(self) -> int:
        return len(self.nodes)


def init_graph(problem: Problem, plan: TemporalPlan, flexible: bool = False) -> Stn:
    """Root, goal and two nodes per plan step; root -> START fixes the
    planned start ([t, t], or [t, inf) when ``flexible``) and START -> END
    carries the duration [d, d]."""
    g = Stn()
    g.add_node(StnNode(0, NodeKind.INIT, 0, E=problem.init))
    nid = 1
    for ta in plan.steps:
        act = ta.action
        common = dict(a=act.signature, d=ta.d, start=ta.t, overall=act.cond_overall)
        g.add_node(StnNode(nid, NodeKind.START, ta.t, R=act.cond_start, E=act.eff_start, **common))
        g.add_node(StnNode(nid + 1, NodeKind.END, ta.end, R=act.cond_end, E=act.eff_end, **common))
        g.add_link(0, nid, ta.t, INF if flexible else ta.t, LinkKind.ROOT)
        g.add_link(nid, nid + 1, ta.d, ta.d, LinkKind.DURATION)
        nid += 2
    makespan = max((ta.end for ta in plan.steps), default=0)
    g.goal = nid
    g.add_node(StnNode(nid, NodeKind.GOAL, makespan, R=problem.goal))
    return g


def check_paths(n: StnNode, h: StnNode, g: Stn) -> bool:
    """True iff a path ``h -> ... -> n`` already exists."""
    return g.has_path(h.id, n.id)


def prune_links(n: StnNode, h: StnNode, g: Stn) -> Stn:
    """Drop causal links ``a -> n`` made redundant by a new parent ``h``
    reachable from ``a``. Root and duration links carry bounds other than
    [0, inf) and are never removed."""
    for lk in list(n.U):
        if lk.kind is not LinkKind.CAUSAL or lk.peer == h.id:
            continue
        if g.has_path(lk.peer, h.id):
            g.remove_link(lk.peer, n.id)
    return g


def _node_for(g: Stn, step: SimpleStep, as_parent: bool) -> StnNode:
    if step.kind is StepKind.INIT:
        return g.nodes[g.root]
    if step.kind is StepKind.GOAL:
        return g.nodes[g.goal]
    if step.kind is StepKind.OVERALL:
        # an over-all check needs support before the interval opens and
        # holds off threats until it closes
        kind = NodeKind.END if as_parent else NodeKind.START
    else:
        kind = NodeKind[step.kind.name]
    return g.snap(step.owner, kind)


def _orient(
    a: SimpleStep, other: SimpleStep, supports: bool, rule: ThreatRule | None, sp: SimplePlan
) -> tuple[SimpleStep, SimpleStep]:
    """(parent, child) for a relation between ``a`` and ``other``."""
    if supports:
        return other, a
    if other.at != a.at:
        return (other, a) if other.at < a.at else (a, other)
    if rule is ThreatRule.BREAKS_OTHER:
        return other, a
    if rule is ThreatRule.BROKEN_BY_OTHER:
        return a, other
    return (other, a) if sp.position(other) < sp.position(a) else (a, other)


def _add_causal(g: Stn, n: StnNode, h: StnNode) -> None:
    prune_links(n, h, g)
    if check_paths(n, h, g):
        return
    if h.t > n.t:
        # only an invalid plan produces these; propagation will reject it
        log.warning("link %s -> %s runs against the planned times", h.label(), n.label())
    g.add_link(h.id, n.id, 0, INF, LinkKind.CAUSAL)


def build_stn(
    problem: Problem,
    plan: TemporalPlan,
    flexible: bool = False,
    sp: SimplePlan | None = None,
    literal_threats: bool = False,
) -> Stn:
    """Build the STN: temporal links from the plan, then satisfying and
    threat links for every step of the induced simple plan, then links from
    sink END nodes to the goal. The plan is assumed valid; callers check.
    ``literal_threats`` selects the guarded threat search (see
    :func:`stnbt.causal.threat_rules`)."""
    g = init_graph(problem, plan, flexible)
    sp = sp or induced_simple_plan(plan, problem)
    states = state_sequence(problem, sp)
    for step in sp.steps[1:]:
        supporters = get_satisfy(step, sp, states)
        threats = {} if step.kind is StepKind.GOAL else threat_rules(step, sp, states, literal_threats)
        for ident in sorted(supporters | threats.keys(), key=lambda i: sp._position[i]):
            other = sp.steps[sp._position[ident]]
            parent, child = _orient(step, other, ident in supporters, threats.get(ident), sp)
            h = _node_for(g, parent, as_parent=True)
            n = _node_for(g, child, as_parent=False)
            if h.id != n.id:
                _add_causal(g, n, h)
    for nid in sorted(g.nodes):
        node = g.nodes[nid]
        if node.l is NodeKind.END and not node.Y:
            g.add_link(nid, g.goal, 0, INF, LinkKind.GOAL)
    if not g.nodes[g.goal].U:
        g.add_link(g.root, g.goal, 0, INF, LinkKind.GOAL)
    return g


# --------------------------------------------------------------------------
# propagation


@dataclass(frozen=True)
class DistanceMatrix:
    ids: tuple[int, ...]
    d: np.ndarray

    def index(self, nid: int) -> int:
        return self.ids.index(nid)

    def dist(self, src: int, dst: int) -> float:
        return float(self.d[self.index(src), self.index(dst)])

    def bounds(self, p: int, c: int) -> tuple[float, float]:
        """Implied ``lower <= T_c - T_p <= upper``."""
        return (-self.dist(c, p), self.dist(p, c))


def propagate(g: Stn) -> DistanceMatrix:
    """All-pairs shortest paths (Floyd-Warshall) over the distance graph."""
    ids = tuple(sorted(g.nodes))
    pos = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    d = np.full((n, n), INF)
    np.fill_diagonal(d, 0.0)
    for p, lk in g.links():
        i, j = pos[p], pos[lk.peer]
        d[i, j] = min(d[i, j], lk.upper)
        d[j, i] = min(d[j, i], -lk.lower)
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    bad = [ids[i] for i in range(n) if d[i, i] < 0]
    if bad:
        labels = ", ".join(g.nodes[i].label() for i in bad)
        raise InconsistentStn(f"negative cycle through {labels}", bad)
    return DistanceMatrix(ids, d)


def planned_times(g: Stn) -> dict[int, int]:
    return {nid: node.t for nid, node in g.nodes.items()}


def schedule_violations(g: Stn, times: dict[int, float] | None = None) -> list[str]:
    """Links violated by an assignment of times (default: the plan's)."""
    times = planned_times(g) if times is None else times
    bad = []
    for p, lk in g.links():
        delta = times[lk.peer] - times[p]
        if not (lk.lower <= delta <= lk.upper):
            bad.append(f"{g.nodes[p].label()} -> {g.nodes[lk.peer].label()}: {delta} not in [{lk.lower}, {lk.upper}]")
    return bad


# --------------------------------------------------------------------------
# export


def _bound(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return str(int(x))


def export_stn_dot(g: Stn) -> str:
    out = ["digraph stn {", "  rankdir=LR;"]
    for nid in sorted(g.nodes):
        node = g.nodes[nid]
        shape = "doublecircle" if node.l in (NodeKind.INIT, NodeKind.GOAL) else "box"
        out.append(f'  n{nid} [shape={shape}, label="{node.label()}"];')
    for p, lk in g.links():
        style = "" if lk.kind is LinkKind.CAUSAL else f", style={'bold' if lk.kind is LinkKind.DURATION else 'dashed'}"
        out.append(f'  n{p} -> n{lk.peer} [label="[{_bound(lk.lower)},{_bound(lk.upper)}]"{style}];')
    out.append("}")
    return "\n".join(out) + "\n"


def _jbound(x: float):
    return None if math.isinf(x) else int(x)


def stn_to_json(g: Stn) -> str:
    nodes = []
    for nid in sorted(g.nodes):
        n = g.nodes[nid]
        nodes.append(
            {
                "id": n.id,
                "l": n.l.value,
                "t": n.t,
                "a": n.a,
                "d": n.d,
                "start": n.start,
                "R": sorted(str(x) for x in n.R),
                "E": sorted(str(x) for x in n.E),
                "overall": sorted(str(x) for x in n.overall),
                "U": [{"peer": lk.peer, "lower": _jbound(lk.lower), "upper": _jbound(lk.upper), "kind": lk.kind.value} for lk in n.U],
                "Y": [{"peer": lk.peer, "lower": _jbound(lk.lower), "upper": _jbound(lk.upper), "kind": lk.kind.value} for lk in n.Y],
            }
        )
    return json.dumps({"root": g.root, "goal": g.goal, "nodes": nodes}, indent=2) + "\n"


def stn_from_json(text: str) -> Stn:
    """Inverse of :func:`stn_to_json`; links are rebuilt from ``Y``."""
    data = json.loads(text)
    g = Stn()
    g.root, g.goal = data["root"], data["goal"]
    for n in data["nodes"]:
        g.add_node(
            StnNode(
                id=n["id"],
                l=NodeKind(n["l"]),
                t=n.get("t", 0),
                a=n.get("a", ""),
                d=n.get("d", 0),
                start=n.get("start", 0),
                R=frozenset(parse_literal(x) for x in n.get("R", [])),
                E=frozenset(parse_literal(x) for x in n.get("E", [])),
                overall=frozenset(parse_literal(x) for x in n.get("overall", [])),
            )
        )
    for n in data["nodes"]:
        for lk in n.get("Y", []):
            lower = -INF if lk.get("lower") is None else lk["lower"]
            upper = INF if lk.get("upper") is None else lk["upper"]
            g.add_link(n["id"], lk["peer"], lower, upper, LinkKind(lk.get("kind", "causal")))
    return g
