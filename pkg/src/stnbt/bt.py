"""Behavior tree compilation from a propagated STN.

The tree is grown depth first from the STN root. Each snap node becomes an
action unit (a SEQUENCE of constraint, check, apply and execute leaves)
followed by the flows of its STN children. A START node always expands its
own END node first, so the END unit becomes the first region under the
START unit. STN links that do not end up as tree edges turn into
WAIT_ACTION leaves (START units) or CHECK_ACTION leaves (END units).
"""

from __future__ import annotations

import enum
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .pddl import Literal, parse_literal
from .stn import DistanceMatrix, NodeKind, Stn, StnNode

__all__ = [
    "BtKind",
    "SnapRef",
    "BtNode",
    "BehaviorTree",
    "build_bt",
    "export_bt",
    "export_bt_xml",
    "parse_bt_xml",
    "export_bt_dot",
]


class BtKind(enum.Enum):
    SEQUENCE = "Sequence"
    PARALLEL = "Parallel"
    WAIT_ACTION = "WaitAction"
    CHECK_ACTION = "CheckAction"
    WAIT_TIME = "WaitTime"
    CHECK_TIME = "CheckTime"
    CHECK_AT_START = "CheckAtStart"
    CHECK_OVERALL = "CheckOverAll"
    CHECK_AT_END = "CheckAtEnd"
    CHECK_GOAL = "CheckGoal"
    APPLY_AT_START = "ApplyAtStart"
    APPLY_AT_END = "ApplyAtEnd"
    EXECUTE_ACTION = "ExecuteAction"
    SUCCESS_LEAF = "Success"

    @property
    def is_control(self) -> bool:
        return self in (BtKind.SEQUENCE, BtKind.PARALLEL)


LITERAL_KINDS = frozenset(
    {
        BtKind.CHECK_AT_START,
        BtKind.CHECK_OVERALL,
        BtKind.CHECK_AT_END,
        BtKind.CHECK_GOAL,
        BtKind.APPLY_AT_START,
        BtKind.APPLY_AT_END,
    }
)


@dataclass(frozen=True, order=True)
class SnapRef:
    """One snap action of one plan step: (signature, planned start, START|END)."""

    action: str
    start: int
    snap: str

    def __str__(self) -> str:
        return f"{self.snap}{self.action}@{self.start}"


@dataclass(frozen=True)
class BtNode:
    id: int
    kind: BtKind
    children: tuple[int, ...] = ()
    ref: SnapRef | None = None  # acting or referenced snap action
    time: int | None = None  # WAIT_TIME / CHECK_TIME threshold, ms
    duration: int | None = None  # planned duration for EXECUTE start-dispatch
    literals: frozenset[Literal] = frozenset()


@dataclass
class BehaviorTree:
    root: int
    nodes: dict[int, BtNode]
    action_index: dict[SnapRef, int] = field(default_factory=dict)

    def __getitem__(self, nid: int) -> BtNode:
        return self.nodes[nid]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BehaviorTree):
            return NotImplemented
        return (self.root, self.nodes, self.action_index) == (other.root, other.nodes, other.action_index)

    def parents(self) -> dict[int, int]:
        out = {}
        for nid, node in self.nodes.items():
            for c in node.children:
                if c in out:
                    raise ValueError(f"node {c} has two parents")
                out[c] = nid
        return out

    def walk(self, nid: int | None = None):
        """Pre-order traversal."""
        stack = [self.root if nid is None else nid]
        while stack:
            node = self.nodes[stack.pop()]
            yield node
            stack.extend(reversed(node.children))

    def units(self, kind: BtKind) -> list[BtNode]:
        return [n for n in self.walk() if n.kind is kind]


class _Builder:
    def __init__(self, g: Stn, dm: DistanceMatrix):
        self.g = g
        self.dm = dm
        self.nodes: dict[int, BtNode] = {}
        self.index: dict[SnapRef, int] = {}
        self.used: set[int] = set()
        self.tree_parent: dict[int, int] = {}

    def add(self, kind: BtKind, children=(), **payload) -> int:
        nid = len(self.nodes)
        self.nodes[nid] = BtNode(nid, kind, tuple(children), **payload)
        return nid

    def ref(self, n: StnNode) -> SnapRef:
        return SnapRef(n.a, n.start, n.l.value)

    def constraint_parents(self, n: StnNode) -> list[StnNode]:
        """STN parents that are neither the root, the tree parent nor (for an
        END) the node's own START."""
        skip = {self.g.root, self.tree_parent.get(n.id)}
        if n.l is NodeKind.END:
            skip.add(self.g.partner(n).id)
        return [self.g.nodes[lk.peer] for lk in n.U if lk.peer not in skip]

    def start_unit(self, n: StnNode) -> int:
        offset = -self.dm.dist(n.id, self.g.root)
        ref = self.ref(n)
        kids = [self.add(BtKind.WAIT_TIME, time=int(offset))]
        kids += [self.add(BtKind.WAIT_ACTION, ref=self.ref(p)) for p in self.constraint_parents(n)]
        kids.append(self.add(BtKind.CHECK_AT_START, ref=ref, literals=n.R))
        kids.append(self.add(BtKind.APPLY_AT_START, ref=ref, literals=n.E))
        execute = self.add(BtKind.EXECUTE_ACTION, ref=ref, duration=n.d)
        kids.append(execute)
        self.index[ref] = execute
        return self.add(BtKind.SEQUENCE, kids)

    def end_unit(self, n: StnNode) -> int:
        ref = self.ref(n)
        execute = self.add(BtKind.EXECUTE_ACTION, ref=ref, duration=n.d)
        self.index[ref] = execute
        kids = [execute]
        kids += [self.add(BtKind.CHECK_ACTION, ref=self.ref(p)) for p in self.constraint_parents(n)]
        upper = self.dm.dist(self.g.root, n.id)
        if not math.isinf(upper):
            kids.append(self.add(BtKind.CHECK_TIME, time=int(upper)))
        if n.overall:
            kids.append(self.add(BtKind.CHECK_OVERALL, ref=ref, literals=n.overall))
        kids.append(self.add(BtKind.CHECK_AT_END, ref=ref, literals=n.R))
        kids.append(self.add(BtKind.APPLY_AT_END, ref=ref, literals=n.E))
        return self.add(BtKind.SEQUENCE, kids)

    def goal_unit(self, n: StnNode) -> int:
        kids = [self.add(BtKind.WAIT_ACTION, ref=self.ref(p)) for p in self.constraint_parents(n)]
        if not kids and not n.R:
            return self.add(BtKind.SUCCESS_LEAF)
        kids.append(self.add(BtKind.CHECK_GOAL, literals=n.R))
        return self.add(BtKind.SEQUENCE, kids)

    def flow(self, nid: int, parent: int) -> int | None:
        g = self.g
        n = g.nodes[nid]
        if nid in self.used:
            # already placed elsewhere: wait for it here
            return self.add(BtKind.WAIT_ACTION, ref=self.ref(n)) if n.l is not NodeKind.GOAL else None
        if n.l is NodeKind.END and g.partner(n).id not in self.used:
            # the START will place this END as its first region
            return None
        self.used.add(nid)
        self.tree_parent[nid] = parent
        if n.l is NodeKind.START:
            unit = self.start_unit(n)
        elif n.l is NodeKind.END:
            unit = self.end_unit(n)
        else:
            unit = self.goal_unit(n)
        body = self.children(n)
        if body is None:
            return unit
        return self.add(BtKind.SEQUENCE, [unit, body])

    def children(self, n: StnNode) -> int | None:
        order = [lk.peer for lk in n.Y]
        if n.l is NodeKind.START:
            end = self.g.partner(n).id
            order = [end] + [c for c in order if c != end]
        flows = [f for f in (self.flow(c, n.id) for c in order) if f is not None]
        if not flows:
            return None
        if len(flows) == 1:
            return flows[0]
        return self.add(BtKind.PARALLEL, flows)


def build_bt(g: Stn, dm: DistanceMatrix) -> BehaviorTree:
    """Compile a consistent STN (with its distance matrix) into a BT."""
    b = _Builder(g, dm)
    b.used.add(g.root)
    body = b.children(g.nodes[g.root])
    root = body if body is not None else b.add(BtKind.SUCCESS_LEAF)
    # renumber in pre-order so ids read top-down in exports
    return _renumber(BehaviorTree(root, b.nodes, b.index))


def _renumber(t: BehaviorTree) -> BehaviorTree:
    mapping = {node.id: i for i, node in enumerate(t.walk())}
    nodes = {}
    for old, new in mapping.items():
        n = t.nodes[old]
        nodes[new] = BtNode(new, n.kind, tuple(mapping[c] for c in n.children), n.ref, n.time, n.duration, n.literals)
    index = {ref: mapping[i] for ref, i in t.action_index.items()}
    return BehaviorTree(mapping[t.root], dict(sorted(nodes.items())), dict(sorted(index.items())))


# --------------------------------------------------------------------------
# XML / DOT


def _element(t: BehaviorTree, node: BtNode) -> ET.Element:
    el = ET.Element(node.kind.value, {"id": str(node.id)})
    if node.ref is not None:
        el.set("action", node.ref.action)
        el.set("start", str(node.ref.start))
        el.set("snap", node.ref.snap)
    if node.time is not None:
        el.set("ms", str(node.time))
    if node.duration is not None:
        el.set("duration", str(node.duration))
    for lit in sorted(node.literals):
        ET.SubElement(el, "Literal").text = str(lit)
    for c in node.children:
        el.append(_element(t, t.nodes[c]))
    return el


def export_bt_xml(t: BehaviorTree) -> str:
    doc = ET.Element("BehaviorTree", {"root": str(t.root)})
    doc.append(_element(t, t.nodes[t.root]))
    ET.indent(doc)
    return ET.tostring(doc, encoding="unicode") + "\n"


export_bt = export_bt_xml


def parse_bt_xml(text: str) -> BehaviorTree:
    doc = ET.fromstring(text)
    if doc.tag != "BehaviorTree" or len(doc) != 1:
        raise ValueError("expected a <BehaviorTree> element with one child")
    by_tag = {k.value: k for k in BtKind}
    nodes: dict[int, BtNode] = {}
    index: dict[SnapRef, int] = {}

    def visit(el: ET.Element) -> int:
        kind = by_tag[el.tag]
        nid = int(el.get("id"))
        ref = None
        if el.get("action") is not None:
            ref = SnapRef(el.get("action"), int(el.get("start")), el.get("snap"))
        kids = tuple(visit(c) for c in el if c.tag != "Literal")
        lits = frozenset(parse_literal(c.text) for c in el if c.tag == "Literal")
        time = el.get("ms")
        dur = el.get("duration")
        nodes[nid] = BtNode(nid, kind, kids, ref, None if time is None else int(time), None if dur is None else int(dur), lits)
        if kind is BtKind.EXECUTE_ACTION:
            index[ref] = nid
        return nid

    root = visit(doc[0])
    return BehaviorTree(root, dict(sorted(nodes.items())), dict(sorted(index.items())))


def _dot_label(node: BtNode) -> str:
    parts = [node.kind.value]
    if node.ref is not None:
        parts.append(f"{node.ref.snap}{node.ref.action}")
    if node.time is not None:
        parts.append(f"{node.time} ms")
    if node.literals:
        parts.append(" ".join(str(x) for x in sorted(node.literals)))
    return "\\n".join(p.replace('"', '\\"') for p in parts)


def export_bt_dot(t: BehaviorTree) -> str:
    out = ["digraph bt {", "  node [shape=box, fontsize=10];"]
    for node in t.walk():
        shape = ", shape=ellipse" if node.kind.is_control else ""
        out.append(f'  b{node.id} [label="{_dot_label(node)}"{shape}];')
    for node in t.walk():
        for c in node.children:
            out.append(f"  b{node.id} -> b{c};")
    out.append("}")
    return "\n".join(out) + "\n"
