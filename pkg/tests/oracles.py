"""Independent reference implementations used only by the tests."""

from __future__ import annotations

import math

from stnbt.bt import BehaviorTree, BtKind
from stnbt.stn import NodeKind, Stn


def bellman_ford(g: Stn, src: int) -> dict[int, float] | None:
    """Shortest distances from ``src`` in the distance graph; None on a
    negative cycle."""
    edges = []
    for p, lk in g.links():
        edges.append((p, lk.peer, lk.upper))
        edges.append((lk.peer, p, -lk.lower))
    dist = {n: math.inf for n in g.nodes}
    dist[src] = 0.0
    for _ in range(len(g.nodes) - 1):
        changed = False
        for u, v, w in edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    for u, v, w in edges:
        if dist[u] + w < dist[v]:
            return None
    return dist


def closure(nodes, edges) -> set[tuple[int, int]]:
    """Transitive closure (pairs joined by a path of length >= 1)."""
    reach = {(u, v) for u, v in edges}
    nodes = list(nodes)
    for k in nodes:
        for i in nodes:
            if (i, k) not in reach:
                continue
            for j in nodes:
                if (k, j) in reach:
                    reach.add((i, j))
    return reach


def snap_precedence(g: Stn) -> tuple[list[int], set[tuple[int, int]]]:
    snaps = [n for n in sorted(g.nodes) if g.nodes[n].l in (NodeKind.START, NodeKind.END)]
    edges = [(p, lk.peer) for p, lk in g.links()]
    reach = closure(g.nodes, edges)
    return snaps, {(u, v) for u, v in reach if u in snaps and v in snaps}


def linearizations(g: Stn):
    """Every total order of the snap nodes consistent with STN reachability,
    by depth-first extension of precedence-closed prefixes."""
    snaps, before = snap_precedence(g)
    preds = {n: {u for u, v in before if v == n} for n in snaps}
    order: list[int] = []
    placed: set[int] = set()

    def extend():
        if len(order) == len(snaps):
            yield list(order)
            return
        for n in snaps:
            if n not in placed and preds[n] <= placed:
                placed.add(n)
                order.append(n)
                yield from extend()
                order.pop()
                placed.discard(n)

    yield from extend()


def replay_linearization(problem, g: Stn, order) -> tuple[bool, bool]:
    """(goal holds at the end, every condition held) applying one snap at a
    time; over-all conditions are checked after every snap inside the
    interval."""
    state = set(problem.init_state)
    conds_ok = True
    running = []

    def holds(lits):
        return all((lit.fluent in state) == lit.positive for lit in lits)

    for nid in order:
        node = g.nodes[nid]
        conds_ok &= holds(node.R)
        if node.l is NodeKind.END:
            running.remove(node.key)
        for lit in node.E:
            (state.add if lit.positive else state.discard)(lit.fluent)
        if node.l is NodeKind.START:
            running.append(node.key)
        for key in running:
            conds_ok &= holds(g.snap(key, NodeKind.START).overall)
    return holds(problem.goal), conds_ok


def replay_trace(tree: BehaviorTree, init, trace) -> list[str]:
    """Re-run a SUCCESS trace through set operations: every CHECK that
    succeeded must hold in the replayed state, every APPLY must fire once."""
    state = set(init)
    problems = []
    applied = {}
    for e in trace:
        if e.event != "SUCCESS":
            continue
        node = tree.nodes[e.node]
        if node.kind in (BtKind.CHECK_AT_START, BtKind.CHECK_AT_END, BtKind.CHECK_OVERALL, BtKind.CHECK_GOAL):
            for lit in node.literals:
                if (lit.fluent in state) != lit.positive:
                    problems.append(f"{e.clock_ms}: {node.kind.value} {node.ref} needs {lit}")
        elif node.kind in (BtKind.APPLY_AT_START, BtKind.APPLY_AT_END):
            applied[node.ref] = applied.get(node.ref, 0) + 1
            for lit in node.literals:
                (state.add if lit.positive else state.discard)(lit.fluent)
    expected = {n.ref for n in tree.nodes.values() if n.kind in (BtKind.APPLY_AT_START, BtKind.APPLY_AT_END)}
    for ref in expected:
        if applied.get(ref) != 1:
            problems.append(f"{ref} applied {applied.get(ref, 0)} times")
    return problems
