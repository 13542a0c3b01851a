from __future__ import annotations

import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stnbt.bt import BtKind, SnapRef, build_bt, export_bt_dot, export_bt_xml, parse_bt_xml
from stnbt.generator import PlanGeneratorConfig, generate
from stnbt.pddl import Problem, TemporalPlan
from stnbt.pipeline import compile_plan
from stnbt.stn import NodeKind, build_stn, export_stn_dot, propagate

REF_KINDS = (BtKind.WAIT_ACTION, BtKind.CHECK_ACTION)


def compiled(fx, **kw):
    return compile_plan(fx.problem, fx.plan, **kw)


def golden(golden_dir, name, text):
    """Compare with a frozen file; REGEN_GOLDEN=1 rewrites it."""
    path = golden_dir / name
    if os.environ.get("REGEN_GOLDEN"):
        path.write_text(text)
    assert path.exists(), f"missing golden file {path.name}; run with REGEN_GOLDEN=1"
    assert text == path.read_text()


def snap_ref(node):
    return SnapRef(node.a, node.start, node.l.value)


def ancestors(tree, nid):
    parents = tree.parents()
    out = []
    while nid in parents:
        nid = parents[nid]
        out.append(nid)
    return out


def ordered_before(tree, first, second):
    """True iff some SEQUENCE holds ``first`` in an earlier child than ``second``."""
    chain = [second] + ancestors(tree, second)
    for child, seq in zip(chain, chain[1:]):
        node = tree[seq]
        if node.kind is not BtKind.SEQUENCE:
            continue
        for earlier in node.children[: node.children.index(child)]:
            if first == earlier or earlier in ancestors(tree, first):
                return True
    return False


def check_structure(c):
    tree, g = c.bt, c.stn
    parents = tree.parents()  # raises if a node has two parents
    assert len(list(tree.walk())) == len(tree.nodes) == len(parents) + 1
    assert list(tree.nodes) == [n.id for n in tree.walk()]
    executes = tree.units(BtKind.EXECUTE_ACTION)
    snaps = {snap_ref(n) for n in g.nodes.values() if n.l in (NodeKind.START, NodeKind.END)}
    assert {n.ref for n in executes} == snaps == set(tree.action_index)
    assert len(executes) == len(snaps)
    for n in executes:
        assert tree.action_index[n.ref] == n.id
    for n in tree.walk():
        if n.kind in REF_KINDS:
            assert n.ref in tree.action_index
        if n.kind is BtKind.PARALLEL:
            assert len(n.children) >= 2
        if n.kind is BtKind.SEQUENCE:
            assert n.children
        if not n.kind.is_control:
            assert not n.children
    # every STN link between snaps is enforced by tree order or an explicit
    # wait/check inside the child's unit
    for p, lk in g.links():
        a, b = g.nodes[p], g.nodes[lk.peer]
        if a.l is NodeKind.INIT or b.l in (NodeKind.INIT, NodeKind.GOAL):
            continue
        pe, ce = tree.action_index[snap_ref(a)], tree.action_index[snap_ref(b)]
        unit = tree[parents[ce]]
        waits = {tree[k].ref for k in unit.children if tree[k].kind in REF_KINDS}
        assert snap_ref(a) in waits or ordered_before(tree, pe, ce), (a.label(), b.label())


def test_matchcellar_structure(matchcellar):
    c = compiled(matchcellar)
    check_structure(c)
    root = c.bt[c.bt.root]
    assert root.kind is BtKind.PARALLEL
    branches = [c.bt[k] for k in root.children if c.bt[k].kind is BtKind.SEQUENCE]
    firsts = [c.bt[c.bt[b.children[0]].children[-1]].ref for b in branches]
    assert [(r.action, r.snap) for r in firsts] == [("(light_match match1)", "START"), ("(light_match match2)", "START")]


def test_matchcellar_units(matchcellar):
    tree = compiled(matchcellar).bt
    mf2 = SnapRef("(mend_fuse fuse2 match2)", 5002, "START")
    unit = tree[tree.parents()[tree.action_index[mf2]]]
    kinds = [tree[k].kind for k in unit.children]
    assert kinds == [
        BtKind.WAIT_TIME,
        BtKind.WAIT_ACTION,
        BtKind.CHECK_AT_START,
        BtKind.APPLY_AT_START,
        BtKind.EXECUTE_ACTION,
    ]
    assert tree[unit.children[0]].time == 5002
    end = SnapRef("(mend_fuse fuse1 match1)", 1, "END")
    unit = tree[tree.parents()[tree.action_index[end]]]
    kinds = [tree[k].kind for k in unit.children]
    assert kinds == [
        BtKind.EXECUTE_ACTION,
        BtKind.CHECK_TIME,
        BtKind.CHECK_OVERALL,
        BtKind.CHECK_AT_END,
        BtKind.APPLY_AT_END,
    ]
    assert tree[unit.children[1]].time == 5001
    goal = tree.units(BtKind.CHECK_GOAL)
    assert len(goal) == 1 and {str(x) for x in goal[0].literals} == {"(mended fuse1)", "(mended fuse2)"}


def test_end_unit_is_first_region_after_start(matchcellar):
    tree = compiled(matchcellar).bt
    parents = tree.parents()
    for ref, nid in tree.action_index.items():
        if ref.snap != "END":
            continue
        start = tree.action_index[SnapRef(ref.action, ref.start, "START")]
        flow = tree[parents[parents[start]]]
        body = tree[flow.children[1]]
        first = body.children[0] if body.kind is BtKind.PARALLEL else body.id
        assert nid in [n.id for n in tree.walk(first)][:3]


def test_empty_plan_is_success_leaf():
    tree = compile_plan(Problem("e", "d"), TemporalPlan()).bt
    assert len(tree.nodes) == 1 and tree[tree.root].kind is BtKind.SUCCESS_LEAF


def test_flexible_mode_drops_check_time(matchcellar):
    tree = compiled(matchcellar, flexible=True).bt
    assert not tree.units(BtKind.CHECK_TIME)
    assert [n.time for n in tree.units(BtKind.WAIT_TIME)] == [0, 1, 5002, 2002]


@pytest.mark.parametrize("name", ["matchcellar", "assembly"])
def test_xml_round_trip(request, name):
    fx = request.getfixturevalue(name)
    tree = compiled(fx).bt
    text = export_bt_xml(tree)
    again = parse_bt_xml(text)
    assert again == tree
    assert export_bt_xml(again) == text


def test_parse_rejects_other_documents():
    with pytest.raises(ValueError):
        parse_bt_xml("<Tree><Sequence id='0'/></Tree>")


def test_golden_exports(matchcellar, golden_dir):
    c = compiled(matchcellar)
    golden(golden_dir, "matchcellar_bt.xml", export_bt_xml(c.bt))
    golden(golden_dir, "matchcellar_bt.dot", export_bt_dot(c.bt))
    golden(golden_dir, "matchcellar_stn.dot", export_stn_dot(c.stn))


def test_build_is_deterministic(assembly):
    g = build_stn(assembly.problem, assembly.plan)
    a = build_bt(g, propagate(g))
    b = build_bt(g, propagate(g))
    assert export_bt_xml(a) == export_bt_xml(b)
    assert export_bt_dot(a) == export_bt_dot(b)


def test_assembly_structure(assembly):
    check_structure(compiled(assembly))
    check_structure(compiled(assembly, flexible=True))


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 100_000), length=st.integers(0, 6), flexible=st.booleans())
def test_generated_trees_are_well_formed(seed, length, flexible):
    inst = generate(PlanGeneratorConfig(length=length, seed=seed))
    c = compile_plan(inst.problem, inst.plan, flexible=flexible)
    check_structure(c)
    assert parse_bt_xml(export_bt_xml(c.bt)) == c.bt
