import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import M1, M2, M3
from nanobt.codegen import pipeline
from nanobt.passes import (BracketingError, FlatRule, RuleTable, UniquenessError,
                           annotate_stacks, check_flat_uniqueness, flatten, number_nodes,
                           unique_ids)
from nanobt.traces import Kind, call, filter_for_compartment, ret
from nanobt.tree import LEAF, Tree, branch_of_trace, tree_of_trace_list
from strategies import arbitrary_trees, well_formed_sets

CC, CP = "C_C", "C_P"


def branching_numbered():
    return number_nodes(tree_of_trace_list([filter_for_compartment(m, CC) for m in (M1, M2, M3)]))


def fold_stack(path):
    """Independent oracle: push (caller, proc, callee) on calls, pop matching frames on returns."""
    st = []
    for e in path:
        if e.kind is Kind.CALL:
            st.insert(0, (e.src, e.proc, e.dst))
        else:
            assert st and st[0][0] == e.dst and st[0][2] == e.src
            st.pop(0)
    return tuple(st)


def ids_by_path(t):
    out = {}

    def go(node, path):
        out[path] = node.payload
        for e, sub in node.children:
            go(sub, path + (e,))
    go(t, ())
    return out


def test_branching_ids():
    ids = ids_by_path(branching_numbered())
    assert ids[()] == 0
    assert ids[M1[:1]] == 1
    assert ids[M1[:2]] == 2
    assert ids[M1[:3]] == 3
    assert ids[M1] == 4
    assert ids[M2] == 5
    assert ids[M3] == 6


def test_number_leaf_and_path():
    assert number_nodes(LEAF) == Tree(0)
    t = number_nodes(branch_of_trace(filter_for_compartment(M1, CP)))
    assert [n.payload for n in t.nodes()] == [0, 1, 2, 3, 4]


def test_unique_ids_examples():
    assert unique_ids(branching_numbered())
    assert not unique_ids(Tree(0, ((M1[0], Tree(1)), (M2[1], Tree(1)))))


def test_branching_snapshots():
    t = annotate_stacks(branching_numbered(), CC)
    snap = {n.payload[0]: n.payload[1] for n in t.nodes()}
    down = ((CC, "p", CP),)
    assert snap == {0: (), 1: down, 2: ((CP, "p", CC),) + down, 3: down, 4: (), 5: (), 6: ()}


def test_annotate_leaf():
    assert annotate_stacks(Tree(0), CC) == Tree((0, ()))


def test_annotate_rejects_unbracketed_return():
    with pytest.raises(BracketingError):
        annotate_stacks(number_nodes(branch_of_trace((ret(CP, CC, 1),))), CC)


def test_branching_rules():
    rules = flatten(annotate_stacks(branching_numbered(), CC))
    assert rules == (
        FlatRule(0, call(CC, CP, "p", 40), 1),
        FlatRule(1, call(CP, CC, "p", 41), 2),
        FlatRule(2, ret(CC, CP, 42), 3),
        FlatRule(3, ret(CP, CC, 43), 4),
        FlatRule(1, ret(CP, CC, 43), 5),
        FlatRule(1, ret(CP, CC, 44), 6),
    )
    tbl = RuleTable(CC, rules)
    assert [r.src for r in tbl.outgoing] == [0, 2]
    assert [r.src for r in tbl.incoming_calls] == [1]
    assert [r.event.payload for r in tbl.incoming_returns] == [43, 43, 44]
    check_flat_uniqueness({CC: tbl})
    assert str(rules[0]) == "0 --call C_C -> C_P.p (40)--> 1"


def test_flatten_leaf_and_linear():
    assert flatten(Tree(0)) == ()
    rules = flatten(number_nodes(branch_of_trace(filter_for_compartment(M1, CP))))
    assert [r.src for r in rules] == [0, 1, 2, 3]


def test_uniqueness_outgoing_collision():
    tbl = RuleTable(CC, (FlatRule(0, call(CC, CP, "p", 1), 1), FlatRule(0, call(CC, CP, "p", 2), 2)))
    with pytest.raises(UniquenessError) as info:
        check_flat_uniqueness({CC: tbl})
    assert info.value.kind == "outgoing" and info.value.key == 0


def test_uniqueness_incoming_call_collision():
    e = call("A", "C", "p", 7)
    tbl = RuleTable("C", (FlatRule(1, e, 2), FlatRule(1, e, 3)))
    with pytest.raises(UniquenessError) as info:
        check_flat_uniqueness({"C": tbl})
    assert info.value.kind == "incoming call" and info.value.key == (1, "p", 7)


def test_uniqueness_incoming_return_collision():
    tbl = RuleTable("C", (FlatRule(1, ret("A", "C", 5), 2), FlatRule(1, ret("B", "C", 5), 3)))
    with pytest.raises(UniquenessError) as info:
        check_flat_uniqueness({"C": tbl})
    assert info.value.kind == "incoming return"


def test_same_key_different_procedure_is_fine():
    tbl = RuleTable("C", (FlatRule(1, call("A", "C", "p", 7), 2),
                          FlatRule(1, call("A", "C", "q", 7), 3)))
    check_flat_uniqueness({"C": tbl})


@given(arbitrary_trees())
def test_numbering_keeps_shape_and_is_injective(t):
    n = number_nodes(t)
    assert n.map(lambda _: None) == t
    assert unique_ids(n)
    assert n.payload == 0
    assert len(flatten(n)) == sum(1 for _ in t.edges())


def reachable_paths(rules, bound):
    out = {()}
    frontier = [(0, ())]
    while frontier:
        loc, path = frontier.pop()
        if len(path) >= bound:
            continue
        for r in rules:
            if r.src == loc:
                p = path + (r.event,)
                out.add(p)
                frontier.append((r.dst, p))
    return out


@settings(max_examples=200)
@given(well_formed_sets)
def test_pass_invariants_on_generated_sets(S):
    levels = pipeline(S)
    l2, l3, l4 = levels[2], levels[3], levels[4]
    for i, c, t in l3.items():
        for node_path, payload in ids_by_path(t).items():
            assert payload[1] == fold_stack(node_path)
    for i, c, t in l2.items():
        assert unique_ids(t)
    for tables in (l4.context, *l4.programs):
        check_flat_uniqueness(tables)
    for (i, c, t), (_, _, tbl) in zip(levels[1].items(), l4.items()):
        assert len(tbl.rules) == sum(1 for _ in t.edges())
        assert all(r.src != r.dst for r in tbl.rules)
        assert reachable_paths(tbl.rules, t.depth() + 1) == set(t.paths())


@settings(max_examples=100)
@given(well_formed_sets, st.data())
def test_flat_uniqueness_catches_injected_duplicate(S, data):
    l4 = pipeline(S)[4]
    tables = dict(l4.context)
    rich = [c for c, tbl in tables.items() if tbl.outgoing]
    if not rich:
        return
    c = data.draw(st.sampled_from(rich))
    r = tables[c].outgoing[0]
    other = FlatRule(r.src, r.event, max(x.dst for x in tables[c].rules) + 1)
    tables[c] = RuleTable(c, tables[c].rules + (other,))
    with pytest.raises(UniquenessError):
        check_flat_uniqueness(tables)
