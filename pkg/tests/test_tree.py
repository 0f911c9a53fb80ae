import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import M1, M2, M3, single_set
from nanobt.traces import TraceSet, WellFormednessError, call, filter_for_compartment
from nanobt.tree import (LEAF, Tree, add_trace_to_tree, branch_of_trace, build_level1,
                         deterministic_tree, dump_tree, tree_of_trace_list, unique_current_tree)
from strategies import arbitrary_trees, traces, well_formed_sets


def branching_tree():
    return tree_of_trace_list([filter_for_compartment(m, "C_C") for m in (M1, M2, M3)])


def labels(t):
    return [e for e, _ in t.children]


def test_branch_of_empty_trace():
    assert branch_of_trace(()) == LEAF


def test_branch_of_two_events():
    e1, e2 = M1[:2]
    assert branch_of_trace((e1, e2)) == Tree(None, ((e1, Tree(None, ((e2, LEAF),))),))


def test_branch_of_program_view_is_linear_depth_4():
    t = branch_of_trace(filter_for_compartment(M1, "C_P"))
    assert t.is_linear() and t.depth() == 4


def test_add_empty_trace_is_identity():
    t = branching_tree()
    assert add_trace_to_tree((), t) is t


def test_add_to_leaf():
    assert add_trace_to_tree(M1, LEAF) == branch_of_trace(M1)


def test_branching_shape():
    t = add_trace_to_tree(M3, add_trace_to_tree(M2, branch_of_trace(M1)))
    assert t == branching_tree()
    assert labels(t) == [M1[0]]
    n1 = t.children[0][1]
    # sibling order is trace order: Call 41 path, Ret 43, Ret 44
    assert labels(n1) == [M1[1], M2[1], M3[1]]
    call41, ret43, ret44 = (sub for _, sub in n1.children)
    assert call41.depth() == 2 and call41.is_linear()
    assert ret43 == LEAF and ret44 == LEAF
    assert t.size() == 7


def test_tree_of_trace_list_small_cases():
    assert tree_of_trace_list([]) == LEAF
    assert tree_of_trace_list([M1]) == branch_of_trace(M1)


def test_unique_current_tree_examples():
    t = branching_tree()
    assert unique_current_tree("C_C", t)
    assert unique_current_tree("C_C", LEAF)
    a, b = call("C_C", "C_P", "p", 1), call("C_C", "C_P", "p", 2)
    assert not unique_current_tree("C_C", Tree(None, ((a, LEAF), (b, LEAF))))
    # the program side may branch freely
    assert not unique_current_tree("C_P", t)


def test_deterministic_tree_examples():
    e = M1[0]
    assert deterministic_tree(branching_tree())
    assert deterministic_tree(LEAF)
    assert not deterministic_tree(Tree(None, ((e, LEAF), (e, LEAF))))
    assert not deterministic_tree(Tree(None, ((M1[1], Tree(None, ((e, LEAF), (e, LEAF)))),)))


def test_build_level1_branching(branching):
    l1 = build_level1(branching)
    assert set(l1.context) == {"C_C"} and len(l1.programs) == 3
    assert l1.context["C_C"] == branching_tree()
    p0 = l1.programs[0]["C_P"]
    assert p0.is_linear() and p0.depth() == 4


def test_build_level1_empty_set():
    l1 = build_level1(TraceSet((), {"C_C", "X"}, {"C_P"}, "C_C"))
    assert all(t == LEAF for t in l1.context.values())
    assert l1.programs == ()


def test_build_level1_single_trace():
    l1 = build_level1(single_set())
    for t in (l1.context["C1"], l1.programs[0]["C2"]):
        assert t.is_linear() and t.depth() == 4


def test_build_level1_rejects_ill_formed(branching):
    S = TraceSet(((M1[1],),), branching.context, branching.programs, branching.main, branching.interface)
    with pytest.raises(WellFormednessError):
        build_level1(S)


def test_dump_outline():
    text = dump_tree(branch_of_trace(M2))
    assert text.splitlines() == ["*", "  call C_C -> C_P.p (40)", "    ret C_P -> C_C (43)"]


@given(st.lists(traces, max_size=5), traces)
def test_add_preserves_determinism(ms, m):
    t = tree_of_trace_list(ms)
    assert deterministic_tree(t)
    assert deterministic_tree(add_trace_to_tree(m, t))


@given(arbitrary_trees(), traces)
def test_add_never_creates_duplicate_siblings(t, m):
    if deterministic_tree(t):
        assert deterministic_tree(add_trace_to_tree(m, t))


@given(st.lists(traces, max_size=5))
def test_add_is_idempotent_and_sound(ms):
    t = tree_of_trace_list(ms)
    paths = set(t.paths())
    for m in ms:
        assert add_trace_to_tree(m, t) == t
        assert m in paths
    # nothing but prefixes of the inputs is present
    assert paths == {m[:k] for m in ms for k in range(len(m) + 1)} | {()}


@settings(max_examples=200)
@given(well_formed_sets)
def test_level1_invariants(S):
    l1 = build_level1(S)
    for i, c, t in l1.items():
        assert deterministic_tree(t)
        if i is None:
            assert unique_current_tree(c, t)
        else:
            assert t.is_linear()
    paths = {c: set(t.paths()) for c, t in l1.context.items()}
    for i, m in enumerate(S.traces):
        for c in S.context:
            assert filter_for_compartment(m, c) in paths[c]
        for c in S.programs:
            assert next(reversed(list(l1.programs[i][c].paths()))) == filter_for_compartment(m, c)
