import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import M1, M2, M3, branching_set
from nanobt.traces import (CLAUSES, Event, Kind, TraceSet, WellFormednessError, call,
                           check_well_formed, control_flow_ok, filter_for_compartment,
                           in_control, is_well_formed, ret, stack_after, wf_stack_trace)
from strategies import pair_scan_deterministic, traces, walk_sets, well_formed_sets


def test_event_text():
    assert str(call("A", "B", "p", 40)) == "call A -> B.p (40)"
    assert str(ret("B", "A", -1)) == "ret B -> A (-1)"


def test_event_validation():
    with pytest.raises(ValueError):
        call("A", "A", "p", 0)
    with pytest.raises(ValueError):
        ret("A", "B", 2**63)
    with pytest.raises(ValueError):
        Event(Kind.RET, "A", "B", 0, proc="p")
    assert ret("A", "B", -2**63).payload == -2**63


def test_traceset_validation():
    with pytest.raises(ValueError):
        TraceSet((), {"A"}, {"A"}, "A")
    with pytest.raises(ValueError):
        TraceSet((), {"A"}, {"B"}, "D")
    with pytest.raises(ValueError):
        TraceSet((), {"A"}, (), "A", {"B": ("p",)})


# -- control_flow_ok -----------------------------------------------------------

def test_control_flow_branching_path():
    assert control_flow_ok(M1, "C_C")


def test_control_flow_empty():
    assert control_flow_ok((), "C_C")


def test_control_flow_break():
    m = (call("C_C", "C_P", "p", 40), call("C_C", "C_P", "p", 41))
    assert not control_flow_ok(m, "C_C")


def test_control_flow_wrong_starter():
    assert not control_flow_ok(M1, "C_P")


# -- wf_stack_trace ----------------------------------------------------------

def test_stack_branching_path():
    assert wf_stack_trace(M1, ())
    assert stack_after(M1[:2]) == (("C_P", "p", "C_C"), ("C_C", "p", "C_P"))


def test_stack_empty_trace_any_stack():
    assert wf_stack_trace((), ())
    assert wf_stack_trace((), (("A", "p", "B"),))


def test_stack_return_on_empty():
    assert not wf_stack_trace((ret("C_P", "C_C", 43),), ())


def test_stack_return_to_wrong_caller():
    m = (call("A", "B", "p", 1), ret("B", "D", 2))
    assert not wf_stack_trace(m)
    with pytest.raises(ValueError):
        stack_after(m)


@given(traces)
def test_stack_prefix_closure(m):
    if wf_stack_trace(m):
        assert all(wf_stack_trace(m[:k]) for k in range(len(m)))


# -- filtering ----------------------------------------------------------------

def test_filter_all_involved():
    assert filter_for_compartment(M1, "C_C") == M1


def test_filter_empty():
    assert filter_for_compartment((), "X") == ()


def test_filter_three_compartments():
    m = (call("A", "B", "p", 1), call("B", "D", "p", 2), ret("D", "B", 3), ret("B", "A", 4))
    assert filter_for_compartment(m, "A") == (m[0], m[3])


@given(traces, st.sampled_from(("A", "B", "D")))
def test_filter_idempotent_and_shrinking(m, c):
    f = filter_for_compartment(m, c)
    assert filter_for_compartment(f, c) == f
    assert len(f) <= len(m)
    assert all(c in (e.src, e.dst) for e in f)


@settings(max_examples=150)
@given(well_formed_sets)
def test_filtered_context_views_alternate(S):
    for c in S.context:
        for m in S.traces:
            f = filter_for_compartment(m, c)
            for a, b in zip(f, f[1:]):
                # after control reaches c, c is the next to act, and vice versa
                assert (a.dst == c) == (b.src == c)


# -- check_well_formed -----------------------------------------------------------

def test_branching_well_formed(branching):
    check_well_formed(branching)


def test_empty_set_well_formed():
    check_well_formed(TraceSet((), {"C_C"}, {"C_P"}, "C_C"))


def test_determinacy_error_names_position():
    S = branching_set((call("C_C", "C_P", "p", 40),), (call("C_C", "C_P", "p", 41),))
    with pytest.raises(WellFormednessError) as info:
        check_well_formed(S)
    err = info.value
    assert (err.clause, err.trace, err.position) == ("determinacy", 1, 0)
    assert str(err).startswith("determinacy violated at trace 1, position 0")


def test_stopping_early_while_context_in_control_is_rejected():
    # the context cannot both stop and continue after the same history
    S = branching_set(M2, ())
    with pytest.raises(WellFormednessError) as info:
        check_well_formed(S)
    assert info.value.clause == "determinacy"


def test_callee_must_distinguish_callers():
    # C cannot tell which of A and B called it with the same procedure and argument
    m1 = (call("A", "C", "p", 1), ret("C", "A", 5))
    m2 = (call("A", "B", "p", 0), call("B", "C", "p", 1), ret("C", "B", 6))
    S = TraceSet((m1, m2), {"C"}, {"A", "B"}, "A", {"A": ("p",), "B": ("p",), "C": ("p",)})
    assert not pair_scan_deterministic(S)
    with pytest.raises(WellFormednessError) as info:
        check_well_formed(S)
    assert info.value.clause == "determinacy"


def test_program_may_branch_freely(branching):
    # C_P is a program: different traces may disagree on its moves
    assert in_control("C_P", (M1[0],), "C_C")
    assert is_well_formed(branching)


@pytest.mark.parametrize("traces_, clause, where", [
    (((call("C_C", "C_P", "p", 40), call("C_C", "C_P", "p", 41)),), "control-flow", (0, 1)),
    (((ret("C_C", "C_P", 1),),), "stack", (0, 0)),
    (((call("C_C", "C_P", "q", 1),),), "interface", (0, 0)),
    (((call("C_C", "X", "p", 1),),), "declaration", (0, 0)),
    ((M2, M3 + (call("C_C", "C_P", "p", 7),)), None, None),
    ((M2, M2 + (call("C_C", "C_P", "p", 7),)), "determinacy", (1, 2)),
])
def test_clause_reporting(traces_, clause, where):
    S = branching_set(*traces_)
    if clause is None:
        check_well_formed(S)
        return
    with pytest.raises(WellFormednessError) as info:
        check_well_formed(S)
    assert info.value.clause == clause
    assert (info.value.trace, info.value.position) == where
    assert clause in CLAUSES


@settings(max_examples=400)
@given(walk_sets())
def test_determinacy_agrees_with_pair_scan(S):
    assert is_well_formed(S) == pair_scan_deterministic(S)


@settings(max_examples=150)
@given(well_formed_sets, st.data())
def test_truncation_at_program_control_preserves_ok(S, data):
    if not S.traces:
        return
    i = data.draw(st.integers(0, len(S) - 1))
    m = S.traces[i]
    # cut points where a program compartment holds control
    cuts = [k for k in range(len(m) + 1)
            if (m[k - 1].dst if k else S.main) in S.programs]
    if not cuts:
        return
    k = data.draw(st.sampled_from(cuts))
    T = TraceSet(S.traces[:i] + (m[:k],) + S.traces[i + 1:], S.context, S.programs,
                 S.main, S.interface)
    check_well_formed(T)


@settings(max_examples=300)
@given(well_formed_sets)
def test_generated_sets_satisfy_every_clause(S):
    check_well_formed(S)
    assert pair_scan_deterministic(S)
    assert all(control_flow_ok(m, S.main) and wf_stack_trace(m) for m in S.traces)
