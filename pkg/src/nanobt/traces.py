"""Call/return events, traces, trace sets and their well-formedness.

Compartments and procedures are identified by name (plain strings).  A trace
is a tuple of :class:`Event`; a :class:`TraceSet` bundles K traces together
with the compartment partition (context vs. program), the main compartment and
the procedure interface of every compartment.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class Kind(enum.Enum):
    CALL = "call"
    RET = "ret"


@dataclass(frozen=True)
class Event:
    kind: Kind
    src: str
    dst: str
    payload: int
    proc: Optional[str] = None

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"event from {self.src} to itself is not cross-compartment")
        if (self.kind is Kind.CALL) != (self.proc is not None):
            raise ValueError("calls carry a procedure, returns do not")
        if not INT64_MIN <= self.payload <= INT64_MAX:
            raise ValueError(f"payload {self.payload} does not fit in 64 bits")

    @property
    def is_call(self) -> bool:
        return self.kind is Kind.CALL

    def __str__(self):
        if self.is_call:
            return f"call {self.src} -> {self.dst}.{self.proc} ({self.payload})"
        return f"ret {self.src} -> {self.dst} ({self.payload})"


def call(src: str, dst: str, proc: str, arg: int) -> Event:
    return Event(Kind.CALL, src, dst, arg, proc)


def ret(src: str, dst: str, value: int) -> Event:
    return Event(Kind.RET, src, dst, value)


Trace = tuple  # tuple[Event, ...]

# (caller, procedure, callee), top of stack first
Frame = tuple
Stack = tuple


@dataclass(frozen=True)
class TraceSet:
    traces: tuple
    context: frozenset
    programs: frozenset
    main: str
    interface: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "traces", tuple(tuple(m) for m in self.traces))
        object.__setattr__(self, "context", frozenset(self.context))
        object.__setattr__(self, "programs", frozenset(self.programs))
        if self.context & self.programs:
            raise ValueError(f"compartments {sorted(self.context & self.programs)} "
                             "are both context and program")
        extra = set(self.interface) - self.compartments
        if extra:
            raise ValueError(f"interface declared for unknown compartments {sorted(extra)}")
        iface = {c: tuple(self.interface.get(c, ())) for c in sorted(self.compartments)}
        object.__setattr__(self, "interface", iface)
        if self.main not in self.compartments:
            raise ValueError(f"main compartment {self.main} is not declared")

    @property
    def compartments(self) -> frozenset:
        return self.context | self.programs

    def __len__(self):
        return len(self.traces)

    def main_procedure(self) -> Optional[str]:
        procs = self.interface.get(self.main, ())
        return procs[0] if procs else None


def control_flow_ok(m: Sequence[Event], main: str) -> bool:
    """True iff control passes along the trace: each event starts where the last one ended."""
    expected = main
    for e in m:
        if e.src != expected:
            return False
        expected = e.dst
    return True


def push_pop(e: Event, st: Stack) -> Optional[Stack]:
    """One step of the abstract stack discipline; None when a return does not match."""
    if e.is_call:
        return ((e.src, e.proc, e.dst),) + st
    if st and st[0][0] == e.dst and st[0][2] == e.src:
        return st[1:]
    return None


def wf_stack_trace(m: Sequence[Event], st: Stack = ()) -> bool:
    for e in m:
        st = push_pop(e, st)
        if st is None:
            return False
    return True


def stack_after(m: Sequence[Event], st: Stack = ()) -> Stack:
    for k, e in enumerate(m):
        nxt = push_pop(e, st)
        if nxt is None:
            raise ValueError(f"unmatched return at position {k}: {e}")
        st = nxt
    return st


def involves(e: Event, c: str) -> bool:
    return e.src == c or e.dst == c


def filter_for_compartment(m: Sequence[Event], c: str) -> tuple:
    return tuple(e for e in m if involves(e, c))


def in_control(c: str, filtered: Sequence[Event], main: str) -> bool:
    """Whether ``c`` holds control after the given ``c``-filtered history."""
    if filtered:
        return filtered[-1].dst == c
    return c == main


class WellFormednessError(Exception):
    """A trace set violates one of the well-formedness clauses.

    ``clause`` is one of ``declaration``, ``interface``, ``control-flow``,
    ``stack`` or ``determinacy``.
    """

    def __init__(self, clause: str, trace: int, position: int, detail: str = ""):
        self.clause = clause
        self.trace = trace
        self.position = position
        self.detail = detail
        msg = f"{clause} violated at trace {trace}, position {position}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


CLAUSES = ("declaration", "interface", "control-flow", "stack", "determinacy")


def _check_trace(S: TraceSet, i: int, m: Sequence[Event]) -> None:
    expected = S.main
    st: Stack = ()
    for k, e in enumerate(m):
        for c in (e.src, e.dst):
            if c not in S.compartments:
                raise WellFormednessError("declaration", i, k, f"undeclared compartment {c}")
        if e.is_call and e.proc not in S.interface[e.dst]:
            raise WellFormednessError("interface", i, k,
                                      f"{e.dst} does not declare procedure {e.proc}")
        if e.src != expected:
            raise WellFormednessError("control-flow", i, k,
                                      f"{e.src} acts while {expected} has control")
        expected = e.dst
        st = push_pop(e, st)
        if st is None:
            raise WellFormednessError("stack", i, k, f"unmatched return {e}")


END = "end"  # marker for "the trace stops here" in next-action maps


def observable(e: Event) -> tuple:
    """What the receiving compartment can see of an incoming event."""
    return (e.kind, e.proc, e.payload)


def _check_determinacy(S: TraceSet) -> None:
    # For every context compartment, the next action taken while it holds
    # control (an event or the end of the trace) must be a function of its
    # filtered history, and incoming events must be told apart by what the
    # receiver observes.  The maps are the trie of filtered prefixes, keyed flat.
    for c in sorted(S.context):
        nxt: dict = {}
        seen_in: dict = {}
        for i, m in enumerate(S.traces):
            hist: tuple = ()
            for k, e in enumerate(m):
                if not involves(e, c):
                    continue
                if in_control(c, hist, S.main):
                    seen = nxt.setdefault(hist, (e, i))
                    if seen[0] != e:
                        raise WellFormednessError(
                            "determinacy", i, k,
                            f"{c} does {_show(e)} where trace {seen[1]} has {_show(seen[0])}")
                else:
                    seen = seen_in.setdefault((hist, observable(e)), (e, i))
                    if seen[0] != e:
                        raise WellFormednessError(
                            "determinacy", i, k,
                            f"{c} cannot tell {e} from {seen[0]} (trace {seen[1]})")
                hist += (e,)
            if in_control(c, hist, S.main):
                seen = nxt.setdefault(hist, (END, i))
                if seen[0] != END:
                    raise WellFormednessError(
                        "determinacy", i, len(m),
                        f"trace stops while {c} continues with {_show(seen[0])} in trace {seen[1]}")


def _show(a) -> str:
    return "end of trace" if a == END else str(a)


def check_well_formed(S: TraceSet) -> None:
    """Raise :class:`WellFormednessError` on the first violated clause.

    Per-trace clauses (declaration, interface, control flow, stack bracketing)
    are checked trace by trace; determinacy of every context compartment is
    checked across the whole set afterwards.
    """
    for i, m in enumerate(S.traces):
        _check_trace(S, i, m)
    _check_determinacy(S)


def is_well_formed(S: TraceSet) -> bool:
    try:
        check_well_formed(S)
    except WellFormednessError:
        return False
    return True


def compartments_of(traces: Iterable[Sequence[Event]]) -> set:
    return {c for m in traces for e in m for c in (e.src, e.dst)}
