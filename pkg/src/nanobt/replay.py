"""Small-step replay of a trace against the intermediate levels 1-4.

A state holds the trace still to be produced, the per-compartment code
(trees, reduced as events are consumed, or rule tables, which are not), and
ghost state: the location of every compartment (level 2 onwards) and the
abstract cross-compartment stack (level 3 onwards).  Each level adds its side
conditions on top of the previous one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .passes import RuleTable, node_id
from .traces import Event, Stack, push_pop
from .tree import LevelProgram, Tree

LEVELS = (1, 2, 3, 4)


class StepError(Exception):
    pass


class NoBranch(StepError):
    def __init__(self, compartment: str, event: Event):
        self.compartment = compartment
        self.event = event
        super().__init__(f"{compartment} has no branch for {event}")


class StackMismatch(StepError):
    def __init__(self, event: Event, stack: Stack):
        self.event = event
        self.stack = stack
        super().__init__(f"{event} does not match stack {list(stack)}")


class LocMismatch(StepError):
    def __init__(self, compartment: str, ghost: int, node: int):
        self.compartment = compartment
        super().__init__(f"{compartment}: ghost location {ghost} but tree is at node {node}")


@dataclass(frozen=True)
class ReplayState:
    remaining: tuple
    code: dict
    loc: dict = field(default_factory=dict)
    stack: Stack = ()


def initial_state(level: int, program: LevelProgram, i: int, m: Sequence[Event]) -> ReplayState:
    code = program.view(i)
    loc = {c: 0 for c in code} if level >= 2 else {}
    return ReplayState(tuple(m), code, loc, ())


def step(level: int, s: ReplayState) -> ReplayState:
    """Consume the head event of ``s.remaining``; raise :class:`StepError` if stuck."""
    if not s.remaining:
        raise ValueError("nothing left to replay")
    e = s.remaining[0]
    code = dict(s.code)
    loc = dict(s.loc)
    for c in (e.src, e.dst):
        if c not in code:
            raise NoBranch(c, e)
        if level == 4:
            tbl: RuleTable = code[c]
            targets = tbl.lookup(loc[c], e)
            if not targets:
                raise NoBranch(c, e)
            loc[c] = targets[0]
        else:
            t: Tree = code[c]
            if level >= 2 and loc[c] != node_id(t.payload):
                raise LocMismatch(c, loc[c], node_id(t.payload))
            sub = t.child(e)
            if sub is None:
                raise NoBranch(c, e)
            code[c] = sub
            if level >= 2:
                loc[c] = node_id(sub.payload)
    stack = s.stack
    if level >= 3:
        nxt = push_pop(e, stack)
        if nxt is None:
            raise StackMismatch(e, stack)
        stack = nxt
    return ReplayState(s.remaining[1:], code, loc, stack)


def successors(level: int, s: ReplayState) -> int:
    """Number of ways the head event can be matched (determinism check)."""
    e = s.remaining[0]
    count = 1
    for c in (e.src, e.dst):
        x = s.code.get(c)
        if x is None:
            return 0
        if level == 4:
            count *= len(x.lookup(s.loc[c], e))
        else:
            count *= sum(1 for label, _ in x.children if label == e)
    return count


@dataclass
class ReplayReport:
    level: int
    trace: int
    ok: bool
    position: Optional[int] = None
    error: Optional[StepError] = None
    state: Optional[ReplayState] = None

    def __str__(self):
        if self.ok:
            return "ok"
        return f"level {self.level}, trace {self.trace}, position {self.position}: {self.error}"


def replay(level: int, program: LevelProgram, i: int, m: Sequence[Event],
           observer=None) -> ReplayReport:
    """Run ``m`` from the initial state; ``observer(k, state)`` sees every reached state."""
    s = initial_state(level, program, i, m)
    k = 0
    if observer:
        observer(k, s)
    while s.remaining:
        try:
            s = step(level, s)
        except StepError as err:
            return ReplayReport(level, i, False, k, err, s)
        k += 1
        if observer:
            observer(k, s)
    return ReplayReport(level, i, True, state=s)
