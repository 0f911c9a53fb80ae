"""A small compartmentalized imperative language and its interpreter.

Each compartment owns three private integer slots (``loc``, ``is_call``,
``res``) and a set of procedures taking one integer argument.  Calls and
returns that cross a compartment boundary are the only observable events;
calls and returns within a compartment are silent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

from .traces import Event, call, ret


class Slot(enum.IntEnum):
    LOC = 0
    ISCALL = 1
    RES = 2

    @property
    def text(self) -> str:
        return ("loc", "is_call", "res")[self]


# -- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class ReadVar:
    slot: Slot


@dataclass(frozen=True)
class ReadArg:
    pass


@dataclass(frozen=True)
class Eq:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"


Expr = Union[IntConst, ReadVar, ReadArg, Eq, And]


# -- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    slot: Slot
    expr: Expr


@dataclass(frozen=True)
class Seq:
    """Two or more statements run in order; never directly nested."""

    stmts: tuple


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt"


@dataclass(frozen=True)
class CallStore:
    """``res = call dst.proc(arg)``."""

    dst: str
    proc: str
    arg: Expr


@dataclass(frozen=True)
class Return:
    expr: Expr


@dataclass(frozen=True)
class Exit:
    pass


@dataclass(frozen=True)
class Skip:
    pass


Stmt = Union[Assign, Seq, If, CallStore, Return, Exit, Skip]

SKIP = Skip()
EXIT = Exit()


def seq(*stmts) -> Stmt:
    """Build a normalized sequence: flattened, skips kept, singletons unwrapped."""
    flat = []
    for s in stmts:
        if isinstance(s, Seq):
            flat.extend(s.stmts)
        else:
            flat.append(s)
    if not flat:
        return SKIP
    if len(flat) == 1:
        return flat[0]
    return Seq(tuple(flat))


@dataclass(frozen=True)
class SourceProgram:
    compartments: Mapping[str, Mapping[str, Stmt]]
    main: Optional[tuple] = None  # (compartment, procedure)

    def procedure(self, c: str, p: str) -> Optional[Stmt]:
        return self.compartments.get(c, {}).get(p)


def link(*parts: SourceProgram) -> SourceProgram:
    """Union of disjoint compartment sets; mains must agree when present."""
    comps: dict = {}
    main = None
    for part in parts:
        clash = set(comps) & set(part.compartments)
        if clash:
            raise ValueError(f"compartments defined twice: {sorted(clash)}")
        comps.update(part.compartments)
        if part.main is not None:
            if main is not None and main != part.main:
                raise ValueError(f"conflicting entry points {main} and {part.main}")
            main = part.main
    return SourceProgram(comps, main)


# -- interpreter -----------------------------------------------------------

def eval_expr(e: Expr, slots, arg: int) -> int:
    if isinstance(e, IntConst):
        return e.value
    if isinstance(e, ReadVar):
        return slots[e.slot]
    if isinstance(e, ReadArg):
        return arg
    if isinstance(e, Eq):
        return int(eval_expr(e.left, slots, arg) == eval_expr(e.right, slots, arg))
    if isinstance(e, And):
        return int(bool(eval_expr(e.left, slots, arg)) and bool(eval_expr(e.right, slots, arg)))
    raise TypeError(f"not an expression: {e!r}")


@dataclass(frozen=True)
class Frame:
    """Saved caller context: its compartment, argument and continuation.

    On return the callee's value is stored into the caller's ``res`` slot
    before the continuation resumes.
    """

    compartment: str
    saved_arg: int
    kont: Optional[tuple]


class Outcome(enum.Enum):
    HALTED = "halted"
    STUCK = "stuck"
    BOUND_EXCEEDED = "bound exceeded"


class SourceRuntimeError(Exception):
    pass


class CallToMissingProcedure(SourceRuntimeError):
    pass


def initial_memory(compartments) -> dict:
    return {c: [0, 1, 0] for c in compartments}


@dataclass
class Machine:
    """Mutable small-step machine over a linked :class:`SourceProgram`.

    ``kont`` is a linked list ``(stmt, rest)`` of statements pending in the
    current frame; ``stack`` holds frames, innermost last.
    """

    program: SourceProgram
    cur: str = ""
    stmt: Optional[Stmt] = None
    kont: Optional[tuple] = None
    arg: int = 0
    stack: list = field(default_factory=list)
    mem: dict = field(default_factory=dict)
    halted: bool = False

    def __post_init__(self):
        if not self.mem:
            self.mem = initial_memory(self.program.compartments)
        if self.program.main is None:
            self.halted = True
            return
        c, p = self.program.main
        body = self.program.procedure(c, p)
        if body is None:
            raise CallToMissingProcedure(f"entry point {c}.{p} is not defined")
        self.cur, self.stmt = c, body

    def step(self) -> Optional[Event]:
        """Perform one transition; return the event it emits, if any."""
        s = self.stmt
        slots = self.mem[self.cur]
        if isinstance(s, Skip):
            if self.kont is not None:
                self.stmt, self.kont = self.kont
                return None
            # falling off the end of a body returns 0
            return self._return(0)
        if isinstance(s, Seq):
            kont = self.kont
            for sub in reversed(s.stmts[1:]):
                kont = (sub, kont)
            self.stmt, self.kont = s.stmts[0], kont
            return None
        if isinstance(s, Assign):
            slots[s.slot] = eval_expr(s.expr, slots, self.arg)
            self.stmt = SKIP
            return None
        if isinstance(s, If):
            c = eval_expr(s.cond, slots, self.arg)
            self.stmt = s.then if c else s.orelse
            return None
        if isinstance(s, CallStore):
            body = self.program.procedure(s.dst, s.proc)
            if body is None:
                raise CallToMissingProcedure(f"{self.cur} calls undefined {s.dst}.{s.proc}")
            v = eval_expr(s.arg, slots, self.arg)
            self.stack.append(Frame(self.cur, self.arg, self.kont))
            src = self.cur
            self.cur, self.stmt, self.kont, self.arg = s.dst, body, None, v
            return call(src, s.dst, s.proc, v) if s.dst != src else None
        if isinstance(s, Return):
            return self._return(eval_expr(s.expr, slots, self.arg))
        if isinstance(s, Exit):
            self.halted = True
            return None
        raise TypeError(f"not a statement: {s!r}")

    def _return(self, v: int) -> Optional[Event]:
        if not self.stack:
            self.halted = True
            return None
        fr = self.stack.pop()
        src = self.cur
        self.cur, self.arg = fr.compartment, fr.saved_arg
        self.mem[self.cur][Slot.RES] = v
        self.stmt, self.kont = SKIP, fr.kont
        return ret(src, fr.compartment, v) if fr.compartment != src else None


def default_bound(total_events: int) -> int:
    return 10 * (1 + total_events) * 4


def run_source(p: SourceProgram, step_bound: int = 100_000,
               on_step: Optional[Callable[[Machine], None]] = None):
    """Run ``p`` from its entry point; return ``(emitted trace, Outcome)``.

    ``on_step`` is called with the machine before every transition.
    """
    emitted = []
    try:
        m = Machine(p)
    except SourceRuntimeError:
        return (), Outcome.STUCK
    steps = 0
    while not m.halted:
        if steps >= step_bound:
            return tuple(emitted), Outcome.BOUND_EXCEEDED
        if on_step:
            on_step(m)
        try:
            e = m.step()
        except SourceRuntimeError:
            return tuple(emitted), Outcome.STUCK
        if e is not None:
            emitted.append(e)
        steps += 1
    return tuple(emitted), Outcome.HALTED
