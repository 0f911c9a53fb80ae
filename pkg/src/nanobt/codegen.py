"""Code generation from flat rule tables, and the whole back-translation.

Every generated procedure has the same shape: react to how control came back
(incoming call: update ``loc`` from ``loc``/``arg``; resumed after an outgoing
call: update ``loc`` from ``loc``/``res``), then perform the one event the new
location prescribes, or exit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .passes import (RuleTable, annotate_program, check_flat_uniqueness, flatten_program,
                     number_program)
from .source import (EXIT, SKIP, And, Assign, CallStore, Eq, If, IntConst, ReadArg, ReadVar,
                     Return, Slot, SourceProgram, link, seq)
from .traces import TraceSet
from .tree import LevelProgram, build_level1

# Re-entry point used after an outgoing call returns; never declared by users.
INTERNAL_PROC = "_reenter"

LOC = ReadVar(Slot.LOC)
ISCALL = ReadVar(Slot.ISCALL)
RES = ReadVar(Slot.RES)


def _cascade(arms: Sequence[tuple], default):
    out = default
    for cond, body in reversed(arms):
        out = If(cond, body, out)
    return out


def gen_incoming_call_switch(c: str, proc: str, rules: Sequence) -> object:
    arms = [(And(Eq(LOC, IntConst(r.src)), Eq(ReadArg(), IntConst(r.event.payload))),
             Assign(Slot.LOC, IntConst(r.dst)))
            for r in rules if r.event.proc == proc and r.event.dst == c]
    return _cascade(arms, SKIP)


def gen_incoming_return_switch(c: str, rules: Sequence) -> object:
    arms = [(And(Eq(LOC, IntConst(r.src)), Eq(RES, IntConst(r.event.payload))),
             Assign(Slot.LOC, IntConst(r.dst)))
            for r in rules]
    return _cascade(arms, SKIP)


def outgoing_arm(c: str, rule) -> object:
    e = rule.event
    if e.is_call:
        return seq(Assign(Slot.ISCALL, IntConst(1)),
                   Assign(Slot.LOC, IntConst(rule.dst)),
                   CallStore(e.dst, e.proc, IntConst(e.payload)),
                   Assign(Slot.ISCALL, IntConst(0)),
                   CallStore(c, INTERNAL_PROC, IntConst(0)),
                   Return(RES))
    return seq(Assign(Slot.ISCALL, IntConst(1)),
               Assign(Slot.LOC, IntConst(rule.dst)),
               Return(IntConst(e.payload)))


def switch_outgoing(c: str, rules: Sequence, default=EXIT) -> object:
    return _cascade([(Eq(LOC, IntConst(r.src)), outgoing_arm(c, r)) for r in rules], default)


@dataclass(frozen=True)
class CompartmentCode:
    """Generated procedures of one compartment plus its shared switches.

    ``outgoing`` is the very object placed at the tail of every body, so an
    interpreter can recognise the synchronisation point by identity.
    """

    procedures: dict
    outgoing: object
    call_switches: dict
    return_switch: object


def gen_compartment(c: str, table: RuleTable, procs: Sequence[str]) -> CompartmentCode:
    ret_switch = gen_incoming_return_switch(c, table.incoming_returns)
    out_switch = switch_outgoing(c, table.outgoing, EXIT)
    bodies, call_switches = {}, {}
    for p in tuple(procs) + (INTERNAL_PROC,):
        cs = SKIP if p == INTERNAL_PROC else gen_incoming_call_switch(c, p, table.incoming_calls)
        call_switches[p] = cs
        bodies[p] = seq(If(ISCALL, cs, ret_switch), out_switch)
    return CompartmentCode(bodies, out_switch, call_switches, ret_switch)


@dataclass(frozen=True)
class BackTranslation:
    """The shared context code and one program fragment per trace."""

    context: dict       # compartment -> CompartmentCode
    programs: tuple     # per trace: compartment -> CompartmentCode
    main: tuple         # (compartment, procedure) entry point
    level4: LevelProgram

    def context_fragment(self) -> SourceProgram:
        return SourceProgram({c: cc.procedures for c, cc in self.context.items()}, self.main)

    def program_fragment(self, i: int) -> SourceProgram:
        return SourceProgram({c: cc.procedures for c, cc in self.programs[i].items()}, self.main)

    def whole_program(self, i: int) -> SourceProgram:
        return link(self.context_fragment(), self.program_fragment(i))

    def code(self, i: int) -> dict:
        merged = dict(self.context)
        merged.update(self.programs[i])
        return merged


def pipeline(S: TraceSet) -> dict:
    """All intermediate levels, keyed 1-4."""
    l1 = build_level1(S)
    l2 = number_program(l1)
    l3 = annotate_program(l2)
    l4 = flatten_program(l3)
    return {1: l1, 2: l2, 3: l3, 4: l4}


def entry_point(S: TraceSet) -> tuple:
    return (S.main, S.main_procedure() or INTERNAL_PROC)


def generate(S: TraceSet, l4: LevelProgram) -> BackTranslation:
    check_flat_uniqueness(l4.context)
    for prog in l4.programs:
        check_flat_uniqueness(prog)
    context = {c: gen_compartment(c, tbl, S.interface[c]) for c, tbl in l4.context.items()}
    programs = tuple({c: gen_compartment(c, tbl, S.interface[c]) for c, tbl in prog.items()}
                     for prog in l4.programs)
    return BackTranslation(context, programs, entry_point(S), l4)


def back_translate(S: TraceSet) -> BackTranslation:
    """Run passes (a)-(d) and generate code for every compartment."""
    return generate(S, pipeline(S)[4])
