"""End-to-end and per-level verification, plus random well-formed trace sets."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .codegen import BackTranslation, generate, pipeline
from .passes import BracketingError, UniquenessError, check_flat_uniqueness, unique_ids
from .replay import LEVELS, ReplayState, StepError, initial_state, replay, step
from .source import (EXIT, SKIP, And, Assign, CallStore, Eq, IntConst, Machine, Outcome,
                     ReadArg, ReadVar, Return, SourceProgram, SourceRuntimeError, Slot,
                     default_bound, eval_expr, seq)
from .source import If as IfStmt
from .traces import (Event, TraceSet, WellFormednessError, call, check_well_formed,
                     filter_for_compartment, push_pop, ret, stack_after)
from .tree import deterministic_tree, unique_current_tree


@dataclass
class Report:
    """Outcome of a verification run; ``ok`` iff nothing failed."""

    well_formed: Optional[str] = None          # error message, None when ok
    matrix: dict = field(default_factory=dict)  # (trace, level) -> None or message
    invariants: dict = field(default_factory=dict)  # name -> None or message
    end_to_end: dict = field(default_factory=dict)  # trace -> None or message

    @property
    def ok(self) -> bool:
        return (self.well_formed is None
                and all(v is None for v in self.matrix.values())
                and all(v is None for v in self.invariants.values())
                and all(v is None for v in self.end_to_end.values()))

    def records(self) -> list:
        """One dict per check, for machine consumption."""
        recs = [{"check": "well-formed", "ok": self.well_formed is None,
                 "detail": self.well_formed}]
        for (i, lvl), msg in sorted(self.matrix.items()):
            recs.append({"check": "replay", "trace": i, "level": lvl, "ok": msg is None,
                         "detail": msg})
        for name, msg in self.invariants.items():
            recs.append({"check": "invariant", "name": name, "ok": msg is None, "detail": msg})
        for i, msg in sorted(self.end_to_end.items()):
            recs.append({"check": "end-to-end", "trace": i, "ok": msg is None, "detail": msg})
        return recs

    def render(self) -> str:
        lines = [f"well-formed: {'ok' if self.well_formed is None else self.well_formed}"]
        if self.matrix:
            traces = sorted({i for i, _ in self.matrix})
            levels = sorted({lvl for _, lvl in self.matrix})
            lines.append("trace  " + "  ".join(f"L{lvl}" for lvl in levels))
            for i in traces:
                cells = ["ok" if self.matrix[i, lvl] is None else "XX" for lvl in levels]
                lines.append(f"{i:>5}  " + "  ".join(cells))
            for (i, lvl), msg in sorted(self.matrix.items()):
                if msg is not None:
                    lines.append(f"  trace {i} level {lvl}: {msg}")
        for name, msg in self.invariants.items():
            lines.append(f"{name}: {'ok' if msg is None else msg}")
        for i, msg in sorted(self.end_to_end.items()):
            lines.append(f"end-to-end trace {i}: {'ok' if msg is None else msg}")
        return "\n".join(lines)


def check_invariants(S: TraceSet, levels: dict) -> dict:
    """Structural invariants of every level, each mapped to None or a failure message."""
    out = {}
    l1, l2, l3, l4 = (levels[k] for k in LEVELS)
    out["deterministic_tree"] = next(
        (f"{c} (trace {i})" for i, c, t in l1.items() if not deterministic_tree(t)), None)
    out["unique_current_tree"] = next(
        (c for c, t in l1.context.items() if not unique_current_tree(c, t)), None)
    out["unique_ids"] = next(
        (f"{c} (trace {i})" for i, c, t in l2.items() if not unique_ids(t)), None)
    out["stack_snapshots"] = next(
        (f"{c} (trace {i})" for i, c, t in l3.items() if not snapshots_match_paths(t)), None)
    msg = None
    for tables in (l4.context, *l4.programs):
        try:
            check_flat_uniqueness(tables)
        except UniquenessError as err:
            msg = str(err)
            break
    out["flat_uniqueness"] = msg
    return out


def snapshots_match_paths(t) -> bool:
    """Each node's stack snapshot equals a fresh fold along its root path."""
    def go(node, path) -> bool:
        try:
            expected = stack_after(path)
        except ValueError:
            return False
        if node.payload[1] != expected:
            return False
        return all(go(sub, path + (e,)) for e, sub in node.children)
    return go(t, ())


def verify_all_levels(S: TraceSet) -> Report:
    rep = Report()
    try:
        check_well_formed(S)
    except WellFormednessError as err:
        rep.well_formed = str(err)
        return rep
    try:
        levels = pipeline(S)
    except BracketingError as err:
        rep.invariants["stack_snapshots"] = str(err)
        return rep
    rep.invariants.update(check_invariants(S, levels))
    for i, m in enumerate(S.traces):
        for lvl in LEVELS:
            r = replay(lvl, levels[lvl], i, m)
            rep.matrix[i, lvl] = None if r.ok else str(r)
    return rep


# -- end to end ------------------------------------------------------------

def match_concrete_stacks(c: str, abstract: tuple, frames: list) -> bool:
    """Concrete frames (innermost last) represent the abstract stack (top first).

    Frames of the current compartment are internal and skipped; a frame of
    another compartment ``c2`` must match the abstract top ``(c2, _, c)``,
    after which matching continues from ``c2``.
    """
    k = 0
    for fr in reversed(frames):
        if fr.compartment == c:
            continue
        if k >= len(abstract):
            return False
        caller, _, callee = abstract[k]
        if caller != fr.compartment or callee != c:
            return False
        c = fr.compartment
        k += 1
    return k == len(abstract)


def _guards_firing(switch, mem_slots, arg) -> int:
    n = 0
    while isinstance(switch, IfStmt):
        if eval_expr(switch.cond, mem_slots, arg):
            n += 1
        switch = switch.orelse
    return n


class _LockStep:
    """Follows a source run alongside the level-4 replay of the same trace."""

    def __init__(self, bt: BackTranslation, i: int, m):
        self.code = bt.code(i)
        self.m = m
        self.ghost: ReplayState = initial_state(4, bt.level4, i, m)
        self.consumed = 0
        self.error: Optional[str] = None
        self.switches = {}
        for c, cc in self.code.items():
            for p, sw in cc.call_switches.items():
                if sw is not None and isinstance(sw, IfStmt):
                    self.switches[id(sw)] = "call"
            if isinstance(cc.return_switch, IfStmt):
                self.switches[id(cc.return_switch)] = "return"

    def before_step(self, mach: Machine) -> None:
        if self.error:
            return
        s = mach.stmt
        cc = self.code.get(mach.cur)
        if cc is not None and s is cc.outgoing:
            self._sync(mach)
        elif id(s) in self.switches and self.consumed > 0:
            # an incoming switch right after a traced event must fire exactly once
            last = self.m[self.consumed - 1]
            kind = self.switches[id(s)]
            if last.dst == mach.cur and (kind == "call") == last.is_call:
                n = _guards_firing(s, mach.mem[mach.cur], mach.arg)
                if n != 1:
                    self.error = (f"{kind} switch of {mach.cur} fired {n} branches after "
                                  f"event {self.consumed - 1}")

    def _sync(self, mach: Machine) -> None:
        for c, loc in self.ghost.loc.items():
            if mach.mem[c][Slot.LOC] != loc:
                self.error = (f"after {self.consumed} events {c}.loc = {mach.mem[c][Slot.LOC]}"
                              f" but ghost location is {loc}")
                return
        if not match_concrete_stacks(mach.cur, self.ghost.stack, mach.stack):
            self.error = f"after {self.consumed} events the frame stack does not match the ghost stack"

    def on_event(self, e: Event) -> None:
        if self.error or self.consumed >= len(self.m) or e != self.m[self.consumed]:
            return
        try:
            self.ghost = step(4, self.ghost)
        except StepError as err:
            self.error = f"level-4 replay stuck at {self.consumed}: {err}"
            return
        self.consumed += 1


def run_lockstep(bt: BackTranslation, i: int, m, bound: int):
    """Run the linked program for trace ``i``; return (emitted, outcome, lockstep error)."""
    mach = Machine(bt.whole_program(i))
    ls = _LockStep(bt, i, m)
    emitted = []
    steps = 0
    outcome = Outcome.HALTED
    while not mach.halted:
        if steps >= bound:
            outcome = Outcome.BOUND_EXCEEDED
            break
        ls.before_step(mach)
        try:
            e = mach.step()
        except SourceRuntimeError:
            outcome = Outcome.STUCK
            break
        if e is not None:
            emitted.append(e)
            ls.on_event(e)
            if len(emitted) > len(m):
                break
        steps += 1
    return tuple(emitted), outcome, ls.error


def compare_traces(expected, emitted) -> Optional[str]:
    for k, (a, b) in enumerate(zip(expected, emitted)):
        if a != b:
            return f"position {k}: expected {a}, emitted {b}"
    if len(emitted) > len(expected):
        return f"position {len(expected)}: expected end of trace, emitted {emitted[len(expected)]}"
    if len(emitted) < len(expected):
        return f"position {len(emitted)}: expected {expected[len(emitted)]}, emitted nothing"
    return None


def verify_end_to_end(S: TraceSet, bound: Optional[int] = None) -> Report:
    rep = Report()
    try:
        check_well_formed(S)
    except WellFormednessError as err:
        rep.well_formed = str(err)
        return rep
    levels = pipeline(S)
    try:
        bt = generate(S, levels[4])
    except UniquenessError as err:
        rep.invariants["flat_uniqueness"] = str(err)
        return rep
    if bound is None:
        bound = default_bound(sum(len(m) for m in S.traces))
    for i, m in enumerate(S.traces):
        emitted, outcome, lock_err = run_lockstep(bt, i, m, bound)
        msg = compare_traces(m, emitted)
        if msg is None and outcome is not Outcome.HALTED:
            msg = f"emitted the trace but ended {outcome.value}"
        if msg is None and lock_err:
            msg = lock_err
        rep.end_to_end[i] = msg
    return rep


# -- random well-formed trace sets -------------------------------------------

@dataclass(frozen=True)
class GenParams:
    K: int = 3
    max_len: int = 12
    n_compartments: int = 2
    n_procs: int = 1


def generate_trace_set(seed, params: GenParams = GenParams()) -> TraceSet:
    """A well-formed trace set built by running abstract strategies.

    Context compartments share one deterministic strategy across traces: the
    next action is drawn from an RNG seeded by the compartment's filtered
    history.  Program compartments act freely, with a fresh RNG per trace.
    Call arguments carry the caller's index so incoming calls stay
    distinguishable to the callee.
    """
    rng = random.Random(f"set/{seed}")
    n = max(1, params.n_compartments)
    names = [f"C{k}" for k in range(n)]
    ctx_size = rng.randint(1, n)
    context = frozenset(rng.sample(names, ctx_size))
    programs = frozenset(names) - context
    main = rng.choice(names)
    interface = {c: tuple(f"p{j}" for j in range(rng.randint(1, max(1, params.n_procs))))
                 for c in names}
    traces = []
    for i in range(params.K):
        traces.append(_run_strategies(seed, i, names, context, main, interface, params.max_len))
    return TraceSet(tuple(traces), context, programs, main, interface)


def _choose(r: random.Random, me: str, names, interface, stack, exit_p: float):
    """Pick an action for ``me`` in control: an event or None (stop)."""
    if r.random() < exit_p:
        return None
    can_return = bool(stack)
    if can_return and r.random() < 0.45:
        return ret(me, stack[0][0], r.randint(-1, 3))
    others = [c for c in names if c != me]
    if not others:
        return None
    dst = r.choice(others)
    proc = r.choice(interface[dst])
    return call(me, dst, proc, 10 * names.index(me) + r.randint(0, 3))


def _run_strategies(seed, i, names, context, main, interface, max_len):
    prog_rng = random.Random(f"trace/{seed}/{i}")
    m: list = []
    stack: tuple = ()
    cur = main
    last_program_point = 0 if main not in context else None
    while len(m) < max_len:
        if cur in context:
            hist = filter_for_compartment(m, cur)
            r = random.Random(f"ctx/{seed}/{cur}/{hist!r}")
            local = tuple(f for f in stack if cur in (f[0], f[2]))
            e = _choose(r, cur, names, interface, local, 0.04)
        else:
            e = _choose(prog_rng, cur, names, interface, stack, 0.08)
        if e is None:
            return tuple(m)
        m.append(e)
        stack = push_pop(e, stack)
        cur = e.dst
        if cur not in context:
            last_program_point = len(m)
    # out of budget: stop where a program compartment holds control, so that
    # no context compartment is cut off mid-strategy
    if cur in context and last_program_point is not None:
        return tuple(m[:last_program_point])
    return tuple(m)


def random_params(rng: random.Random, K=8, max_len=32, comps=6, procs=3) -> GenParams:
    return GenParams(K=rng.randint(0, K), max_len=rng.randint(0, max_len),
                     n_compartments=rng.randint(1, comps), n_procs=rng.randint(1, procs))


# -- random source programs --------------------------------------------------

def _random_expr(r: random.Random, depth: int):
    if depth <= 0 or r.random() < 0.4:
        k = r.randrange(3)
        if k == 0:
            return IntConst(r.randint(-5, 50))
        if k == 1:
            return ReadVar(r.choice(list(Slot)))
        return ReadArg()
    op = r.choice((Eq, And))
    return op(_random_expr(r, depth - 1), _random_expr(r, depth - 1))


def _random_stmt(r: random.Random, depth: int, targets):
    k = r.randrange(7 if depth > 0 else 5)
    if k == 0:
        return Assign(r.choice(list(Slot)), _random_expr(r, 2))
    if k == 1:
        c, p = r.choice(targets)
        return CallStore(c, p, _random_expr(r, 1))
    if k == 2:
        return Return(_random_expr(r, 1))
    if k == 3:
        return EXIT if r.random() < 0.5 else SKIP
    if k == 4:
        return Assign(Slot.LOC, _random_expr(r, 1))
    if k == 5:
        return IfStmt(_random_expr(r, 2), _random_stmt(r, depth - 1, targets),
                      _random_stmt(r, depth - 1, targets))
    return seq(*(_random_stmt(r, depth - 1, targets) for _ in range(r.randint(2, 4))))


def random_source_program(seed, n_compartments: int = 3, n_procs: int = 2, depth: int = 3):
    """An arbitrary (not necessarily terminating) closed program in the source language."""
    r = random.Random(f"src/{seed}")
    comps = [f"K{k}" for k in range(r.randint(1, n_compartments))]
    procs = {c: [f"f{j}" for j in range(r.randint(1, n_procs))] for c in comps}
    targets = [(c, p) for c in comps for p in procs[c]]
    body = {c: {p: _random_stmt(r, depth, targets) for p in procs[c]} for c in comps}
    return SourceProgram(body, r.choice(targets))
