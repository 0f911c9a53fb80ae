"""Node numbering, stack annotation and flattening into rule tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

from .traces import Event, Kind, Stack, push_pop
from .tree import LevelProgram, Tree


def number_nodes(t: Tree) -> Tree:
    """Replace payloads by pre-order ids, root = 0."""
    counter = itertools.count()

    def go(node: Tree) -> Tree:
        n = next(counter)
        return Tree(n, tuple((e, go(sub)) for e, sub in node.children))

    return go(t)


def unique_ids(t: Tree) -> bool:
    ids = [node_id(n.payload) for n in t.nodes()]
    return len(set(ids)) == len(ids)


def node_id(payload) -> int:
    return payload[0] if isinstance(payload, tuple) else payload


class BracketingError(Exception):
    pass


def annotate_stacks(t: Tree, c: str) -> Tree:
    """Pair every node id with the abstract stack expected on reaching it.

    Every edge of ``c``'s tree involves ``c``, so the snapshots are ``c``'s
    restriction of the global stack.
    """

    def go(node: Tree, st: Stack) -> Tree:
        kids = []
        for e, sub in node.children:
            nxt = push_pop(e, st)
            if nxt is None:
                raise BracketingError(f"{c}: {e} at node {node.payload} does not match {st}")
            kids.append((e, go(sub, nxt)))
        return Tree((node.payload, st), tuple(kids))

    return go(t, ())


@dataclass(frozen=True)
class FlatRule:
    src: int
    event: Event
    dst: int

    def __str__(self):
        return f"{self.src} --{self.event}--> {self.dst}"


def flatten(t: Tree) -> tuple:
    return tuple(FlatRule(node_id(a.payload), e, node_id(b.payload)) for a, e, b in t.edges())


@dataclass(frozen=True)
class RuleTable:
    """The rules of one compartment, never consumed at run time."""

    compartment: str
    rules: tuple

    @property
    def outgoing(self) -> tuple:
        return tuple(r for r in self.rules if r.event.src == self.compartment)

    @property
    def incoming_calls(self) -> tuple:
        return tuple(r for r in self.rules
                     if r.event.dst == self.compartment and r.event.kind is Kind.CALL)

    @property
    def incoming_returns(self) -> tuple:
        return tuple(r for r in self.rules
                     if r.event.dst == self.compartment and r.event.kind is Kind.RET)

    def calls_to(self, proc: str) -> tuple:
        return tuple(r for r in self.incoming_calls if r.event.proc == proc)

    @cached_property
    def index(self) -> dict:
        """(location, event) -> list of target locations."""
        idx: dict = {}
        for r in self.rules:
            idx.setdefault((r.src, r.event), []).append(r.dst)
        return idx

    def lookup(self, loc: int, e: Event) -> list:
        return self.index.get((loc, e), [])

    def __str__(self):
        return "\n".join(str(r) for r in self.rules)


class UniquenessError(Exception):
    def __init__(self, compartment: str, kind: str, key):
        self.compartment = compartment
        self.kind = kind
        self.key = key
        super().__init__(f"{compartment}: several {kind} rules for key {key}")


def _functional(pairs: Iterable[tuple]):
    seen = {}
    for key, val in pairs:
        if seen.setdefault(key, val) != val:
            return key
    return None


def check_flat_uniqueness(tables: Mapping[str, RuleTable]) -> None:
    """Raise :class:`UniquenessError` unless every keyed view is functional.

    Keys: incoming calls by (location, procedure, argument), incoming returns
    by (location, value), outgoing events by location alone.
    """
    for c, tbl in tables.items():
        bad = _functional(((r.src, r.event.proc, r.event.payload), (r.dst, r.event.src))
                          for r in tbl.incoming_calls)
        if bad is not None:
            raise UniquenessError(c, "incoming call", bad)
        bad = _functional(((r.src, r.event.payload), (r.dst, r.event.src))
                          for r in tbl.incoming_returns)
        if bad is not None:
            raise UniquenessError(c, "incoming return", bad)
        bad = _functional((r.src, (r.event, r.dst)) for r in tbl.outgoing)
        if bad is not None:
            raise UniquenessError(c, "outgoing", bad)


def number_program(p: LevelProgram) -> LevelProgram:
    return p.map(lambda c, t: number_nodes(t))


def annotate_program(p: LevelProgram) -> LevelProgram:
    return p.map(lambda c, t: annotate_stacks(t, c))


def flatten_program(p: LevelProgram) -> LevelProgram:
    return p.map(lambda c, t: RuleTable(c, flatten(t)))


def dump_rules(tbl: RuleTable) -> str:
    return str(tbl)
