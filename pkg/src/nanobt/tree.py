"""Event-labeled call-return trees and their construction from traces."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Generic, Iterator, Mapping, Sequence, TypeVar

from .traces import Event, TraceSet, check_well_formed, filter_for_compartment

A = TypeVar("A")
B = TypeVar("B")


@dataclass(frozen=True)
class Tree(Generic[A]):
    """A node payload plus ordered ``(label, subtree)`` branches."""

    payload: A
    children: tuple = ()

    def child(self, e: Event):
        for label, sub in self.children:
            if label == e:
                return sub
        return None

    def map(self, f: Callable[[A], B]) -> "Tree[B]":
        return Tree(f(self.payload), tuple((e, t.map(f)) for e, t in self.children))

    def nodes(self) -> Iterator["Tree[A]"]:
        """Pre-order traversal."""
        yield self
        for _, sub in self.children:
            yield from sub.nodes()

    def edges(self) -> Iterator[tuple]:
        """Pre-order ``(parent, label, child)`` triples."""
        for e, sub in self.children:
            yield self, e, sub
            yield from sub.edges()

    def paths(self) -> Iterator[tuple]:
        """Label sequences of every root path, the empty one included."""
        yield ()
        for e, sub in self.children:
            for p in sub.paths():
                yield (e,) + p

    def size(self) -> int:
        return sum(1 for _ in self.nodes())

    def depth(self) -> int:
        """Edges on the longest root path."""
        return max((1 + sub.depth() for _, sub in self.children), default=0)

    def is_linear(self) -> bool:
        return all(len(n.children) <= 1 for n in self.nodes())


LEAF: Tree = Tree(None)


def leaf() -> Tree:
    return LEAF


def branch_of_trace(m: Sequence[Event]) -> Tree:
    t = LEAF
    for e in reversed(m):
        t = Tree(None, ((e, t),))
    return t


def add_trace_to_tree(m: Sequence[Event], t: Tree) -> Tree:
    if not m:
        return t
    return Tree(t.payload, _add_to_branches(m[0], m[1:], t.children))


def _add_to_branches(e: Event, rest: Sequence[Event], br: tuple) -> tuple:
    for k, (label, sub) in enumerate(br):
        if label == e:
            return br[:k] + ((label, add_trace_to_tree(rest, sub)),) + br[k + 1:]
    return br + ((e, branch_of_trace(rest)),)


def tree_of_trace_list(ms: Sequence[Sequence[Event]]) -> Tree:
    t = LEAF
    for m in ms:
        t = add_trace_to_tree(m, t)
    return t


def unique_current_tree(c: str, t: Tree) -> bool:
    # a branch sourced at c must be the last sibling
    for node in t.nodes():
        br = node.children
        for k, (e, _) in enumerate(br):
            if e.src == c and k != len(br) - 1:
                return False
    return True


def deterministic_tree(t: Tree) -> bool:
    for node in t.nodes():
        labels = [e for e, _ in node.children]
        if len(set(labels)) != len(labels):
            return False
    return True


@dataclass(frozen=True)
class LevelProgram(Generic[A]):
    """Per-compartment code at one pipeline level.

    ``context`` maps every context compartment to one object shared by all
    traces; ``programs[i]`` maps the program compartments for trace ``i``.
    At levels 1-3 the objects are trees, at level 4 rule tables.
    """

    context: Mapping[str, A]
    programs: tuple

    def view(self, i: int) -> dict:
        merged = dict(self.context)
        merged.update(self.programs[i])
        return merged

    def map(self, f: Callable[[str, A], B]) -> "LevelProgram[B]":
        return LevelProgram(
            {c: f(c, x) for c, x in self.context.items()},
            tuple({c: f(c, x) for c, x in prog.items()} for prog in self.programs),
        )

    def items(self) -> Iterator[tuple]:
        """``(trace index or None, compartment, object)`` for every entry."""
        for c, x in self.context.items():
            yield None, c, x
        for i, prog in enumerate(self.programs):
            for c, x in prog.items():
                yield i, c, x


def build_level1(S: TraceSet) -> LevelProgram:
    """Merged trees for context compartments, linear trees for program ones."""
    check_well_formed(S)
    context = {
        c: tree_of_trace_list([filter_for_compartment(m, c) for m in S.traces])
        for c in sorted(S.context)
    }
    programs = tuple(
        {c: branch_of_trace(filter_for_compartment(m, c)) for c in sorted(S.programs)}
        for m in S.traces
    )
    return LevelProgram(context, programs)


def dump_tree(t: Tree, show: Callable = lambda p: "", indent: int = 0) -> str:
    """Indented outline, one branch per line: label then child payload."""
    lines = []
    root = show(t.payload)
    lines.append("  " * indent + (root if root else "*"))
    _dump(t, show, indent + 1, lines)
    return "\n".join(lines)


def _dump(t: Tree, show, indent: int, lines: list) -> None:
    for e, sub in t.children:
        p = show(sub.payload)
        lines.append("  " * indent + str(e) + (f"  {p}" if p else ""))
        _dump(sub, show, indent + 1, lines)
