"""Concrete syntax for source programs.

    main C.p;
    comp C {
      proc p(arg) {
        if ((loc = 1) && (arg = 41)) { loc = 2; } else { skip; }
        res = call D.q(40);
        return res;
      }
    }
"""

from __future__ import annotations

import re

from .source import (EXIT, SKIP, And, Assign, CallStore, Eq, Exit, If, IntConst,
                     ReadArg, ReadVar, Return, Seq, Skip, Slot, SourceProgram, seq)
from .traces import INT64_MAX, INT64_MIN

INDENT = "  "


def pretty_expr(e) -> str:
    if isinstance(e, IntConst):
        return str(e.value)
    if isinstance(e, ReadVar):
        return e.slot.text
    if isinstance(e, ReadArg):
        return "arg"
    if isinstance(e, Eq):
        return f"{_operand(e.left)} = {_operand(e.right)}"
    if isinstance(e, And):
        return f"{_operand(e.left)} && {_operand(e.right)}"
    raise TypeError(e)


def _operand(e) -> str:
    s = pretty_expr(e)
    return f"({s})" if isinstance(e, (Eq, And)) else s


def _pretty_stmt(s, depth: int, out: list) -> None:
    pad = INDENT * depth
    if isinstance(s, Seq):
        for sub in s.stmts:
            _pretty_stmt(sub, depth, out)
    elif isinstance(s, Assign):
        out.append(f"{pad}{s.slot.text} = {pretty_expr(s.expr)};")
    elif isinstance(s, CallStore):
        out.append(f"{pad}res = call {s.dst}.{s.proc}({pretty_expr(s.arg)});")
    elif isinstance(s, Return):
        out.append(f"{pad}return {pretty_expr(s.expr)};")
    elif isinstance(s, Exit):
        out.append(f"{pad}exit;")
    elif isinstance(s, Skip):
        out.append(f"{pad}skip;")
    elif isinstance(s, If):
        out.append(f"{pad}if ({pretty_expr(s.cond)}) {{")
        _pretty_stmt(s.then, depth + 1, out)
        out.append(f"{pad}}} else {{")
        _pretty_stmt(s.orelse, depth + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(s)


def pretty_stmt(s, depth: int = 0) -> str:
    out: list = []
    _pretty_stmt(s, depth, out)
    return "\n".join(out)


def pretty(p: SourceProgram) -> str:
    out = []
    if p.main is not None:
        out.append(f"main {p.main[0]}.{p.main[1]};")
    for c, procs in p.compartments.items():
        out.append(f"comp {c} {{")
        for name, body in procs.items():
            out.append(f"{INDENT}proc {name}(arg) {{")
            _pretty_stmt(body, 2, out)
            out.append(f"{INDENT}}}")
        out.append("}")
    return "\n".join(out) + "\n"


# -- parsing ---------------------------------------------------------------

class ParseError(Exception):
    def __init__(self, msg: str, line: int, col: int):
        self.line, self.col = line, col
        super().__init__(f"{line}:{col}: {msg}")


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|[{}();=.])
""", re.VERBOSE)

_SLOTS = {"loc": Slot.LOC, "is_call": Slot.ISCALL, "res": Slot.RES}
KEYWORDS = {"comp", "proc", "if", "else", "return", "exit", "skip", "call", "arg"} | set(_SLOTS)


def tokenize(text: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append((kind, m.group(), line, pos - line_start + 1))
        for k, ch in enumerate(m.group()):
            if ch == "\n":
                line, line_start = line + 1, pos + k + 1
        pos = m.end()
    toks.append(("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str):
        _, val, line, col = self.peek()
        raise ParseError(f"{msg}, found {val!r}" if val else f"{msg}, found end of input", line, col)

    def accept(self, val: str) -> bool:
        if self.peek()[1] == val and self.peek()[0] != "eof":
            self.i += 1
            return True
        return False

    def expect(self, val: str):
        if not self.accept(val):
            self.error(f"expected {val!r}")

    def name(self) -> str:
        kind, val, _, _ = self.peek()
        if kind != "ident" or val in KEYWORDS:
            self.error("expected a name")
        self.i += 1
        return val

    def program(self) -> SourceProgram:
        main = None
        # "main" is only special as the leading header
        if self.peek()[1] == "main" and self.peek(1)[0] == "ident":
            self.i += 1
            c = self.name()
            self.expect(".")
            main = (c, self.name())
            self.expect(";")
        comps: dict = {}
        while self.peek()[0] != "eof":
            line, col = self.peek()[2:]
            self.expect("comp")
            c = self.name()
            if c in comps:
                raise ParseError(f"compartment {c} defined twice", line, col)
            self.expect("{")
            procs: dict = {}
            while not self.accept("}"):
                line, col = self.peek()[2:]
                self.expect("proc")
                p = self.name()
                if p in procs:
                    raise ParseError(f"procedure {c}.{p} defined twice", line, col)
                self.expect("(")
                self.expect("arg")
                self.expect(")")
                procs[p] = self.block()
            comps[c] = procs
        return SourceProgram(comps, main)

    def block(self):
        self.expect("{")
        stmts = []
        while not self.accept("}"):
            stmts.append(self.stmt())
        return seq(*stmts)

    def stmt(self):
        kind, val, line, col = self.peek()
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            self.expect("else")
            return If(cond, then, self.block())
        if self.accept("return"):
            e = self.expr()
            self.expect(";")
            return Return(e)
        if self.accept("exit"):
            self.expect(";")
            return EXIT
        if self.accept("skip"):
            self.expect(";")
            return SKIP
        if val in _SLOTS and kind == "ident":
            self.i += 1
            self.expect("=")
            if val == "res" and self.accept("call"):
                d = self.name()
                self.expect(".")
                p = self.name()
                self.expect("(")
                e = self.expr()
                self.expect(")")
                self.expect(";")
                return CallStore(d, p, e)
            e = self.expr()
            self.expect(";")
            return Assign(_SLOTS[val], e)
        self.error("expected a statement")

    def expr(self):
        e = self.comparison()
        while self.accept("&&"):
            e = And(e, self.comparison())
        return e

    def comparison(self):
        e = self.atom()
        while self.peek()[1] == "=" and self.peek()[0] == "op":
            self.i += 1
            e = Eq(e, self.atom())
        return e

    def atom(self):
        kind, val, line, col = self.peek()
        if kind == "int":
            v = int(val)
            if not INT64_MIN <= v <= INT64_MAX:
                raise ParseError(f"integer {val} does not fit in 64 bits", line, col)
            self.i += 1
            return IntConst(v)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("arg"):
            return ReadArg()
        if kind == "ident" and val in _SLOTS:
            self.i += 1
            return ReadVar(_SLOTS[val])
        self.error("expected an expression")


def parse(text: str) -> SourceProgram:
    return _Parser(text).program()


def parse_stmt(text: str):
    p = _Parser(text)
    s = p.stmt()
    stmts = [s]
    while p.peek()[0] != "eof":
        stmts.append(p.stmt())
    return seq(*stmts)
