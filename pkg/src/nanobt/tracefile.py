"""Reading and writing trace-set files.

    # two compartments, three traces
    context C_C: main
    program C_P: p
    main C_C

    trace
    call C_C -> C_P.p (40)
    ret C_P -> C_C (43)

    trace
    ...

Header lines declare every compartment with its role and procedure list,
then the main compartment.  Each ``trace`` line opens a new (possibly empty)
trace; the events follow, one per line.
"""

from __future__ import annotations

import re

from .codegen import INTERNAL_PROC
from .syntax import KEYWORDS
from .traces import TraceSet, call, ret

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_DECL = re.compile(rf"(context|program)\s+({_NAME})\s*:\s*(.*)$")
_MAIN = re.compile(rf"main\s+({_NAME})$")
_CALL = re.compile(rf"call\s+({_NAME})\s*->\s*({_NAME})\.({_NAME})\s*\(\s*(-?\d+)\s*\)$")
_RET = re.compile(rf"ret\s+({_NAME})\s*->\s*({_NAME})\s*\(\s*(-?\d+)\s*\)$")
_IDENT = re.compile(rf"{_NAME}$")


class TraceFileError(Exception):
    def __init__(self, line: int, msg: str):
        self.line = line
        super().__init__(f"line {line}: {msg}")


def _check_name(name: str, lineno: int, what: str) -> None:
    if not _IDENT.match(name) or name in KEYWORDS or name == INTERNAL_PROC:
        raise TraceFileError(lineno, f"invalid {what} name {name!r}")


def parse_traceset(text: str) -> TraceSet:
    roles: dict = {}
    interface: dict = {}
    main = None
    traces: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "trace":
            traces.append([])
            continue
        if not traces:
            m = _DECL.match(line)
            if m:
                role, c, procs = m.groups()
                _check_name(c, lineno, "compartment")
                if c in roles:
                    raise TraceFileError(lineno, f"compartment {c} declared twice")
                names = procs.split()
                for p in names:
                    _check_name(p, lineno, "procedure")
                if len(set(names)) != len(names):
                    raise TraceFileError(lineno, f"duplicate procedure in {c}")
                roles[c] = role
                interface[c] = tuple(names)
                continue
            m = _MAIN.match(line)
            if m:
                if main is not None:
                    raise TraceFileError(lineno, "main declared twice")
                main = m.group(1)
                if main not in roles:
                    raise TraceFileError(lineno, f"main compartment {main} is not declared")
                continue
            raise TraceFileError(lineno, f"expected a declaration or 'trace', got {line!r}")
        m = _CALL.match(line)
        if m:
            src, dst, proc, z = m.groups()
            _declared(roles, lineno, src, dst)
            if proc not in interface[dst]:
                raise TraceFileError(lineno, f"{dst} does not declare procedure {proc}")
            traces[-1].append(_event(lineno, call, src, dst, proc, int(z)))
            continue
        m = _RET.match(line)
        if m:
            src, dst, z = m.groups()
            _declared(roles, lineno, src, dst)
            traces[-1].append(_event(lineno, ret, src, dst, int(z)))
            continue
        raise TraceFileError(lineno, f"cannot parse event {line!r}")
    if main is None:
        raise TraceFileError(0, "missing 'main' declaration")
    return TraceSet(
        traces=tuple(tuple(m) for m in traces),
        context=frozenset(c for c, r in roles.items() if r == "context"),
        programs=frozenset(c for c, r in roles.items() if r == "program"),
        main=main,
        interface=interface,
    )


def _declared(roles: dict, lineno: int, *names: str) -> None:
    for c in names:
        if c not in roles:
            raise TraceFileError(lineno, f"undeclared compartment {c}")


def _event(lineno: int, make, *args):
    try:
        return make(*args)
    except ValueError as err:
        raise TraceFileError(lineno, str(err)) from None


def format_traceset(S: TraceSet) -> str:
    out = []
    for c in sorted(S.compartments):
        role = "context" if c in S.context else "program"
        out.append(f"{role} {c}: {' '.join(S.interface[c])}".rstrip())
    out.append(f"main {S.main}")
    for m in S.traces:
        out.append("")
        out.append("trace")
        out.extend(str(e) for e in m)
    return "\n".join(out) + "\n"


def read_traceset(path) -> TraceSet:
    with open(path) as fh:
        return parse_traceset(fh.read())
