"""Stable text dumps of the intermediate levels."""

from __future__ import annotations

from .tree import LevelProgram, dump_tree


def _show(level: int):
    if level == 1:
        return lambda p: ""
    if level == 2:
        return lambda p: f"[{p}]"
    return lambda p: f"[{p[0]}] depth={len(p[1])}"


def _entry(level: int, x) -> str:
    if level == 4:
        return str(x) if x.rules else "(no rules)"
    return dump_tree(x, _show(level), 1)


def dump_level(program: LevelProgram, level: int) -> str:
    out = []
    for c, x in sorted(program.context.items()):
        out.append(f"context {c}:")
        out.append(_indent(_entry(level, x), level))
    for i, prog in enumerate(program.programs):
        for c, x in sorted(prog.items()):
            out.append(f"program {c} (trace {i}):")
            out.append(_indent(_entry(level, x), level))
    return "\n".join(out) + "\n"


def _indent(text: str, level: int) -> str:
    if level != 4:
        return text
    return "\n".join("  " + line for line in text.splitlines())
