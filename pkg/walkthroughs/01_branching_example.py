# # From three trace prefixes to one context
#
# One context compartment C_C is linked against three different programs C_P.
# All three runs start with the same call from C_C; after that C_P behaves
# differently each time.  We want a single piece of C_C code that, linked with
# a suitable program, reproduces each prefix exactly.

from pathlib import Path

from nanobt import back_translate, pipeline, verify_all_levels, verify_end_to_end
from nanobt.dumps import dump_level
from nanobt.source import run_source
from nanobt.syntax import pretty
from nanobt.tracefile import read_traceset

HERE = Path(__file__).resolve().parent
S = read_traceset(HERE.parent / "traces" / "branching.traces")

for i, m in enumerate(S.traces):
    print(f"m{i + 1}:", "; ".join(str(e) for e in m))


# ## Level 1: one tree per compartment
#
# C_C's view of the three prefixes is merged into a single tree.  It only
# branches after "call C_C -> C_P.p (40)", where C_P holds control, which is
# exactly what lets one deterministic C_C serve all three runs.

levels = pipeline(S)
print(dump_level(levels[1], 1))


# ## Level 2: node numbers
#
# Pre-order numbering, root 0.  These numbers become the values of the `loc`
# variable in the generated code.

print(dump_level(levels[2], 2))


# ## Level 3: stack snapshots
#
# Each node also records the cross-compartment stack expected when control
# reaches it; here we only print its depth.

print(dump_level(levels[3], 3))


# ## Level 4: flat rules
#
# The trees become lists of (loc, event, loc') rules, which are never consumed
# at run time: location bookkeeping replaces the shrinking trees.

print(dump_level(levels[4], 4))


# ## Every level replays every prefix

rep = verify_all_levels(S)
print(rep.render())


# ## The generated context
#
# Each procedure first reacts to how control came in (a call checks `loc` and
# `arg`, a resumed return checks `loc` and `res`), then performs the single
# event prescribed by the new `loc`, or exits.

bt = back_translate(S)
print(pretty(bt.context_fragment()))


# ## Linking and running
#
# Linking the context with the i-th generated program emits m_i exactly, then
# halts.

for i in range(len(S)):
    trace, outcome = run_source(bt.whole_program(i))
    print(f"program {i}: {outcome.value}:", "; ".join(str(e) for e in trace))

print(verify_end_to_end(S).render())
