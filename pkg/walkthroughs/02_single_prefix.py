# # A single prefix and the counter it needs
#
# With only one prefix, the context never has to choose: it just has to know
# how far along it is.  The generated `loc` slot plays the part of a step
# counter, bumped before every event the context takes part in.

from pathlib import Path

from nanobt import back_translate
from nanobt.source import Machine, Slot
from nanobt.syntax import pretty
from nanobt.tracefile import read_traceset

S = read_traceset(Path(__file__).resolve().parent.parent / "traces" / "single.traces")
m = S.traces[0]
print("prefix:", "; ".join(str(e) for e in m))

bt = back_translate(S)
print(pretty(bt.context_fragment()))


# ## Watching `loc` while the program runs
#
# We step the machine by hand and print C1's memory whenever an event is
# emitted or C1's location moves.  Note the internal call to `_reenter` after
# C2 returns: it is silent, and it is where C1 inspects `res` to decide what
# comes next.

mach = Machine(bt.whole_program(0))
last = None
while not mach.halted:
    e = mach.step()
    loc = mach.mem["C1"][Slot.LOC]
    if e is not None or loc != last:
        depth = len(mach.stack)
        print(f"cur={mach.cur:3} frames={depth} C1.loc={loc} C1.is_call={mach.mem['C1'][Slot.ISCALL]}"
              + (f"   emits {e}" if e else ""))
        last = loc
