# # Random trace sets
#
# Hand-written examples only go so far.  The harness can generate well-formed
# trace sets by running random strategies: context compartments share one
# strategy per compartment, picked as a function of what they have seen, while
# program compartments act freely in each trace.

import random
import time
from collections import Counter

from nanobt import GenParams, generate_trace_set, verify_all_levels, verify_end_to_end
from nanobt.codegen import pipeline
from nanobt.harness import random_params
from nanobt.traces import TraceSet, call, is_well_formed, ret
from nanobt.tracefile import format_traceset

S = generate_trace_set(11, GenParams(K=3, max_len=10, n_compartments=3, n_procs=2))
print(format_traceset(S))


# ## A small corpus
#
# Same bounds as the acceptance run: up to 8 traces of up to 32 events over up
# to 6 compartments with up to 3 procedures each.

t0 = time.perf_counter()
stats = Counter()
for seed in range(300):
    S = generate_trace_set(seed, random_params(random.Random(f"params/{seed}")))
    ok = verify_all_levels(S).ok and verify_end_to_end(S).ok
    stats["ok" if ok else "failed"] += 1
    l1 = pipeline(S)[1]
    if any(len(n.children) > 1 for t in l1.context.values() for n in t.nodes()):
        stats["context tree branches"] += 1
    if len(S.compartments) >= 3:
        stats["3+ compartments"] += 1
print(dict(stats), f"in {time.perf_counter() - t0:.1f}s")


# ## Breaking determinacy on purpose
#
# Program moves may differ freely between traces, but a context move is pinned
# down by what the context has seen.  Changing the payload of a context move is
# harmless when no other trace shares its history, and is rejected up front,
# before any code is generated, when one does.

S = generate_trace_set(4, GenParams(K=6, max_len=16, n_compartments=2))
tally = Counter()
shown = False
for i, m in enumerate(S.traces):
    for k, e in enumerate(m):
        if e.src not in S.context:
            continue
        z = e.payload + 1
        e2 = call(e.src, e.dst, e.proc, z) if e.is_call else ret(e.src, e.dst, z)
        T = TraceSet(S.traces[:i] + (m[:k] + (e2,) + m[k + 1:],) + S.traces[i + 1:],
                     S.context, S.programs, S.main, S.interface)
        rep = verify_end_to_end(T)
        if is_well_formed(T):
            tally["still well-formed, and reproduced" if rep.ok else "BROKEN"] += 1
        else:
            tally["rejected"] += 1
            if not shown:
                print(f"trace {i} position {k}: {e} -> {z}: {rep.well_formed}")
                shown = True
print(dict(tally))
