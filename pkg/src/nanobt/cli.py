"""Command-line entry point: ``nanobt check|build|run|verify|fuzz``."""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .codegen import generate, pipeline
from .dumps import dump_level
from .harness import generate_trace_set, random_params, verify_all_levels, verify_end_to_end
from .source import Outcome, default_bound, link, run_source
from .syntax import ParseError, parse, pretty
from .tracefile import TraceFileError, read_traceset
from .traces import WellFormednessError, check_well_formed


def _load(path):
    try:
        return read_traceset(path)
    except (TraceFileError, ValueError) as err:
        raise SystemExit(f"{path}: {err}")


def cmd_check(args) -> int:
    S = _load(args.traceset)
    try:
        check_well_formed(S)
    except WellFormednessError as err:
        print(err)
        return 1
    print(f"ok: {len(S)} traces, {len(S.compartments)} compartments")
    return 0


def cmd_build(args) -> int:
    S = _load(args.traceset)
    try:
        levels = pipeline(S)
    except WellFormednessError as err:
        print(err, file=sys.stderr)
        return 1
    if args.dump_level:
        sys.stdout.write(dump_level(levels[args.dump_level], args.dump_level))
    bt = generate(S, levels[4])
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "context.src").write_text(pretty(bt.context_fragment()))
        for i in range(len(S)):
            (out / f"program_{i}.src").write_text(pretty(bt.program_fragment(i)))
    elif not args.dump_level:
        sys.stdout.write(pretty(bt.context_fragment()))
    return 0


def cmd_run(args) -> int:
    parts = []
    for path in args.program:
        try:
            parts.append(parse(Path(path).read_text()))
        except ParseError as err:
            raise SystemExit(f"{path}:{err}")
    try:
        prog = link(*parts)
    except ValueError as err:
        raise SystemExit(str(err))
    trace, outcome = run_source(prog, args.bound)
    for e in trace:
        print(e)
    if outcome is not Outcome.HALTED:
        print(f"run ended: {outcome.value}", file=sys.stderr)
        return 1
    return 0


def cmd_verify(args) -> int:
    S = _load(args.traceset)
    both = not (args.levels or args.end_to_end)
    reports = []
    if args.levels or both:
        reports.append(verify_all_levels(S))
    if args.end_to_end or both:
        reports.append(verify_end_to_end(S, args.bound))
    if args.json:
        print(json.dumps([r for rep in reports for r in rep.records()], indent=1))
    else:
        print("\n".join(rep.render() for rep in reports))
    return 0 if all(rep.ok for rep in reports) else 1


def _fuzz_one(job):
    seed, bounds = job
    S = generate_trace_set(seed, random_params(random.Random(f"params/{seed}"), **bounds))
    reps = (verify_all_levels(S), verify_end_to_end(S))
    ok = all(r.ok for r in reps)
    return {"seed": seed, "ok": ok, "traces": len(S),
            "events": sum(len(m) for m in S.traces),
            "failures": [] if ok else [r for rep in reps for r in rep.records() if not r["ok"]]}


def cmd_fuzz(args) -> int:
    bounds = dict(K=args.K, max_len=args.len, comps=args.comps, procs=args.procs)
    jobs = [(s, bounds) for s in range(args.start, args.start + args.seeds)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            results = list(ex.map(_fuzz_one, jobs, chunksize=16))
    else:
        results = [_fuzz_one(j) for j in jobs]
    failed = [r for r in results if not r["ok"]]
    if args.json:
        print(json.dumps(results, indent=1))
    else:
        for r in failed:
            print(f"seed {r['seed']}: FAIL {r['failures'][0]}")
        print(f"{len(results) - len(failed)}/{len(results)} seeds ok")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nanobt", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="check a trace-set file for well-formedness")
    p.add_argument("traceset")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("build", help="back-translate a trace set")
    p.add_argument("traceset")
    p.add_argument("-o", "--output", help="directory for context.src and program_<i>.src")
    p.add_argument("--dump-level", type=int, choices=(1, 2, 3, 4))
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("run", help="link and run source files, printing the emitted trace")
    p.add_argument("program", nargs="+")
    p.add_argument("--bound", type=int, default=default_bound(10_000))
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="replay every level and/or run the generated programs")
    p.add_argument("traceset")
    p.add_argument("--levels", action="store_true")
    p.add_argument("--end-to-end", action="store_true")
    p.add_argument("--bound", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("fuzz", help="verify random well-formed trace sets")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--K", type=int, default=8, help="max traces per set")
    p.add_argument("--len", type=int, default=32, help="max events per trace")
    p.add_argument("--comps", type=int, default=6, help="max compartments")
    p.add_argument("--procs", type=int, default=3, help="max procedures per compartment")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_fuzz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
