"""``matround`` command line.

Exit codes: 0 success, 2 infeasible (or not partitionable), 1 for schema
errors, failed verification and internal errors.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from matround.errors import GroundTooLarge, LoadViolation, MatroundError, NotPartitionable
from matround.harness import brute
from matround.harness.io import InstanceError, dumps, load_instance, parse_partition_request
from matround.harness.pipeline import solve, verify_report
from matround.intersection import partition
from matround.lp import set_separation_cap
from matround.rounding import FAULT_ENV

EXIT_OK, EXIT_FAIL, EXIT_INFEASIBLE = 0, 1, 2


def _err(msg: str) -> None:
    print(f"matround: {msg}", file=sys.stderr)


def _emit(doc: dict, out: str | None) -> None:
    text = dumps(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    try:
        return load_instance(path)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: malformed JSON: {exc}") from None


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    if args.problem and inst.problem != args.problem:
        raise InstanceError(f"expected a {args.problem} instance, got {inst.problem}")
    out = solve(inst, check=not args.no_check, with_trace=args.trace)
    report = out.report
    if args.oracle:
        best, value = brute.brute_force_opt(inst)
        lp = brute.materialized_lp_value(inst)
        report["oracle"] = {
            "brute_force_solution": None if best is None else sorted(best),
            "brute_force_value": None if value is None else str(value),
            "written_out_lp": None if lp is None else str(lp),
        }
    fails = verify_report(inst, report)
    if fails:
        for f in fails:
            _err(f"verification failed: {f}")
        return EXIT_FAIL
    _emit(report, args.out)
    return EXIT_INFEASIBLE if report["status"] == "infeasible" else EXIT_OK


def cmd_verify(args) -> int:
    inst = _load(args.instance)
    try:
        report = json.loads(Path(args.report).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{args.report}: malformed JSON: {exc}") from None
    fails = verify_report(inst, report)
    for f in fails:
        print(f"FAIL {f}")
    if not fails:
        print("OK")
    return EXIT_FAIL if fails else EXIT_OK


def cmd_gen(args) -> int:
    from matround.harness.generators import FAMILIES, gen_fractional, gen_gmdst, gen_random

    mix = tuple(args.mix.split(",")) if args.mix else FAMILIES
    unknown = set(mix) - set(FAMILIES)
    if unknown:
        raise InstanceError(f"unknown families {sorted(unknown)}")
    if args.problem == "round" and args.t:
        raise InstanceError("knapsack rows need --problem round-knapsack")

    def make(seed):
        if args.problem == "gmdst":
            return gen_gmdst(seed, max_vertices=min(7, args.size), k=min(args.k, 3))
        if args.fractional:
            return gen_fractional(seed, size=args.size, k=args.k, t=args.t, problem=args.problem)
        return gen_random(seed, size=args.size, k=args.k, t=args.t, mix=mix, problem=args.problem)

    if args.count == 1:
        _emit(make(args.seed), args.out)
        return EXIT_OK
    if not args.out:
        raise InstanceError("--count > 1 needs --out DIR")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for seed in range(args.seed, args.seed + args.count):
        (outdir / f"instance-{seed}.json").write_text(dumps(make(seed)))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from matround.harness.acceptance import run_all

    only = {int(x) for x in args.only.split(",")} if args.only else None
    saved = os.environ.get(FAULT_ENV)
    if args.inject_fault:
        os.environ[FAULT_ENV] = "round-half-up"
    try:
        results = run_all(count=args.count, seed=args.seed, size=args.size, workers=args.workers, only=only)
    finally:
        if saved is None:
            os.environ.pop(FAULT_ENV, None)
        else:
            os.environ[FAULT_ENV] = saved
    first = None
    for r in results:
        print(r.line())
        for key, value in r.stats.items():
            print(f"      {key}: {value}")
        if r.failures and first is None:
            first = (r, r.failures[0])
    if first is not None:
        r, (seed, msg) = first
        _err(f"criterion {r.number} failed at seed {seed}: {msg}")
        return EXIT_FAIL
    print(f"all {len(results)} criteria passed")
    return EXIT_OK


def cmd_intersect2(args) -> int:
    args.problem = "intersect2"
    args.oracle = False
    args.no_check = False
    args.trace = False
    return cmd_solve(args)


def cmd_partition(args) -> int:
    try:
        doc = json.loads(Path(args.request).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{args.request}: malformed JSON: {exc}") from None
    M, S, q = parse_partition_request(doc)
    if args.q is not None:
        q = args.q
    try:
        cert = partition(M, S, q)
    except NotPartitionable as exc:
        _emit({"status": "not-partitionable", "q": q, "element": exc.element}, args.out)
        return EXIT_INFEASIBLE
    probs = cert.problems(M, S, q)
    if probs:
        for p in probs:
            _err(f"verification failed: {p}")
        return EXIT_FAIL
    _emit({"status": "ok", "q": q, "parts": [sorted(p) for p in cert.parts]}, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matround", description="Matroid-constrained rounding with exact certificates.")
    p.add_argument("--sep-cap", type=int, default=None, help="largest ground set for exhaustive separation (default 22)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance file and write a verified report")
    s.add_argument("instance")
    s.add_argument("--out")
    s.add_argument("--trace", action="store_true", help="include the full event trace")
    s.add_argument("--oracle", action="store_true", help="add brute-force and written-out LP values")
    s.add_argument("--no-check", action="store_true", help="skip the per-step soundness assertions")
    s.set_defaults(func=cmd_solve, problem=None)

    v = sub.add_parser("verify", help="re-check a report against its instance")
    v.add_argument("instance")
    v.add_argument("report")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("gen", help="write seeded random instances")
    g.add_argument("--problem", default=None, choices=["round", "round-knapsack", "3mat", "gmdst", "intersect2"], help="default: round, or round-knapsack when --t > 0")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--size", type=int, default=8)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--t", type=int, default=0)
    g.add_argument("--mix", help="comma-separated matroid families")
    g.add_argument("--fractional", action="store_true", help="plant odd-cycle gadgets")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("selftest", help="run the acceptance criteria on random instances")
    t.add_argument("--count", type=int, default=200)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--size", type=int, default=12)
    t.add_argument("--workers", type=int, default=4)
    t.add_argument("--only", help="comma-separated criterion numbers")
    t.add_argument("--inject-fault", action="store_true", help="negative control: swap in threshold rounding")
    t.set_defaults(func=cmd_selftest)

    i = sub.add_parser("intersect2", help="maximum-weight common independent set of two matroids")
    i.add_argument("instance")
    i.add_argument("--out")
    i.set_defaults(func=cmd_intersect2)

    q = sub.add_parser("partition", help="split a set into at most q independent sets")
    q.add_argument("request", help='JSON {"matroid": ..., "set": [...], "q": k}')
    q.add_argument("--q", type=int)
    q.add_argument("--out")
    q.set_defaults(func=cmd_partition)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.sep_cap is not None:
        set_separation_cap(args.sep_cap)
    try:
        return args.func(args)
    except (InstanceError, LoadViolation, GroundTooLarge) as exc:
        _err(str(exc))
        return EXIT_FAIL
    except (MatroundError, ValueError, KeyError, OSError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL
    finally:
        if args.sep_cap is not None:
            set_separation_cap(None)


if __name__ == "__main__":
    sys.exit(main())
