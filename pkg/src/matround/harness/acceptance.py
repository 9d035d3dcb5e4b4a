"""End-to-end acceptance criteria shared by ``matround selftest`` and the test suite.

Each criterion generates seeded instances, runs the pipeline, and checks the
guarantees with exact rationals against independent oracles.  A criterion
returns a :class:`CriterionResult`; failures carry the seed that reproduces
them.
"""
from __future__ import annotations

import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from matround.apps import greedy_baseline, three_matroid_2approx
from matround.errors import Infeasible, MatroundError, NotPartitionable
from matround.harness import brute
from matround.harness.generators import (
    FAMILIES,
    gen_fractional,
    gen_gmdst,
    gen_partition_request,
    gen_random,
    random_matroid_json,
)
from matround.harness.io import matroid_from_json, parse_instance, parse_partition_request
from matround.harness.pipeline import solve, verify_report
from matround.intersection import (
    PartitionCertificate,
    is_q_independent,
    partition,
    weighted_intersection,
)
from matround.lp import in_polytope
from matround.matroid import independent_sets
from matround.rounding import round_instance, verify_certificate

ROUND_TIME_LIMIT = 120.0


@dataclass
class CriterionResult:
    number: int
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.checked > 0 and not self.failures

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"[{status}] {self.number:>2}. {self.name}: {self.checked} checked in {self.seconds:.1f}s"
        if self.failures:
            seed, msg = self.failures[0]
            out += f"; first failure at seed {seed}: {msg}"
        return out


def _w(w, S) -> Fraction:
    return sum((w[e] for e in S), Fraction(0))


class _Stat:
    """Running min/max of a few ratios for the slack table."""

    def __init__(self):
        self.values: dict = {}
        self._lock = threading.Lock()

    def add(self, key, value, how=min):
        if value is None:
            return
        with self._lock:
            old = self.values.get(key)
            self.values[key] = value if old is None else how(old, value)

    def as_dict(self):
        return {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.values.items()}


def _run(seeds, fn, workers):
    """Map ``fn`` over seeds on worker threads; results come back in seed order."""
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def _guard(fn):
    """Turn unexpected exceptions into failure messages."""

    def wrapped(seed):
        try:
            return fn(seed)
        except (MatroundError, AssertionError, ValueError, KeyError) as exc:
            return {"fail": f"{type(exc).__name__}: {exc}"}

    return wrapped


def _check_round_outcome(inst, out, stat: _Stat, mode: str) -> list[str]:
    """Shared checks for round, round-knapsack and round-independent runs."""
    fails = []
    oracle_lp = brute.materialized_lp_value(inst)
    if out.report["status"] == "infeasible":
        if oracle_lp is not None:
            fails.append("reported infeasible but the written-out LP has a solution")
        return fails
    if oracle_lp is None:
        return ["solved an instance whose written-out LP is infeasible"]
    cert = out.certificate
    ri = inst.rounding_instance()
    fails += verify_certificate(ri, cert, mode=mode)
    fails += verify_report(inst, out.report)
    if cert.lp_optimum != oracle_lp:
        fails.append(f"LP optimum {cert.lp_optimum} differs from written-out LP {oracle_lp}")
    if cert.weight < oracle_lp:
        fails.append(f"w(R) = {cert.weight} below LP optimum {oracle_lp}")
    _, opt = brute.brute_force_opt(inst)
    if opt is not None and opt > oracle_lp:
        fails.append(f"integer optimum {opt} above LP optimum {oracle_lp}")
    tr = out.trace
    if tr.iterations > tr.iteration_bound:
        fails.append(f"{tr.iterations} iterations exceed bound {tr.iteration_bound}")
    stat.add("max iterations/bound", Fraction(tr.iterations, max(tr.iteration_bound, 1)), max)
    stat.add("w(R) - LP (min)", cert.weight - oracle_lp)
    for k in cert.knapsacks:
        if k["bound"] > 0:
            stat.add("max knapsack cost/bound", k["cost"] / k["bound"], max)
    return fails


# ---------------------------------------------------------------------------
# criteria


def criterion_round(count=200, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(1, "round: basis, w(R) >= LP, q-partitions")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 4 + s % max(1, size - 3)
        if s % 3 == 2:
            doc = gen_fractional(s, size=n, k=2 + s % 2)
        else:
            doc = gen_random(s, size=n, k=s % 4, random_q=s % 2 == 1, mix=FAMILIES)
        inst = parse_instance(doc)
        out = solve(inst)
        return {"fails": _check_round_outcome(inst, out, stat, "basis"), "feasible": out.R is not None}

    feasible = 0
    s = seed
    # keep drawing seeds until `count` feasible instances have been solved
    while feasible < count and s < seed + 4 * count:
        batch = list(range(s, s + count - feasible))
        s = batch[-1] + 1
        for b, r in zip(batch, _run(batch, one, workers)):
            res.checked += 1
            if "fail" in r:
                res.failures.append((b, r["fail"]))
                continue
            feasible += r["feasible"]
            res.failures += [(b, f) for f in r["fails"]]
    res.seconds = time.perf_counter() - t0
    if feasible < count:
        res.failures.append((s, f"only {feasible} feasible instances in {res.checked} seeds"))
    if res.seconds > ROUND_TIME_LIMIT:
        res.failures.append((seed, f"took {res.seconds:.1f}s, limit {ROUND_TIME_LIMIT:.0f}s"))
    res.stats = dict(stat.as_dict(), feasible=feasible)
    return res


def criterion_iterations(count=200, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(2, "iterations <= (2k+1)|N| + t, refinements <= |N_i|")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 4 + s % max(1, size - 3)
        t = s % 3
        if s % 3 == 2:
            doc = gen_fractional(10_000 + s, size=n, k=2 + s % 2, t=t)
        else:
            doc = gen_random(10_000 + s, size=n, k=s % 4, t=t)
        inst = parse_instance(doc)
        try:
            out = round_instance(inst.rounding_instance())
        except Infeasible:
            return {"fails": [], "traced": False}
        tr = out.trace
        fails = []
        if tr.iterations > tr.iteration_bound:
            fails.append(f"{tr.iterations} iterations exceed {tr.iteration_bound}")
        for i, (a, b) in enumerate(zip(tr.refinements_by_origin(), tr.refine_bounds)):
            if a > b:
                fails.append(f"side matroid {i} refined {a} times, bound {b}")
        if tr.count("dropped-knapsack") > tr.t:
            fails.append(f"{tr.count('dropped-knapsack')} knapsack drops, only {tr.t} knapsacks")
        stat.add("max iterations/bound", Fraction(tr.iterations, max(tr.iteration_bound, 1)), max)
        stat.add("max iterations", tr.iterations, max)
        return {"fails": fails, "traced": True}

    seeds = list(range(seed, seed + count))
    traced = 0
    for s, r in zip(seeds, _run(seeds, one, workers)):
        res.checked += 1
        if "fail" in r:
            res.failures.append((s, r["fail"]))
            continue
        traced += r["traced"]
        res.failures += [(s, f) for f in r["fails"]]
    res.seconds = time.perf_counter() - t0
    res.stats = dict(stat.as_dict(), traces=traced)
    return res


def criterion_three_matroid(count=100, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(3, "3-matroid: R common independent, 2 w(R) >= LP, 2 OPT >= LP")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 3 + s % max(1, size - 2)
        if s % 3 == 2:
            inst = parse_instance(gen_fractional(20_000 + s, size=n, problem="3mat"))
        else:
            inst = parse_instance(gen_random(20_000 + s, size=n, problem="3mat"))
        out = solve(inst)
        fails = verify_report(inst, out.report)
        R = out.R
        lp = out.extra["lp_optimum"]
        oracle_lp = brute.materialized_lp_value(inst)
        if lp != oracle_lp:
            fails.append(f"LP optimum {lp} differs from written-out LP {oracle_lp}")
        for i, m in enumerate(inst.matroids):
            if not m.is_independent(R):
                fails.append(f"R dependent in matroid {i}")
        w = _w(inst.weights, R)
        if 2 * w < lp:
            fails.append(f"2 w(R) = {2 * w} < LP {lp}")
        _, opt = brute.brute_force_opt(inst)
        if 2 * opt < lp:
            fails.append(f"2 OPT = {2 * opt} < LP {lp}")
        if opt > lp:
            fails.append(f"OPT {opt} > LP {lp}")
        if lp > 0:
            stat.add("min w(R)/LP", w / lp)
            stat.add("min OPT/LP", opt / lp)
        return {"fails": fails}

    _collect(res, seed, count, one, workers)
    res.seconds = time.perf_counter() - t0
    res.stats = stat.as_dict()
    return res


def criterion_knapsack(count=100, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(4, "knapsacks: basis, w(R) >= LP, partitions, cost <= U + q max c <= (q+1)U")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 4 + s % max(1, size - 3)
        if s % 3 == 2:
            doc = gen_fractional(30_000 + s, size=n, k=2, t=1 + s % 2)
        else:
            doc = gen_random(30_000 + s, size=n, k=s % 3, t=1 + s % 2, random_q=s % 2 == 1)
        inst = parse_instance(doc)
        out = solve(inst)
        fails = _check_round_outcome(inst, out, stat, "basis")
        if out.certificate is not None:
            for i, k in enumerate(inst.rounding_instance().knapsacks):
                cost = _w(k.cost, out.R & k.ground)
                if not cost <= k.budget + k.q * k.max_cost <= (k.q + 1) * k.budget:
                    fails.append(f"knapsack {i} bound chain broken")
        return {"fails": fails, "feasible": out.R is not None}

    feasible = _collect(res, seed, count, one, workers)
    res.seconds = time.perf_counter() - t0
    res.stats = dict(stat.as_dict(), feasible=feasible)
    return res


def _random_point(rng: random.Random, sets, ground) -> dict:
    """Random convex combination of characteristic vectors."""
    picks = [rng.choice(sets) for _ in range(rng.randint(1, 4))]
    lam = [Fraction(rng.randint(1, 5)) for _ in picks]
    total = sum(lam)
    x = {e: Fraction(0) for e in ground}
    for S, a in zip(picks, lam):
        for e in S:
            x[e] += a / total
    return x


def _maximal_through(rng: random.Random, M, A) -> frozenset:
    """Random maximal independent set whose part inside ``A`` spans ``A``."""
    inside = sorted(A)
    outside = sorted(M.ground - A)
    rng.shuffle(inside)
    rng.shuffle(outside)
    I: set = set()
    for e in inside + outside:
        if M.is_independent(frozenset(I | {e})):
            I.add(e)
    return frozenset(I)


def criterion_refinement(count=500, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(5, "refinement: split and glue stay in the polytope")
    t0 = time.perf_counter()

    @_guard
    def one(s):
        rng = random.Random(f"refine:{s}")
        n = rng.randint(2, size)
        N = list(range(n))
        M = matroid_from_json(random_matroid_json(rng, N, FAMILIES))
        A = frozenset(rng.sample(N, rng.randint(1, n - 1)))
        # x is a convex combination of sets spanning A, so x(A) = r(A)
        sets = [_maximal_through(rng, M, A) for _ in range(4)]
        x = _random_point(rng, sets, M.ground)
        fails = []
        if sum(x[e] for e in A) != M.rank(A):
            fails.append("generated tight set is not tight")
        if not in_polytope(M, x):
            fails.append("generated point is not feasible")
        inner, outer = M.restrict(A), M.contract(A)
        if not in_polytope(inner, x):
            fails.append("restriction of a feasible point left P(M|A)")
        if not in_polytope(outer, x):
            fails.append("remainder of a feasible point left P(M/A)")
        # glue: independent points of M|A and M/A combine into a point of M
        y1 = _random_point(rng, independent_sets(inner), A)
        y2 = _random_point(rng, independent_sets(outer) if outer.ground else [frozenset()], outer.ground)
        if not in_polytope(M, {**y1, **y2}):
            fails.append("glued point left P(M)")
        return {"fails": fails}

    _collect(res, seed, count, one, workers)
    res.seconds = time.perf_counter() - t0
    return res


def criterion_intersection(count=200, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(6, "2-matroid LP vertices integral and optimal")
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 2 + s % max(1, size - 1)
        inst = parse_instance(gen_random(60_000 + s, size=n, problem="intersect2"))
        M1, M2 = inst.matroids
        R = weighted_intersection(M1, M2, inst.weights)  # raises on a fractional vertex
        _, opt = brute.brute_force_opt(inst)
        fails = []
        if _w(inst.weights, R) != opt:
            fails.append(f"intersection weight {_w(inst.weights, R)} != brute force {opt}")
        if not (M1.is_independent(R) and M2.is_independent(R)):
            fails.append("intersection result not common independent")
        return {"fails": fails}

    _collect(res, seed, count, one, workers)
    res.seconds = time.perf_counter() - t0
    return res


def criterion_partition(count=300, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(7, "partition succeeds iff q-independent")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 1 + s % size
        M, S, q = parse_partition_request(gen_partition_request(70_000 + s, size=n))
        expect = is_q_independent(M, S, q)
        try:
            cert = partition(M, S, q)
            got = True
            probs = cert.problems(M, S, q)
        except NotPartitionable:
            got, probs = False, []
        fails = [f"partition={got} but q-independent={expect}"] if got != expect else []
        fails += probs
        return {"fails": fails, "yes": expect}

    yes = _collect(res, seed, count, one, workers, key="yes")
    res.seconds = time.perf_counter() - t0
    res.stats = dict(stat.as_dict(), partitionable=yes)
    return res


def criterion_gmdst(count=50, seed=0, size=7, workers=4) -> CriterionResult:
    res = CriterionResult(8, "GMDST: spanning tree, c(T) <= LP, 2-independent boundaries")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        inst = parse_instance(gen_gmdst(80_000 + s, max_vertices=min(7, size), k=3))
        out = solve(inst)
        fails = verify_report(inst, out.report)
        exact, _ = brute.brute_force_opt(inst)
        relaxed, _ = brute.brute_force_opt(inst, relaxed=True)
        if out.report["status"] == "infeasible":
            if exact is not None:
                fails.append("reported infeasible but a feasible tree exists")
            return {"fails": fails, "feasible": False}
        if relaxed is None:
            fails.append("returned a tree although no tree is 2-independent on every boundary")
        ri = inst.rounding_instance()
        T = out.R
        if len(T) != len(inst.vertices) - 1 or not ri.M0.is_independent(T):
            fails.append("not a spanning tree")
        cost = _w(inst.costs, T)
        lp_cost = -out.certificate.lp_optimum
        if cost > lp_cost:
            fails.append(f"c(T) = {cost} > LP {lp_cost}")
        if exact is not None:
            best = _w(inst.costs, exact)
            if lp_cost > best:
                fails.append(f"LP cost {lp_cost} above best feasible tree {best}")
        for i, (side, parts) in enumerate(zip(ri.side, out.certificate.partitions)):
            probs = PartitionCertificate(parts).problems(side.matroid, T & side.matroid.ground, 2)
            fails += [f"boundary {i}: {p}" for p in probs]
        stat.add("max c(T) - LP", cost - lp_cost, max)
        return {"fails": fails, "feasible": True}

    feasible = _collect(res, seed, count, one, workers)
    res.seconds = time.perf_counter() - t0
    res.stats = dict(stat.as_dict(), feasible=feasible)
    return res


def criterion_independent(count=100, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(9, "independent variant: R independent, w(R) >= LP, partitions")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 3 + s % max(1, size - 2)
        t = s % 2
        if s % 3 == 2:
            doc = gen_fractional(90_000 + s, size=n, k=2, t=t)
        else:
            doc = gen_random(90_000 + s, size=n, k=s % 3, t=t)
        doc["independent"] = True
        inst = parse_instance(doc)
        out = solve(inst)
        fails = _check_round_outcome(inst, out, stat, "independent")
        if out.R is not None and not inst.matroids[0].is_independent(out.R):
            fails.append("R not independent in M0")
        return {"fails": fails, "feasible": out.R is not None}

    feasible = _collect(res, seed, count, one, workers)
    res.seconds = time.perf_counter() - t0
    res.stats = dict(stat.as_dict(), feasible=feasible)
    return res


def criterion_greedy(count=100, seed=0, size=12, workers=4) -> CriterionResult:
    res = CriterionResult(10, "greedy >= OPT/k; 2 w(R) >= LP and 3 w(greedy) >= LP")
    stat = _Stat()
    t0 = time.perf_counter()

    @_guard
    def one(s):
        n = 3 + s % max(1, size - 2)
        if s % 3 == 2:
            inst = parse_instance(gen_fractional(100_000 + s, size=n, problem="3mat"))
        else:
            inst = parse_instance(gen_random(100_000 + s, size=n, problem="3mat"))
        w = inst.weights
        fails = []
        # greedy against the k-matroid optimum for k = 1, 2, 3
        for k in (1, 2, 3):
            mats = inst.matroids[:k]
            G = greedy_baseline(mats, w)
            sub = parse_instance(
                dict(inst.raw, problem="intersect2", matroids=inst.raw["matroids"][:2])
            ) if k == 2 else None
            if k == 1:
                best = max((_w(w, S) for S in independent_sets(mats[0])), default=Fraction(0))
            elif k == 2:
                _, best = brute.brute_force_opt(sub)
            else:
                _, best = brute.brute_force_opt(inst)
            if k * _w(w, G) < best:
                fails.append(f"k={k}: greedy {_w(w, G)} below OPT/{k} = {best / k}")
            if k == 1 and _w(w, G) != best:
                fails.append("single-matroid greedy is not optimal")
        M0, M1, M2 = inst.matroids
        out = three_matroid_2approx(M0, M1, M2, w)
        G = greedy_baseline(inst.matroids, w)
        lp = out.lp_optimum
        if 2 * out.weight < lp:
            fails.append(f"2 w(R) = {2 * out.weight} < LP {lp}")
        if 3 * _w(w, G) < lp:
            fails.append(f"3 w(G) = {3 * _w(w, G)} < LP {lp}")
        if lp > 0:
            stat.add("min w(R)/LP", out.weight / lp)
            stat.add("min w(G)/LP", _w(w, G) / lp)
        return {"fails": fails}

    _collect(res, seed, count, one, workers)
    res.seconds = time.perf_counter() - t0
    res.stats = stat.as_dict()
    return res


def _collect(res: CriterionResult, seed, count, one, workers, key="feasible") -> int:
    seeds = list(range(seed, seed + count))
    tally = 0
    for s, r in zip(seeds, _run(seeds, one, workers)):
        res.checked += 1
        if "fail" in r:
            res.failures.append((s, r["fail"]))
            continue
        tally += bool(r.get(key, False))
        res.failures += [(s, f) for f in r["fails"]]
    return tally


CRITERIA = [
    (criterion_round, 1.0),
    (criterion_iterations, 1.0),
    (criterion_three_matroid, 0.5),
    (criterion_knapsack, 0.5),
    (criterion_refinement, 2.5),
    (criterion_intersection, 1.0),
    (criterion_partition, 1.5),
    (criterion_gmdst, 0.25),
    (criterion_independent, 0.5),
    (criterion_greedy, 0.5),
]


def run_all(count=200, seed=0, size=12, workers=4, only=None) -> list[CriterionResult]:
    """Run every criterion with instance counts scaled from ``count``
    (the default of 200 gives each criterion its full sample)."""
    out = []
    for number, (fn, scale) in enumerate(CRITERIA, start=1):
        if only and number not in only:
            continue
        n = max(1, round(count * scale))
        kwargs = {"count": n, "seed": seed, "workers": workers}
        if fn is criterion_gmdst:
            kwargs["size"] = min(7, size)
        else:
            kwargs["size"] = size
        out.append(fn(**kwargs))
    return out
