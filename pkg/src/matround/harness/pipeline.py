"""Run an instance through its pipeline and check reports independently."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from matround.apps import round_independent, three_matroid_2approx
from matround.errors import Infeasible
from matround.harness.io import Instance, fmt
from matround.intersection import weighted_intersection
from matround.lp import OPTIMAL, Knapsack, MatroidLp, solve_matroid_lp
from matround.rounding import SolutionCertificate, round_instance, verify_certificate


@dataclass
class Outcome:
    """A solved (or infeasible) instance with the objects behind its report."""

    report: dict
    R: frozenset | None = None
    certificate: SolutionCertificate | None = None
    trace: object = None
    extra: dict | None = None


def _weight(w, S) -> Fraction:
    return sum((w[e] for e in S), Fraction(0))


def solve(inst: Instance, cap: int | None = None, check: bool = True, with_trace: bool = False) -> Outcome:
    """Solve ``inst``; an infeasible LP gives a report with status ``infeasible``."""
    base = {"problem": inst.problem}
    try:
        if inst.problem in ("round", "round-knapsack", "gmdst"):
            ri = inst.rounding_instance()
            if inst.independent:
                res = round_independent(ri.M0, ri.side, ri.knapsacks, ri.weights, cap=cap, check=check)
            else:
                res = round_instance(ri, cap=cap, check=check)
            cert = res.certificate
            report = dict(
                base,
                status="optimal",
                solution=sorted(cert.R),
                objective=fmt(cert.weight),
                lp_optimum=fmt(cert.lp_optimum),
                certificate=cert.to_json(),
            )
            report["trace_summary"] = res.trace.summary()
            if with_trace:
                report["trace"] = res.trace.to_json()
            if inst.problem == "gmdst":
                report["tree_cost"] = fmt(_weight(inst.costs, cert.R))
                report["lp_cost"] = fmt(-cert.lp_optimum)
            return Outcome(report, cert.R, cert, res.trace)
        if inst.problem == "3mat":
            M0, M1, M2 = inst.matroids
            out = three_matroid_2approx(M0, M1, M2, inst.weights, cap=cap, check=check)
            report = dict(
                base,
                status="optimal",
                solution=sorted(out.R),
                objective=fmt(out.weight),
                lp_optimum=fmt(out.lp_optimum),
                intermediate=sorted(out.intermediate),
                intermediate_weight=fmt(_weight(inst.weights, out.intermediate)),
            )
            return Outcome(report, out.R, extra={"intermediate": out.intermediate, "lp_optimum": out.lp_optimum})
        M1, M2 = inst.matroids
        R = weighted_intersection(M1, M2, inst.weights)
        w = _weight(inst.weights, R)
        report = dict(base, status="optimal", solution=sorted(R), objective=fmt(w), lp_optimum=fmt(w))
        return Outcome(report, R)
    except Infeasible as exc:
        return Outcome(dict(base, status="infeasible", reason=str(exc)))


def relaxation_lp(inst: Instance) -> MatroidLp:
    """The LP relaxation of ``inst`` built straight from the parsed file."""
    if inst.problem in ("3mat", "intersect2"):
        return MatroidLp(inst.ground, inst.weights, None, list(inst.matroids))
    ri = inst.rounding_instance()
    side = [s.matroid for s in ri.side]
    knaps = [Knapsack(k.ground, k.cost, k.budget) for k in ri.knapsacks]
    if inst.independent:
        return MatroidLp(ri.ground, ri.weights, None, [ri.M0] + side, knaps)
    return MatroidLp(ri.ground, ri.weights, ri.M0, side, knaps)


def verify_report(inst: Instance, report: dict, cap: int | None = None) -> list[str]:
    """Failures found when re-checking ``report`` against ``inst``; empty means valid."""
    if report.get("problem") != inst.problem:
        return [f"report is for problem {report.get('problem')!r}, instance is {inst.problem!r}"]
    status = report.get("status")
    lp = solve_matroid_lp(relaxation_lp(inst), cap=cap)
    if status == "infeasible":
        return [] if lp.status != OPTIMAL else ["report says infeasible but the LP has a solution"]
    if status != "optimal":
        return [f"unknown status {status!r}"]
    if lp.status != OPTIMAL:
        return [f"report has a solution but the LP is {lp.status}"]
    try:
        R = frozenset(report["solution"])
        objective = Fraction(report["objective"])
        lp_optimum = Fraction(report["lp_optimum"])
    except (KeyError, TypeError, ValueError) as exc:
        return [f"malformed report: {exc}"]
    if not R <= inst.ground:
        return [f"solution leaves the ground set: {sorted(R - inst.ground)}"]
    fails = []
    w = _weight(inst.weights, R)
    if w != objective:
        fails.append(f"objective mismatch: recorded {objective}, actual {w}")
    if lp_optimum != lp.objective:
        fails.append(f"LP optimum mismatch: recorded {lp_optimum}, recomputed {lp.objective}")

    if inst.problem in ("round", "round-knapsack", "gmdst"):
        ri = inst.rounding_instance()
        try:
            cert = SolutionCertificate.from_json(report["certificate"])
        except (KeyError, TypeError, ValueError) as exc:
            return fails + [f"malformed certificate: {exc}"]
        if cert.R != R:
            fails.append("certificate solution differs from the reported solution")
        mode = "independent" if inst.independent else "basis"
        if cert.mode != mode:
            fails.append(f"certificate mode {cert.mode!r}, expected {mode!r}")
        fails += verify_certificate(ri, cert, mode=mode)
        if inst.problem == "gmdst":
            nverts = len(inst.vertices)
            if len(R) != nverts - 1 or not ri.M0.is_independent(R):
                fails.append("solution is not a spanning tree")
            cost = _weight(inst.costs, R)
            if report.get("tree_cost") != fmt(cost):
                fails.append("tree cost mismatch")
            if cost > -lp.objective:
                fails.append(f"tree cost {cost} above LP cost {-lp.objective}")
        return fails

    for i, m in enumerate(inst.matroids):
        if not m.is_independent(R):
            fails.append(f"solution not independent in matroid {i}")
    if inst.problem == "3mat":
        if 2 * w < lp.objective:
            fails.append(f"2 w(R) = {2 * w} below LP optimum {lp.objective}")
    elif w != lp.objective:
        fails.append(f"intersection weight {w} differs from LP optimum {lp.objective}")
    return fails
