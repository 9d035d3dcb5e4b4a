"""Problem pipelines built on the rounding engine."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from matround.errors import Infeasible, InternalError
from matround.intersection import weighted_intersection
from matround.lp import OPTIMAL, MatroidLp, solve_matroid_lp
from matround.matroid import Graphic, Matroid, free_extend_and_truncate
from matround.rounding import (
    KnapsackConstraint,
    RoundingInstance,
    RoundingResult,
    SideConstraint,
    build_certificate,
    round_instance,
)


def round_independent(
    M0: Matroid,
    side: Sequence = (),
    knapsacks: Sequence = (),
    weights: Mapping = None,
    cap: int | None = None,
    check: bool = True,
) -> RoundingResult:
    """Rounding where the result only has to be independent in ``M0``.

    ``M0`` is padded with ``rank(M0)`` free zero-weight elements and
    truncated back to its rank; bases of the padded matroid cut down to
    independent sets of ``M0``.  The pad is stripped from the result.
    """
    original = RoundingInstance(M0, list(side), list(knapsacks), dict(weights))
    start = max(M0.ground, default=-1) + 1
    pad = frozenset(range(start, start + M0.rank()))
    padded_M0 = free_extend_and_truncate(M0, pad)
    w = dict(original.weights)
    w.update({f: Fraction(0) for f in pad})
    padded = RoundingInstance(padded_M0, original.side, original.knapsacks, w)
    res = round_instance(padded, cap=cap, check=check)
    R = res.certificate.R - pad
    cert = build_certificate(original, R, res.certificate.lp_optimum, mode="independent")
    return RoundingResult(cert, res.trace)


def solve_three_matroid_lp(M0, M1, M2, w) -> Fraction:
    N = M0.ground
    sol = solve_matroid_lp(MatroidLp(N, {e: Fraction(w[e]) for e in N}, None, [M0, M1, M2]))
    if sol.status != OPTIMAL:
        raise InternalError(f"3-matroid LP returned {sol.status}")
    return sol.objective


@dataclass
class ThreeMatroidResult:
    R: frozenset
    lp_optimum: Fraction
    intermediate: frozenset
    weight: Fraction

    def __iter__(self):
        # unpacks as (R, lp_optimum)
        return iter((self.R, self.lp_optimum))


def three_matroid_2approx(M0: Matroid, M1: Matroid, M2: Matroid, w: Mapping, cap=None, check=True) -> ThreeMatroidResult:
    """Common independent set of three matroids with ``2 w(R) >= LP optimum``."""
    if not (M0.ground == M1.ground == M2.ground):
        raise ValueError("the three matroids must share one ground set")
    w = {e: Fraction(w[e]) for e in M0.ground}
    lp_opt = solve_three_matroid_lp(M0, M1, M2, w)
    res = round_independent(M0, [SideConstraint(M1, 2), SideConstraint(M2, 2)], (), w, cap=cap, check=check)
    A = res.certificate.R
    if res.certificate.weight < lp_opt:
        raise InternalError("rounded set weighs less than the LP optimum")
    if A:
        R = weighted_intersection(M1.restrict(A), M2.restrict(A), {e: w[e] for e in A})
    else:
        R = frozenset()
    weight = sum((w[e] for e in R), Fraction(0))
    return ThreeMatroidResult(R, lp_opt, A, weight)


def greedy_baseline(matroids: Sequence[Matroid], w: Mapping) -> frozenset:
    """Descending-weight greedy keeping an element while all matroids allow it.

    Ties are broken by ascending element id.
    """
    ground = frozenset().union(*(m.ground for m in matroids)) if matroids else frozenset()
    w = {e: Fraction(w[e]) for e in ground}
    if any(v < 0 for v in w.values()):
        raise ValueError("greedy baseline needs non-negative weights")
    chosen: set = set()
    for e in sorted(ground, key=lambda e: (-w[e], e)):
        trial = frozenset(chosen | {e})
        if all(m.is_independent(trial & m.ground) for m in matroids):
            chosen.add(e)
    return frozenset(chosen)


def boundary(edges: Mapping, S) -> frozenset:
    S = set(S)
    return frozenset(e for e, (u, v) in edges.items() if (u in S) != (v in S))


def _connected(edges: Mapping, vertices) -> bool:
    vertices = set(vertices)
    if not vertices:
        return True
    adj: dict = {v: [] for v in vertices}
    for u, v in edges.values():
        adj[u].append(v)
        adj[v].append(u)
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        for b in adj[stack.pop()]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return seen == vertices


@dataclass
class GmdstResult:
    tree: frozenset
    cost: Fraction
    lp_cost: Fraction
    result: RoundingResult
    instance: RoundingInstance


def gmdst_instance(edges: Mapping, costs: Mapping, node_sets: Sequence, matroids: Sequence[Matroid], vertices=None) -> RoundingInstance:
    vertices = set(vertices) if vertices is not None else {x for uv in edges.values() for x in uv}
    seen: set = set()
    for S in node_sets:
        S = set(S)
        if seen & S:
            raise ValueError("node sets must be pairwise disjoint")
        if not S <= vertices:
            raise ValueError("node set mentions an unknown vertex")
        seen |= S
    if len(node_sets) != len(matroids):
        raise ValueError("need one matroid per node set")
    for i, (S, M) in enumerate(zip(node_sets, matroids)):
        if M.ground != boundary(edges, S):
            raise ValueError(f"matroid {i} must live on the boundary of its node set")
    if not _connected(edges, vertices):
        raise ValueError("graph must be connected")
    M0 = Graphic(dict(edges))
    w = {e: -Fraction(costs[e]) for e in edges}
    # each edge crosses at most two disjoint node sets, so q = 2 keeps the load at most 1
    return RoundingInstance(M0, [SideConstraint(M, 2) for M in matroids], [], w)


def gmdst(edges: Mapping, costs: Mapping, node_sets: Sequence, matroids: Sequence[Matroid], vertices=None, cap=None, check=True) -> GmdstResult:
    """Spanning tree costing at most the LP optimum, 2-independent on every boundary.

    Raises :class:`Infeasible` when the LP relaxation (and hence the
    problem) is infeasible.
    """
    inst = gmdst_instance(edges, costs, node_sets, matroids, vertices)
    res = round_instance(inst, cap=cap, check=check)
    T = res.certificate.R
    cost = sum((Fraction(costs[e]) for e in T), Fraction(0))
    return GmdstResult(T, cost, -res.certificate.lp_optimum, res, inst)


__all__ = [
    "GmdstResult",
    "Infeasible",
    "KnapsackConstraint",
    "ThreeMatroidResult",
    "boundary",
    "gmdst",
    "greedy_baseline",
    "round_independent",
    "three_matroid_2approx",
]
