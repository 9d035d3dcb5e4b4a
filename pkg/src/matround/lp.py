"""Matroid-polytope LPs solved exactly by a cutting-plane loop.

The feasible region is ``0 <= x <= 1``, an optional basis equality
``x(N0) = r0(N0)`` with all rank inequalities of the basis matroid, the rank
inequalities of every side matroid restricted to its ground, and knapsack
rows.  Rank inequalities are generated lazily by separation.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from matround import kernels
from matround.errors import GroundTooLarge, InternalError
from matround.matroid import FreeExtension, Matroid, Partition, Uniform
from matround.simplex import (
    INFEASIBLE,
    OPTIMAL,
    Constraint,
    VertexSolution,
    simplex_solve,
    tight_rank,
)

DEFAULT_SEP_CAP = 22
_cap_override: int | None = None


def separation_cap() -> int:
    if _cap_override is not None:
        return _cap_override
    env = os.environ.get("MATROUND_SEP_CAP")
    return int(env) if env else DEFAULT_SEP_CAP


def set_separation_cap(cap: int | None) -> None:
    global _cap_override
    _cap_override = cap


@dataclass
class Knapsack:
    ground: frozenset
    cost: dict
    budget: Fraction

    def __post_init__(self):
        self.ground = frozenset(self.ground)
        self.cost = {e: Fraction(self.cost[e]) for e in self.ground}
        self.budget = Fraction(self.budget)
        if any(c < 0 for c in self.cost.values()):
            raise ValueError("knapsack costs must be non-negative")

    def row(self, label=None) -> Constraint:
        return Constraint({e: self.cost[e] for e in sorted(self.ground)}, "<=", self.budget, label)


@dataclass
class MatroidLp:
    """``max w.x`` over the basis polytope of ``basis`` (if given) intersected
    with the independence polytopes of ``side`` and the knapsack rows."""

    ground: frozenset
    weights: Mapping[int, Fraction]
    basis: Matroid | None = None
    side: Sequence[Matroid] = ()
    knapsacks: Sequence[Knapsack] = ()

    def __post_init__(self):
        self.ground = frozenset(self.ground)
        if self.basis is not None and self.basis.ground != self.ground:
            raise ValueError("basis matroid must live on the whole ground set")
        for m in self.side:
            if not m.ground <= self.ground:
                raise ValueError("side matroid ground leaves the LP ground set")
        for k in self.knapsacks:
            if not k.ground <= self.ground:
                raise ValueError("knapsack ground leaves the LP ground set")
        missing = self.ground - set(self.weights)
        if missing:
            raise ValueError(f"no weight for elements {sorted(missing)}")

    def matroids(self) -> list[tuple[object, Matroid]]:
        out: list[tuple[object, Matroid]] = []
        if self.basis is not None:
            out.append(("basis", self.basis))
        out.extend((i, m) for i, m in enumerate(self.side))
        return out


def _restrict_point(x: Mapping, ground) -> list[Fraction]:
    return [Fraction(x[e]) for e in sorted(ground)]


def separate_matroid(M: Matroid, x: Mapping, proper_only: bool = False, cap: int | None = None):
    """Set minimising ``rank(S) - x(S)`` over nonempty (proper) subsets.

    Returns ``(S, value)`` when the minimum is at most zero, else ``None``.
    Ties go to the smaller set, then the lexicographically smaller one.
    """
    cap = separation_cap() if cap is None else cap
    n = len(M.ground)
    if n > cap:
        raise GroundTooLarge(f"separation over {n} elements exceeds cap {cap}")
    if n == 0:
        return None
    mask, value = kernels.min_slack_subset(M.rank_table(), _restrict_point(x, M.ground), proper_only)
    if mask < 0 or value > 0:
        return None
    return M.set_of(mask), value


def find_tight_proper_set(M: Matroid, x: Mapping, cap: int | None = None):
    """Some ``∅ ≠ S ⊊ ground`` with ``x(S) = rank(S)``, or ``None``.

    ``x`` must lie in the independence polytope of ``M``.
    """
    found = separate_matroid(M, x, proper_only=True, cap=cap)
    if found is None:
        return None
    S, value = found
    if value < 0:
        raise ValueError(f"point violates the rank constraint of {sorted(S)}")
    return S


def violated_sets(M: Matroid, x: Mapping, cap: int | None = None) -> list[frozenset]:
    """Rank inequalities of ``M`` violated by ``x``, assuming ``0 <= x <= 1``.

    Uniform, partition and padded matroids are handled in closed form;
    anything else goes through exhaustive separation.  An empty list means
    ``x`` lies in the independence polytope.
    """
    if not M.ground:
        return []
    if isinstance(M, Uniform):
        total = sum(Fraction(x[e]) for e in M.ground)
        return [M.ground] if total > M.k else []
    if isinstance(M, Partition):
        return [b for b, c in M.blocks if sum(Fraction(x[e]) for e in b) > c]
    if isinstance(M, FreeExtension):
        out = violated_sets(M.base, x, cap) if M.base is not None else []
        if not out and sum(Fraction(x[e]) for e in M.ground) > M.cap:
            out = [M.ground]
        return out
    found = separate_matroid(M, x, proper_only=False, cap=cap)
    if found is not None and found[1] < 0:
        return [found[0]]
    return []


def in_polytope(M: Matroid, x: Mapping, cap: int | None = None) -> bool:
    """Check every rank inequality (and ``x >= 0``).

    Exhaustive up to the separation cap; above it only the closed-form
    families are accepted.
    """
    if any(Fraction(x[e]) < 0 for e in M.ground):
        return False
    cap = separation_cap() if cap is None else cap
    if len(M.ground) > cap:
        if any(Fraction(x[e]) > 1 for e in M.ground):
            return False
        return not violated_sets(M, x, cap)
    found = separate_matroid(M, x, proper_only=False, cap=cap)
    return found is None or found[1] >= 0


def rank_row(M: Matroid, S, label) -> Constraint:
    return Constraint({e: 1 for e in sorted(S)}, "<=", Fraction(M.rank(S)), label)


def initial_rows(lp: MatroidLp) -> list[Constraint]:
    rows = [Constraint({e: 1}, "<=", Fraction(1), ("bound", e)) for e in sorted(lp.ground)]
    if lp.basis is not None:
        rows.append(
            Constraint(
                {e: 1 for e in sorted(lp.ground)}, "==", Fraction(lp.basis.rank()), ("basis-equality",)
            )
        )
    for i, k in enumerate(lp.knapsacks):
        rows.append(k.row(("knapsack", i)))
    return rows


@dataclass
class LpRun:
    """Outcome of :func:`solve_matroid_lp` with the rows that were generated."""

    solution: VertexSolution
    rows: list = field(default_factory=list)
    rounds: int = 0


def solve_matroid_lp(lp: MatroidLp, cap: int | None = None, check_vertex: bool = True) -> VertexSolution:
    return solve_matroid_lp_run(lp, cap=cap, check_vertex=check_vertex).solution


def solve_matroid_lp_run(lp: MatroidLp, cap: int | None = None, check_vertex: bool = True) -> LpRun:
    variables = sorted(lp.ground)
    rows = initial_rows(lp)
    seen: set = set()
    weights = {e: Fraction(lp.weights[e]) for e in variables}
    rounds = 0
    while True:
        rounds += 1
        sol = simplex_solve(rows, weights, variables)
        if sol.status != OPTIMAL:
            return LpRun(sol, rows, rounds)
        new = []
        for tag, M in lp.matroids():
            for S in violated_sets(M, sol.x, cap):
                key = ("rank", tuple(sorted(S)), tag)
                if key in seen:
                    raise InternalError(f"separation returned an existing row {key}")
                seen.add(key)
                new.append(rank_row(M, S, ("rank", tag, tuple(sorted(S)))))
        if not new:
            break
        rows.extend(new)
    if check_vertex and variables:
        tr = tight_rank(rows, sol.x, variables)
        if tr != len(variables):
            raise InternalError(f"LP solution is not a vertex: {tr} tight rows for {len(variables)} variables")
    return LpRun(sol, rows, rounds)


__all__ = [
    "INFEASIBLE",
    "OPTIMAL",
    "Knapsack",
    "LpRun",
    "MatroidLp",
    "VertexSolution",
    "find_tight_proper_set",
    "in_polytope",
    "separate_matroid",
    "separation_cap",
    "set_separation_cap",
    "simplex_solve",
    "solve_matroid_lp",
    "violated_sets",
]
