"""Iterative refinement/relaxation rounding.

Starting from an optimal vertex of the LP relaxation, elements at 0 are
deleted and elements at 1 are fixed (contracted); side matroids with a
nontrivial tight set are split into a restriction and a contraction; then
one side matroid (or knapsack) whose slack ``|N'| - x(N')`` is small enough
is dropped, and the LP is solved again.  The final set is a basis of the
basis matroid, weighs at least the LP optimum, and is ``q_i``-independent in
every side matroid.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from matround.errors import (
    Infeasible,
    InternalError,
    LoadViolation,
    NoDroppableConstraint,
    NotPartitionable,
)
from matround.intersection import PartitionCertificate, partition
from matround.lp import (
    OPTIMAL,
    Knapsack,
    MatroidLp,
    find_tight_proper_set,
    in_polytope,
    solve_matroid_lp,
)
from matround.matroid import Matroid


# Negative control for the selftest: "round-half-up" replaces the loop with
# one-shot threshold rounding at 1/2.
FAULT_ENV = "MATROUND_INJECT_FAULT"


def fmt(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


@dataclass
class SideConstraint:
    matroid: Matroid
    q: int = 1


@dataclass
class KnapsackConstraint:
    ground: frozenset
    cost: dict
    budget: Fraction
    q: int = 1

    def __post_init__(self):
        self.ground = frozenset(self.ground)
        self.cost = {e: Fraction(self.cost[e]) for e in self.ground}
        self.budget = Fraction(self.budget)

    @property
    def max_cost(self) -> Fraction:
        return max(self.cost.values(), default=Fraction(0))


@dataclass
class RoundingInstance:
    """Basis matroid, side matroids with q-values, knapsacks and weights."""

    M0: Matroid
    side: list = field(default_factory=list)
    knapsacks: list = field(default_factory=list)
    weights: dict = field(default_factory=dict)

    def __post_init__(self):
        self.side = [s if isinstance(s, SideConstraint) else SideConstraint(*s) for s in self.side]
        self.knapsacks = [
            k if isinstance(k, KnapsackConstraint) else KnapsackConstraint(*k) for k in self.knapsacks
        ]
        self.weights = {e: Fraction(self.weights[e]) for e in self.M0.ground}
        N = self.M0.ground
        for i, s in enumerate(self.side):
            if not s.matroid.ground <= N:
                raise ValueError(f"side matroid {i} leaves the ground set")
            if s.q < 1:
                raise ValueError("q-values must be at least 1")
        for i, k in enumerate(self.knapsacks):
            if not k.ground <= N:
                raise ValueError(f"knapsack {i} leaves the ground set")
            if k.q < 1:
                raise ValueError("q-values must be at least 1")
            if any(c < 0 for c in k.cost.values()):
                raise ValueError("knapsack costs must be non-negative")
            if k.max_cost > k.budget:
                raise ValueError(f"knapsack {i} has an element costing more than its budget")
        report = validate_load(self)
        if report:
            raise LoadViolation(report)

    @property
    def ground(self) -> frozenset:
        return self.M0.ground

    def lp(self) -> MatroidLp:
        return MatroidLp(
            self.ground,
            self.weights,
            self.M0,
            [s.matroid for s in self.side],
            [Knapsack(k.ground, k.cost, k.budget) for k in self.knapsacks],
        )


def default_q(grounds: Sequence) -> list[int]:
    """``q_i = Δ`` for all i, Δ the largest number of grounds sharing an element."""
    if not grounds:
        raise ValueError("need at least one ground set")
    counts: dict = {}
    for g in grounds:
        for e in g:
            counts[e] = counts.get(e, 0) + 1
    delta = max(counts.values(), default=1)
    return [delta] * len(grounds)


def validate_load(instance: RoundingInstance) -> dict:
    """Elements whose load ``sum 1/q_i`` exceeds 1, mapped to that load."""
    load: dict = {}
    grounds = [(s.matroid.ground, s.q) for s in instance.side]
    grounds += [(k.ground, k.q) for k in instance.knapsacks]
    for g, q in grounds:
        for e in g:
            load[e] = load.get(e, Fraction(0)) + Fraction(1, q)
    return {e: v for e, v in load.items() if v > 1}


# ---------------------------------------------------------------------------
# trace


@dataclass
class Event:
    kind: str
    data: dict

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for k, v in self.data.items():
            if isinstance(v, Fraction):
                v = fmt(v)
            elif isinstance(v, (set, frozenset)):
                v = sorted(v)
            out[k] = v
        return out


@dataclass
class Trace:
    events: list = field(default_factory=list)
    k: int = 0
    t: int = 0
    n: int = 0
    refine_bounds: list = field(default_factory=list)

    def add(self, kind: str, **data) -> None:
        self.events.append(Event(kind, data))

    def count(self, kind: str) -> int:
        return sum(1 for e in self.events if e.kind == kind)

    @property
    def iterations(self) -> int:
        return self.count("lp-solved")

    @property
    def iteration_bound(self) -> int:
        return (2 * self.k + 1) * self.n + self.t

    def refinements_by_origin(self) -> list[int]:
        out = [0] * len(self.refine_bounds)
        for e in self.events:
            if e.kind == "refined":
                out[e.data["origin"]] += 1
        return out

    def within_bounds(self) -> bool:
        if self.iterations > self.iteration_bound:
            return False
        return all(a <= b for a, b in zip(self.refinements_by_origin(), self.refine_bounds))

    def summary(self) -> dict:
        kinds = ["lp-solved", "deleted", "contracted", "refined", "dropped-matroid", "dropped-knapsack"]
        out = {k: self.count(k) for k in kinds}
        out.update(
            iterations=self.iterations,
            iteration_bound=self.iteration_bound,
            refinements_by_origin=self.refinements_by_origin(),
            refinement_bounds=list(self.refine_bounds),
        )
        return out

    def to_json(self) -> list:
        return [e.to_json() for e in self.events]


# ---------------------------------------------------------------------------
# certificate


@dataclass
class SolutionCertificate:
    R: frozenset
    weight: Fraction
    lp_optimum: Fraction
    rank_R: int
    rank_ground: int
    partitions: list
    knapsacks: list
    mode: str = "basis"

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "solution": sorted(self.R),
            "objective": fmt(self.weight),
            "lp_optimum": fmt(self.lp_optimum),
            "basis_witness": {"rank_R": self.rank_R, "size_R": len(self.R), "rank_ground": self.rank_ground},
            "partitions": [[sorted(p) for p in parts] for parts in self.partitions],
            "knapsacks": [
                {k: fmt(v) if isinstance(v, Fraction) else v for k, v in item.items()}
                for item in self.knapsacks
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SolutionCertificate":
        bw = d["basis_witness"]
        return cls(
            R=frozenset(d["solution"]),
            weight=Fraction(d["objective"]),
            lp_optimum=Fraction(d["lp_optimum"]),
            rank_R=bw["rank_R"],
            rank_ground=bw["rank_ground"],
            partitions=[[frozenset(p) for p in parts] for parts in d["partitions"]],
            knapsacks=[
                {k: (Fraction(v) if isinstance(v, str) else v) for k, v in item.items()}
                for item in d["knapsacks"]
            ],
            mode=d.get("mode", "basis"),
        )


def build_certificate(instance: RoundingInstance, R, lp_optimum, mode: str = "basis") -> SolutionCertificate:
    R = frozenset(R)
    partitions = []
    for i, s in enumerate(instance.side):
        try:
            cert = partition(s.matroid, R & s.matroid.ground, s.q)
        except NotPartitionable as exc:
            raise InternalError(f"result is not {s.q}-independent in side matroid {i}") from exc
        partitions.append(cert.parts)
    knaps = []
    for k in instance.knapsacks:
        cost = sum((k.cost[e] for e in R & k.ground), Fraction(0))
        knaps.append(
            {
                "cost": cost,
                "budget": k.budget,
                "q": k.q,
                "max_cost": k.max_cost,
                "bound": k.budget + k.q * k.max_cost,
            }
        )
    return SolutionCertificate(
        R=R,
        weight=sum((instance.weights[e] for e in R), Fraction(0)),
        lp_optimum=Fraction(lp_optimum),
        rank_R=instance.M0.rank(R),
        rank_ground=instance.M0.rank(),
        partitions=partitions,
        knapsacks=knaps,
        mode=mode,
    )


def verify_certificate(instance: RoundingInstance, cert: SolutionCertificate, mode: str | None = None) -> list[str]:
    """Re-check a certificate against the original instance; returns failures."""
    mode = mode or cert.mode
    fails = []
    R = frozenset(cert.R)
    N = instance.ground
    if not R <= N:
        return [f"solution leaves the ground set: {sorted(R - N)}"]
    M0 = instance.M0
    indep = M0.is_independent(R)
    if mode == "basis":
        if not (indep and len(R) == M0.rank()):
            fails.append("not a basis of M0")
    elif not indep:
        fails.append("not independent in M0")
    if cert.rank_R != M0.rank(R) or cert.rank_ground != M0.rank():
        fails.append("basis witness does not match recomputed ranks")
    w = sum((instance.weights[e] for e in R), Fraction(0))
    if w != cert.weight:
        fails.append(f"objective mismatch: recorded {cert.weight}, actual {w}")
    if w < cert.lp_optimum:
        fails.append(f"weight {w} below LP optimum {cert.lp_optimum}")
    if len(cert.partitions) != len(instance.side):
        fails.append("wrong number of partition certificates")
    else:
        for i, (s, parts) in enumerate(zip(instance.side, cert.partitions)):
            for p in PartitionCertificate(list(parts)).problems(s.matroid, R & s.matroid.ground, s.q):
                fails.append(f"side matroid {i}: {p}")
    if len(cert.knapsacks) != len(instance.knapsacks):
        fails.append("wrong number of knapsack records")
    else:
        for i, k in enumerate(instance.knapsacks):
            cost = sum((k.cost[e] for e in R & k.ground), Fraction(0))
            bound = k.budget + k.q * k.max_cost
            if cost > bound:
                fails.append(f"knapsack {i}: cost {cost} exceeds {bound}")
            if bound > (k.q + 1) * k.budget:
                fails.append(f"knapsack {i}: bound {bound} exceeds (q+1)U")
            if Fraction(cert.knapsacks[i].get("cost", -1)) != cost:
                fails.append(f"knapsack {i}: recorded cost does not match")
    return fails


# ---------------------------------------------------------------------------
# the algorithm


@dataclass
class _Working:
    ident: int
    matroid: Matroid
    q: int
    origin: int


@dataclass
class _WorkingKnapsack:
    index: int
    ground: frozenset
    cost: dict
    budget: Fraction
    q: int


@dataclass
class RoundingResult:
    certificate: SolutionCertificate
    trace: Trace


def _drop_partition(M: Matroid, x: Mapping) -> list[frozenset]:
    """A basis of ``M`` plus singletons covering the rest of its ground."""
    B = M.max_independent(M.ground)
    return [B] + [frozenset([e]) for e in sorted(M.ground - B)]


def round_instance(instance: RoundingInstance, cap: int | None = None, check: bool = True, mode: str = "basis") -> RoundingResult:
    """Run the rounding loop; raises :class:`Infeasible` when the LP is.

    With ``check`` the per-step soundness properties (split feasibility at
    refinements, partition at drops, feasibility of the previous point after
    every mutation, objective monotonicity) are asserted as the run proceeds.
    """
    w = instance.weights
    N = instance.ground
    M0 = instance.M0
    mats = [_Working(i, s.matroid, s.q, i) for i, s in enumerate(instance.side) if s.matroid.ground]
    next_id = len(instance.side)
    knaps = [
        _WorkingKnapsack(i, k.ground, dict(k.cost), k.budget, k.q)
        for i, k in enumerate(instance.knapsacks)
        if k.ground
    ]
    trace = Trace(
        k=len(instance.side),
        t=len(instance.knapsacks),
        n=len(N),
        refine_bounds=[len(s.matroid.ground) for s in instance.side],
    )
    R: set = set()
    lp_optimum = None
    prev_x = None
    prev_opt = None
    contracted_weight = Fraction(0)

    while True:
        lp = MatroidLp(
            N,
            {e: w[e] for e in N},
            M0,
            [m.matroid for m in mats],
            [Knapsack(k.ground, k.cost, k.budget) for k in knaps],
        )
        if check and prev_x is not None:
            _check_previous_feasible(lp, prev_x, cap)
        sol = solve_matroid_lp(lp, cap=cap)
        if sol.status != OPTIMAL:
            if lp_optimum is None:
                raise Infeasible("LP relaxation is infeasible")
            raise InternalError(f"LP became {sol.status} after a mutation")
        trace.add("lp-solved", objective=sol.objective, ground=len(N))
        if lp_optimum is None:
            lp_optimum = sol.objective
        elif check and sol.objective < prev_opt - contracted_weight:
            raise InternalError("LP optimum dropped by more than the contracted weight")
        prev_opt = sol.objective
        x = sol.x

        if os.environ.get(FAULT_ENV) == "round-half-up":
            zeros = frozenset(e for e in N if x[e] < Fraction(1, 2))
            ones = N - zeros
        else:
            zeros = frozenset(e for e in N if x[e] == 0)
            ones = frozenset(e for e in N if x[e] == 1)
        for e in sorted(zeros):
            trace.add("deleted", element=e)
        for e in sorted(ones):
            trace.add("contracted", element=e)
            if M0.rank({e}) != 1:
                raise InternalError(f"element {e} at value 1 is a loop of M0")
        contracted_weight = sum((w[e] for e in ones), Fraction(0))
        R |= ones
        rest = N - zeros - ones
        if ones or zeros:
            M0 = M0.contract(ones)
            if rest:
                M0 = M0.restrict(rest)
            new_mats = []
            for m in mats:
                g = m.matroid.ground
                O, Z = g & ones, g & zeros
                matroid = m.matroid
                if O:
                    for e in O:
                        if matroid.rank({e}) != 1:
                            raise InternalError(f"element {e} at value 1 is a loop of a side matroid")
                    matroid = matroid.contract(O)
                keep = g - O - Z
                if not keep:
                    continue
                if keep != matroid.ground:
                    matroid = matroid.restrict(keep)
                new_mats.append(_Working(m.ident, matroid, m.q, m.origin))
            mats = new_mats
            new_knaps = []
            for k in knaps:
                O = k.ground & ones
                budget = k.budget - sum((k.cost[e] for e in O), Fraction(0))
                g = k.ground - ones - zeros
                if g:
                    new_knaps.append(
                        _WorkingKnapsack(k.index, g, {e: k.cost[e] for e in g}, budget, k.q)
                    )
            knaps = new_knaps
        N = rest
        if not N:
            break
        x = {e: x[e] for e in N}

        # refinement: split every side matroid along nontrivial tight sets
        i = 0
        while i < len(mats):
            m = mats[i]
            S = find_tight_proper_set(m.matroid, x, cap=cap)
            if S is None:
                i += 1
                continue
            trace.add("refined", matroid=m.ident, origin=m.origin, set=frozenset(S))
            inner = m.matroid.restrict(S)
            outer = m.matroid.contract(S)
            if check:
                if not in_polytope(inner, x, cap) or not in_polytope(outer, x, cap):
                    raise InternalError("refinement split left the polytope")
            mats[i : i + 1] = [
                _Working(next_id, inner, m.q, m.origin),
                _Working(next_id + 1, outer, m.q, m.origin),
            ]
            next_id += 2

        # relaxation: drop one side matroid, else one knapsack
        dropped = False
        for i, m in enumerate(mats):
            xs = sum((x[e] for e in m.matroid.ground), Fraction(0))
            slack = len(m.matroid.ground) - xs
            if xs == m.matroid.rank() and slack < m.q:
                if check:
                    parts = _drop_partition(m.matroid, x)
                    if len(parts) > m.q or PartitionCertificate(parts).problems(m.matroid, m.matroid.ground, m.q):
                        raise InternalError("dropped matroid ground is not q-partitionable")
                trace.add("dropped-matroid", matroid=m.ident, slack=slack)
                del mats[i]
                dropped = True
                break
        if not dropped:
            for i, k in enumerate(knaps):
                xs = sum((x[e] for e in k.ground), Fraction(0))
                slack = len(k.ground) - xs
                if slack <= k.q:
                    trace.add("dropped-knapsack", knapsack=k.index, slack=slack)
                    del knaps[i]
                    dropped = True
                    break
        if not dropped:
            raise NoDroppableConstraint(
                "no side matroid or knapsack can be dropped at a basic solution"
            )
        prev_x = x

    cert = build_certificate(instance, R, lp_optimum, mode=mode)
    return RoundingResult(cert, trace)


def _check_previous_feasible(lp: MatroidLp, x: Mapping, cap) -> None:
    x = {e: x[e] for e in lp.ground}
    if any(v < 0 or v > 1 for v in x.values()):
        raise InternalError("previous point leaves the unit box")
    if lp.basis is not None and sum(x.values(), Fraction(0)) != lp.basis.rank():
        raise InternalError("previous point leaves the basis polytope")
    for tag, M in lp.matroids():
        if not in_polytope(M, x, cap):
            raise InternalError(f"previous point violates matroid {tag}")
    for k in lp.knapsacks:
        if sum((k.cost[e] * x[e] for e in k.ground), Fraction(0)) > k.budget:
            raise InternalError("previous point violates a knapsack")


def round(instance: RoundingInstance, cap: int | None = None, check: bool = True):
    """Returns ``(certificate, trace)``; raises :class:`Infeasible`."""
    res = round_instance(instance, cap=cap, check=check)
    return res.certificate, res.trace
