"""Weighted two-matroid intersection and matroid partitioning."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from matround import kernels
from matround.errors import (
    FractionalVertex,
    GroundTooLarge,
    InternalError,
    NotPartitionable,
)
from matround.lp import OPTIMAL, MatroidLp, solve_matroid_lp
from matround.matroid import Matroid

Q_INDEPENDENCE_LIMIT = 20


@dataclass
class PartitionCertificate:
    parts: list

    def problems(self, M: Matroid, S, q: int) -> list[str]:
        """Reasons this is not a valid partition of ``S``; empty when valid."""
        S = frozenset(S)
        out = []
        if len(self.parts) > q:
            out.append(f"{len(self.parts)} parts exceed q={q}")
        seen: set = set()
        for p in self.parts:
            p = frozenset(p)
            if seen & p:
                out.append(f"parts overlap on {sorted(seen & p)}")
            seen |= p
            if not p <= M.ground or not M.is_independent(p):
                out.append(f"part not independent: {sorted(p)}")
        if seen != S:
            out.append(f"parts cover {sorted(seen)} instead of {sorted(S)}")
        return out


def weighted_intersection(M1: Matroid, M2: Matroid, w: Mapping) -> frozenset:
    """Maximum-weight common independent set of two matroids on one ground.

    Solved as an LP over the intersection of the two independence polytopes,
    whose vertices are integral.
    """
    if M1.ground != M2.ground:
        raise ValueError("both matroids must share one ground set")
    if not M1.ground:
        return frozenset()
    lp = MatroidLp(M1.ground, {e: Fraction(w[e]) for e in M1.ground}, None, [M1, M2])
    sol = solve_matroid_lp(lp)
    if sol.status != OPTIMAL:
        raise InternalError(f"intersection LP returned {sol.status}")
    frac = {e: v for e, v in sol.x.items() if v not in (0, 1)}
    if frac:
        raise FractionalVertex(f"fractional coordinates {frac}")
    return frozenset(e for e, v in sol.x.items() if v == 1)


def is_q_independent(M: Matroid, S, q: int) -> bool:
    """Whether ``|T| <= q * rank(T)`` for every ``T ⊆ S`` (exhaustive)."""
    S = M._check(S)
    if len(S) > Q_INDEPENDENCE_LIMIT:
        raise GroundTooLarge(f"|S|={len(S)} exceeds {Q_INDEPENDENCE_LIMIT}")
    if not S:
        return True
    return kernels.first_q_violation(M.restrict(S).rank_table(), q) < 0


def partition(M: Matroid, S, q: int) -> PartitionCertificate:
    """Split ``S`` into at most ``q`` independent sets of ``M``.

    Elements are inserted in ascending order; each insertion follows a
    shortest augmenting path in the exchange graph of the current parts.
    Raises :class:`NotPartitionable` when no such split exists.
    """
    S = M._check(S)
    if q < 1:
        raise ValueError("q must be at least 1")
    parts: list[set] = [set() for _ in range(q)]
    where: dict = {}
    indep = M._independent

    for s in sorted(S):
        parent: dict = {s: None}
        queue = deque([s])
        found = None
        while queue and found is None:
            y = queue.popleft()
            for j in range(q):
                if where.get(y) == j:
                    continue
                part = parts[j]
                if indep(frozenset(part) | {y}):
                    found = (y, j)
                    break
                for z in sorted(part):
                    if z not in parent and indep((frozenset(part) - {z}) | {y}):
                        parent[z] = (y, j)
                        queue.append(z)
        if found is None:
            raise NotPartitionable(s, [frozenset(p) for p in parts if p])
        y, j = found
        while True:
            old = where.get(y)
            if old is not None:
                parts[old].discard(y)
            parts[j].add(y)
            where[y] = j
            if parent[y] is None:
                break
            y, j = parent[y]
        for p in parts:
            if not indep(frozenset(p)):
                raise InternalError("augmenting path produced a dependent part")
    return PartitionCertificate([frozenset(p) for p in parts if p])
