"""Exhaustive oracles for small instances.

These deliberately share nothing with the LP engine beyond the matroid rank
tables: feasibility is decided by subset enumeration and, for the LP value,
by writing out every rank inequality and handing the full system to the
simplex once.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from matround import kernels
from matround.errors import GroundTooLarge
from matround.harness.io import Instance
from matround.intersection import is_q_independent
from matround.matroid import Matroid
from matround.simplex import Constraint, simplex_solve

BRUTE_LIMIT = 20


def independent_masks(M: Matroid) -> np.ndarray:
    n = len(M.elements)
    if n > BRUTE_LIMIT:
        raise GroundTooLarge(f"|N|={n} exceeds {BRUTE_LIMIT}")
    table = M.rank_table()
    pc = kernels.popcounts(n)
    return np.nonzero(table == pc)[0]


def _to_sets(M: Matroid, masks) -> list[frozenset]:
    return [M.set_of(int(m)) for m in masks]


def candidate_sets(M0: Matroid, basis: bool) -> list[frozenset]:
    masks = independent_masks(M0)
    if basis:
        pc = kernels.popcounts(len(M0.elements))
        masks = masks[pc[masks] == M0.rank()]
    return _to_sets(M0, masks)


def _q_ok(M: Matroid, S, q: int) -> bool:
    S = S & M.ground
    if q == 1:
        return M.is_independent(S)
    return is_q_independent(M, S, q)


def brute_force_opt(inst: Instance, relaxed: bool = False):
    """``(best set, value)`` or ``(None, None)`` when nothing is feasible.

    For round problems the feasible sets are bases (or independent sets when
    ``independent``) of the first matroid that are independent in every side
    matroid and within every knapsack budget.  With ``relaxed`` a side
    matroid only needs q-independence; this is the set family the rounding
    output lives in.  For gmdst the value is the minimum tree cost.
    """
    if len(inst.ground) > BRUTE_LIMIT:
        raise GroundTooLarge(f"|N|={len(inst.ground)} exceeds {BRUTE_LIMIT}")
    w = inst.weights
    if inst.problem in ("3mat", "intersect2"):
        first, *rest = inst.matroids
        feasible = [S for S in candidate_sets(first, False) if all(m.is_independent(S) for m in rest)]
    else:
        ri = inst.rounding_instance()
        basis = not inst.independent
        feasible = []
        for S in candidate_sets(ri.M0, basis):
            ok = True
            for s in ri.side:
                q = s.q if relaxed else 1
                if not _q_ok(s.matroid, S, q):
                    ok = False
                    break
            if ok:
                for k in ri.knapsacks:
                    if sum((k.cost[e] for e in S & k.ground), Fraction(0)) > k.budget:
                        ok = False
                        break
            if ok:
                feasible.append(S)
    if not feasible:
        return None, None
    best = max(feasible, key=lambda S: (sum((w[e] for e in S), Fraction(0)), [-e for e in sorted(S)]))
    value = sum((w[e] for e in best), Fraction(0))
    if inst.problem == "gmdst":
        return best, -value
    return best, value


def facet_masks(M: Matroid) -> np.ndarray:
    """Masks of the closed, inseparable sets ``S`` with ``rank(S) < |S|``.

    Loops contribute the singleton rows ``x_e <= 0``.  On the loopless part
    every other rank inequality is implied: ``x(S) <= x(cl S) <= r(cl S) = r(S)``
    for non-closed ``S``, and a separable ``S = T + U`` with
    ``r(S) = r(T) + r(U)`` is the sum of the rows for ``T`` and ``U``.
    """
    n = len(M.elements)
    if n > BRUTE_LIMIT:
        raise GroundTooLarge(f"|N|={n} exceeds {BRUTE_LIMIT}")
    table = M.rank_table()
    pc = kernels.popcounts(n)
    masks = np.arange(1 << n, dtype=np.int64)
    # loops get their own row x_e <= 0; the rest is done on the loopless part
    loops = [1 << i for i in range(n) if table[1 << i] == 0]
    loop_mask = sum(loops)
    keep = (table < pc) & ((masks & loop_mask) == 0)
    for i in range(n):
        b = 1 << i
        if b & loop_mask:
            continue
        keep &= ~(((masks & b) == 0) & (table[masks | b] == table[masks]))
    out = list(loops)
    for S in np.nonzero(keep)[0]:
        S = int(S)
        low = S & -S
        # proper submasks T containing the lowest bit; T = S is excluded
        subs = masks[((masks & S) == masks) & ((masks & low) != 0) & (masks != S)]
        if not np.any(table[subs] + table[S ^ subs] == table[S]):
            out.append(S)
    return np.array(out, dtype=np.int64)


def full_rank_rows(M: Matroid, label) -> list[Constraint]:
    """Every rank inequality of ``M`` that is not implied by the others
    (see :func:`facet_masks`)."""
    table = M.rank_table()
    rows = []
    for mask in facet_masks(M):
        S = M.set_of(int(mask))
        rows.append(Constraint({e: 1 for e in sorted(S)}, "<=", Fraction(int(table[mask])), (label, tuple(sorted(S)))))
    return rows


def materialized_lp(inst: Instance):
    """Constraint list, objective and variable order of the LP relaxation,
    with every rank inequality written out."""
    variables = sorted(inst.ground)
    rows = [Constraint({e: 1}, "<=", Fraction(1), ("bound", e)) for e in variables]
    if inst.problem in ("3mat", "intersect2"):
        for i, m in enumerate(inst.matroids):
            rows += full_rank_rows(m, ("rank", i))
    else:
        ri = inst.rounding_instance()
        rows += full_rank_rows(ri.M0, ("rank", "basis"))
        if not inst.independent:
            rows.append(Constraint({e: 1 for e in variables}, "==", Fraction(ri.M0.rank()), ("basis-equality",)))
        for i, s in enumerate(ri.side):
            rows += full_rank_rows(s.matroid, ("rank", i))
        for i, k in enumerate(ri.knapsacks):
            rows.append(Constraint({e: k.cost[e] for e in sorted(k.ground)}, "<=", k.budget, ("knapsack", i)))
    return rows, {e: inst.weights[e] for e in variables}, variables


def materialized_lp_value(inst: Instance):
    """LP optimum from the fully written-out system, or ``None`` if infeasible."""
    rows, obj, variables = materialized_lp(inst)
    sol = simplex_solve(rows, obj, variables)
    if not sol.optimal:
        return None
    return -sol.objective if inst.problem == "gmdst" else sol.objective
