"""Exact two-phase primal simplex over the rationals.

The tableau is kept fraction-free: every entry is an integer and the true
tableau is ``T / d`` where ``d`` is the determinant of the current basis
(Bareiss/Edmonds integer pivoting).  Each row is scaled to integers once on
input and its slack is rescaled with it, so the starting basis is the
identity and all later divisions are exact.  Bland's rule picks entering and
leaving variables, which rules out cycling and makes every run reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_SENSES = ("<=", ">=", "==")


@dataclass(frozen=True)
class Constraint:
    """``sum(coeffs[v] * x[v]) <sense> rhs``; ``label`` is for bookkeeping only."""

    coeffs: Mapping[Hashable, Fraction]
    sense: str
    rhs: Fraction
    label: object = None

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ValueError(f"unknown sense {self.sense!r}")

    def lhs(self, x: Mapping[Hashable, Fraction]) -> Fraction:
        return sum((Fraction(c) * x.get(v, 0) for v, c in self.coeffs.items()), Fraction(0))

    def satisfied(self, x) -> bool:
        v = self.lhs(x)
        if self.sense == "<=":
            return v <= self.rhs
        if self.sense == ">=":
            return v >= self.rhs
        return v == self.rhs

    def tight(self, x) -> bool:
        return self.lhs(x) == self.rhs


@dataclass
class VertexSolution:
    status: str
    x: dict = field(default_factory=dict)
    objective: Fraction | None = None
    active: list = field(default_factory=list)
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "x": {str(k): _fmt(v) for k, v in sorted(self.x.items())},
            "objective": None if self.objective is None else _fmt(self.objective),
            "active": [repr(c.label) if isinstance(c, Constraint) else repr(c) for c in self.active],
        }


def _fmt(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _lcm_denoms(values) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


class _Tableau:
    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows  # list[list[int]], last entry is the rhs
        self.basis = basis
        self.ncols = ncols
        self.d = 1
        self.pivots = 0
        self.obj_rows: list[list[int]] = []

    def pivot(self, r: int, s: int) -> None:
        prow = self.rows[r]
        p = prow[s]
        d = self.d
        for rows in (self.rows, self.obj_rows):
            for i, row in enumerate(rows):
                if row is prow:
                    continue
                a = row[s]
                if a:
                    rows[i] = [(x * p - a * y) // d for x, y in zip(row, prow)]
                elif p != d:
                    rows[i] = [x * p // d for x in row]
        self.d = p
        if p < 0:
            self.d = -p
            for rows in (self.rows, self.obj_rows):
                for i, row in enumerate(rows):
                    rows[i] = [-x for x in row]
        self.basis[r] = s
        self.pivots += 1

    def entering(self, obj: list[int], allowed) -> int | None:
        for j in allowed:
            if obj[j] < 0:
                return j
        return None

    def leaving(self, s: int) -> int | None:
        best = None
        for i, row in enumerate(self.rows):
            a = row[s]
            if a <= 0:
                continue
            if best is None:
                best = i
                continue
            # compare row[-1]/a with brow[-1]/b; both denominators positive
            brow = self.rows[best]
            lhs = row[-1] * brow[s]
            rhs = brow[-1] * a
            if lhs < rhs or (lhs == rhs and self.basis[i] < self.basis[best]):
                best = i
        return best

    def run(self, obj: list[int], allowed) -> bool:
        """Optimise ``obj``; False when unbounded."""
        while True:
            s = self.entering(obj, allowed)
            if s is None:
                return True
            r = self.leaving(s)
            if r is None:
                return False
            self.pivot(r, s)
            obj = self.obj_rows[self._obj_index]


def simplex_solve(
    constraints: Sequence[Constraint],
    objective: Mapping[Hashable, Fraction],
    variables: Sequence[Hashable],
) -> VertexSolution:
    """Maximise ``objective . x`` subject to ``constraints`` and ``x >= 0``.

    Returns an optimal basic solution in exact rationals, or a solution with
    status ``infeasible`` / ``unbounded``.  The result depends only on the
    order of ``variables`` and ``constraints``.
    """
    variables = list(variables)
    col = {v: j for j, v in enumerate(variables)}
    n = len(variables)
    for c in constraints:
        for v in c.coeffs:
            if v not in col:
                raise KeyError(f"constraint mentions unknown variable {v!r}")

    # normalise: non-negative rhs, integer rows
    norm = []
    for c in constraints:
        coeffs = {col[v]: Fraction(a) for v, a in c.coeffs.items() if a}
        rhs = Fraction(c.rhs)
        sense = c.sense
        if rhs < 0:
            coeffs = {j: -a for j, a in coeffs.items()}
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        scale = _lcm_denoms(list(coeffs.values()) + [rhs])
        norm.append(({j: int(a * scale) for j, a in coeffs.items()}, sense, int(rhs * scale)))

    m = len(norm)
    n_slack = sum(1 for _, s, _ in norm if s != "==")
    n_art = sum(1 for _, s, _ in norm if s != "<=")
    ncols = n + n_slack + n_art
    rows = []
    basis = []
    art_cols = []
    k_slack = n
    k_art = n + n_slack
    for coeffs, sense, rhs in norm:
        row = [0] * (ncols + 1)
        for j, a in coeffs.items():
            row[j] = a
        row[-1] = rhs
        if sense == "<=":
            row[k_slack] = 1
            basis.append(k_slack)
            k_slack += 1
        else:
            if sense == ">=":
                row[k_slack] = -1
                k_slack += 1
            row[k_art] = 1
            basis.append(k_art)
            art_cols.append(k_art)
            k_art += 1
        rows.append(row)

    tab = _Tableau(rows, None, basis, ncols)

    # phase 2 objective row, kept updated through phase 1
    obj_scale = _lcm_denoms(objective.values()) if objective else 1
    z2 = [0] * (ncols + 1)
    for v, c in objective.items():
        if v not in col:
            raise KeyError(f"objective mentions unknown variable {v!r}")
        z2[col[v]] = -int(Fraction(c) * obj_scale)
    tab.obj_rows = [z2]

    if art_cols:
        art_set = set(art_cols)
        z1 = [0] * (ncols + 1)
        for j in art_cols:
            z1[j] = 1
        for i, b in enumerate(basis):
            if b in art_set:
                z1 = [x - y for x, y in zip(z1, rows[i])]
        tab.obj_rows.append(z1)
        tab._obj_index = 1
        tab.run(tab.obj_rows[1], range(ncols))
        z1 = tab.obj_rows.pop()
        if z1[-1] != 0:
            return VertexSolution(INFEASIBLE, pivots=tab.pivots)
        # drive zero-level artificials out of the basis
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] in art_set:
                row = tab.rows[i]
                j = next((j for j in range(n + n_slack) if row[j] != 0), None)
                if j is None:
                    del tab.rows[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, j)
            i += 1
        allowed = range(n + n_slack)
    else:
        allowed = range(ncols)

    tab._obj_index = 0
    if not tab.run(tab.obj_rows[0], allowed):
        return VertexSolution(UNBOUNDED, pivots=tab.pivots)

    d = tab.d
    x = {v: Fraction(0) for v in variables}
    for i, b in enumerate(tab.basis):
        if b < n:
            x[variables[b]] = Fraction(tab.rows[i][-1], d)
    value = Fraction(tab.obj_rows[0][-1], d * obj_scale)
    active = [c for c in constraints if c.tight(x)]
    return VertexSolution(OPTIMAL, x, value, active, pivots=tab.pivots)


def tight_rank(constraints: Sequence[Constraint], x: Mapping, variables: Sequence) -> int:
    """Rank of the constraint rows tight at ``x``, including tight ``x_v >= 0``."""
    variables = list(variables)
    col = {v: j for j, v in enumerate(variables)}
    rows = []
    for c in constraints:
        if c.tight(x):
            r = [Fraction(0)] * len(variables)
            for v, a in c.coeffs.items():
                r[col[v]] += Fraction(a)
            rows.append(r)
    for v in variables:
        if x.get(v, 0) == 0:
            r = [Fraction(0)] * len(variables)
            r[col[v]] = Fraction(1)
            rows.append(r)
    return _row_rank(rows, len(variables))


def _row_rank(rows, width) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    for c in range(width):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        for i in range(rank + 1, len(rows)):
            f = rows[i][c]
            if f:
                f = f / p[c]
                rows[i] = [a - f * b for a, b in zip(rows[i], p)]
        rank += 1
    return rank
