import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from matround.simplex import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    Constraint,
    simplex_solve,
    tight_rank,
)

F = Fraction


def solve_square(rows, rhs):
    """Exact Gauss-Jordan; None when singular."""
    n = len(rows)
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def vertex_enumeration(cons, obj, variables):
    """Best objective over all basic feasible points (bounded LPs only)."""
    rows = []
    for c in cons:
        r = [F(c.coeffs.get(v, 0)) for v in variables]
        rows.append((r, F(c.rhs), c))
    for j, _ in enumerate(variables):
        e = [F(0)] * len(variables)
        e[j] = F(1)
        rows.append((e, F(0), None))
    best = None
    for pick in itertools.combinations(rows, len(variables)):
        x = solve_square([p[0] for p in pick], [p[1] for p in pick])
        if x is None:
            continue
        pt = dict(zip(variables, x))
        if any(v < 0 for v in x) or not all(c.satisfied(pt) for c in cons):
            continue
        val = sum(F(obj.get(v, 0)) * pt[v] for v in variables)
        if best is None or val > best:
            best = val
    return best


def test_single_variable():
    sol = simplex_solve([Constraint({"x": 1}, "<=", F(1))], {"x": 1}, ["x"])
    assert sol.status == OPTIMAL
    assert sol.x == {"x": 1} and sol.objective == 1


def test_half_integral_polygon():
    cons = [
        Constraint({1: 1, 2: 1}, "<=", F(3, 2)),
        Constraint({1: 1}, "<=", F(1)),
        Constraint({2: 1}, "<=", F(1)),
    ]
    sol = simplex_solve(cons, {1: 1, 2: 1}, [1, 2])
    assert sol.objective == F(3, 2)
    assert sorted(sol.x.values()) == [F(1, 2), F(1)]
    assert vertex_enumeration(cons, {1: 1, 2: 1}, [1, 2]) == F(3, 2)
    assert tight_rank(cons, sol.x, [1, 2]) == 2


def test_infeasible_and_unbounded():
    assert simplex_solve([Constraint({"x": 1}, "<=", F(-1))], {"x": 1}, ["x"]).status == INFEASIBLE
    assert simplex_solve([Constraint({"x": 1}, ">=", F(1))], {"x": 1}, ["x"]).status == UNBOUNDED


def test_equalities_and_negative_rhs():
    cons = [
        Constraint({1: 1, 2: 1, 3: 1}, "==", F(2)),
        Constraint({1: -1, 2: -1}, ">=", F(-1)),
        Constraint({3: 1}, "<=", F(1)),
    ]
    sol = simplex_solve(cons, {1: 3, 2: 1, 3: 1}, [1, 2, 3])
    assert sol.x == {1: 1, 2: 0, 3: 1}
    assert sol.objective == 4


def test_bad_inputs():
    with pytest.raises(ValueError):
        Constraint({1: 1}, "<", F(1))
    with pytest.raises(KeyError):
        simplex_solve([Constraint({"y": 1}, "<=", F(1))], {"x": 1}, ["x"])


def test_deterministic():
    rng = random.Random(4)
    cons = [
        Constraint({j: F(rng.randint(0, 3)) for j in range(4)}, "<=", F(rng.randint(1, 5)))
        for _ in range(5)
    ] + [Constraint({j: 1}, "<=", F(1)) for j in range(4)]
    obj = {j: F(1) for j in range(4)}
    a = simplex_solve(cons, obj, range(4))
    b = simplex_solve(cons, obj, range(4))
    assert a.x == b.x and a.pivots == b.pivots


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 5))
def test_random_bounded_lps_match_vertex_enumeration(seed, n, m):
    rng = random.Random(seed)
    variables = list(range(n))
    cons = [Constraint({j: 1}, "<=", F(rng.randint(1, 3))) for j in variables]
    for _ in range(m):
        coeffs = {j: F(rng.randint(-3, 4), rng.randint(1, 3)) for j in variables}
        sense = rng.choice(["<=", "<=", ">=", "=="])
        cons.append(Constraint(coeffs, sense, F(rng.randint(-2, 6), rng.randint(1, 2))))
    obj = {j: F(rng.randint(-4, 5)) for j in variables}
    sol = simplex_solve(cons, obj, variables)
    best = vertex_enumeration(cons, obj, variables)
    if best is None:
        assert sol.status == INFEASIBLE
        return
    assert sol.status == OPTIMAL
    assert sol.objective == best
    assert all(c.satisfied(sol.x) for c in cons)
    assert all(v >= 0 for v in sol.x.values())
    assert tight_rank(cons, sol.x, variables) == n


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_random_lps_agree_with_scipy(seed):
    linprog = pytest.importorskip("scipy.optimize").linprog
    rng = random.Random(seed)
    n = rng.randint(2, 7)
    variables = list(range(n))
    cons = [Constraint({j: 1}, "<=", F(1)) for j in variables]
    for _ in range(rng.randint(1, 6)):
        coeffs = {j: F(rng.randint(0, 4)) for j in variables}
        cons.append(Constraint(coeffs, "<=", F(rng.randint(1, 8), 2)))
    obj = {j: F(rng.randint(-2, 6)) for j in variables}
    sol = simplex_solve(cons, obj, variables)
    A = [[float(c.coeffs.get(j, 0)) for j in variables] for c in cons]
    b = [float(c.rhs) for c in cons]
    ref = linprog([-float(obj[j]) for j in variables], A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
    assert sol.status == OPTIMAL and ref.status == 0
    assert float(sol.objective) == pytest.approx(-ref.fun, abs=1e-7)


def test_to_json_uses_rational_strings():
    sol = simplex_solve([Constraint({1: 2}, "<=", F(1))], {1: 1}, [1])
    doc = sol.to_json()
    assert doc["x"] == {"1": "1/2"} and doc["objective"] == "1/2"
