import random
from dataclasses import replace
from fractions import Fraction
from types import SimpleNamespace

import pytest
from hypothesis import given, settings, strategies as st

from conftest import oracle_bases, random_matroid, subsets, weight
from matround.errors import Infeasible, LoadViolation, MatroundError
from matround.harness import brute
from matround.harness.generators import gen_fractional, gen_random
from matround.harness.io import parse_instance
from matround.lp import find_tight_proper_set, in_polytope
from matround.matroid import Graphic, Partition, Uniform, independent_sets
from matround.rounding import (
    FAULT_ENV,
    KnapsackConstraint,
    RoundingInstance,
    SideConstraint,
    SolutionCertificate,
    default_q,
    round,
    round_instance,
    validate_load,
    verify_certificate,
)

F = Fraction
A, B, C, D = 1, 2, 3, 4


# -- q-values and load ---------------------------------------------------------


def test_default_q_examples():
    assert default_q([{A, B}, {C}]) == [1, 1]
    assert default_q([{A, B}] * 3) == [3, 3, 3]
    assert default_q([{A, B}, {B, C}, {C, D}]) == [2, 2, 2]
    with pytest.raises(ValueError):
        default_q([])


def _load(grounds_and_q):
    side = [SimpleNamespace(matroid=SimpleNamespace(ground=frozenset(g)), q=q) for g, q in grounds_and_q]
    return validate_load(SimpleNamespace(side=side, knapsacks=[]))


def test_validate_load_examples():
    assert _load([({A}, 2), ({A}, 2)]) == {}
    assert _load([({A}, 1), ({A}, 2)]) == {A: F(3, 2)}
    assert _load([({A}, 3)] * 3) == {}


def test_overloaded_instance_is_rejected():
    M0 = Uniform([A, B], 1)
    with pytest.raises(LoadViolation) as err:
        RoundingInstance(M0, [SideConstraint(Uniform([A], 1), 1), SideConstraint(Uniform([A, B], 1), 2)], [], {A: 1, B: 1})
    assert err.value.report == {A: F(3, 2)}


def test_knapsack_cost_above_budget_is_rejected():
    with pytest.raises(ValueError):
        RoundingInstance(Uniform([A, B], 1), [], [KnapsackConstraint({A}, {A: 2}, 1)], {A: 1, B: 1})


# -- round --------------------------------------------------------------------


def test_triangle_with_global_cap_is_infeasible(triangle):
    inst = RoundingInstance(triangle, [SideConstraint(Uniform([1, 2, 3], 1), 1)], [], {1: 1, 2: 1, 3: 1})
    with pytest.raises(Infeasible):
        round(inst)


def test_round_with_two_independent_partition():
    P = Partition([([A, B], 1), ([C], 1)])
    inst = RoundingInstance(Uniform([A, B, C], 2), [SideConstraint(P, 2)], [], {A: 1, B: 1, C: 0})
    cert, trace = round(inst)
    assert len(cert.R) == 2
    # x_a + x_b <= 1 in the LP, so its optimum is 1
    assert cert.lp_optimum == 1
    assert cert.weight >= cert.lp_optimum
    assert cert.R == {A, C}
    assert verify_certificate(inst, cert) == []
    assert len(cert.partitions[0]) <= 2
    assert trace.within_bounds()


def test_round_knapsack_bound():
    inst = RoundingInstance(
        Uniform([A, B, C], 2), [], [KnapsackConstraint({A, B, C}, {A: 1, B: 1, C: 0}, 1, 1)], {A: 1, B: 1, C: 1}
    )
    cert, trace = round(inst)
    assert len(cert.R) == 2
    cost = sum(inst.knapsacks[0].cost[e] for e in cert.R)
    assert cost <= 1 + 1 * 1
    assert cert.knapsacks[0]["bound"] == 2
    assert verify_certificate(inst, cert) == []
    # with every cost 1 no basis of size 2 fits a budget of 1, even fractionally
    tight = RoundingInstance(
        Uniform([A, B, C], 2), [], [KnapsackConstraint({A, B, C}, {A: 1, B: 1, C: 1}, 1, 1)], {A: 1, B: 1, C: 1}
    )
    with pytest.raises(Infeasible):
        round(tight)


def test_no_side_constraints_gives_max_weight_basis():
    for seed in range(10):
        M0 = random_matroid(seed, 7, ("uniform", "partition", "graphic", "linear"))
        rng = random.Random(seed)
        w = {e: F(rng.randint(-4, 9)) for e in M0.ground}
        cert, trace = round(RoundingInstance(M0, [], [], w))
        best = max(weight(w, S) for S in oracle_bases(M0))
        assert cert.weight == best == cert.lp_optimum
        assert trace.iterations == 1


def test_empty_side_ground_is_ignored():
    M0 = Uniform([A, B], 1)
    P = Partition([([], 1)])
    cert, _ = round(RoundingInstance(M0, [SideConstraint(P, 1)], [], {A: 1, B: 2}))
    assert cert.R == {B}


def _round_docs():
    for seed in range(24):
        if seed % 2:
            yield gen_fractional(seed, size=4 + seed % 7, k=2 + seed % 2, t=seed % 3)
        else:
            yield gen_random(seed, size=4 + seed % 8, k=seed % 4, t=seed % 3, random_q=seed % 4 == 0)


@pytest.mark.parametrize("doc", list(_round_docs()), ids=lambda d: d["problem"])
def test_round_end_to_end_against_oracles(doc):
    inst = parse_instance(doc)
    ri = inst.rounding_instance()
    lp_value = brute.materialized_lp_value(inst)
    if lp_value is None:
        with pytest.raises(Infeasible):
            round_instance(ri)
        return
    res = round_instance(ri)
    cert, trace = res.certificate, res.trace
    assert verify_certificate(ri, cert) == []
    assert cert.lp_optimum == lp_value
    assert cert.weight >= lp_value
    assert cert.R in set(oracle_bases(ri.M0))
    _, int_opt = brute.brute_force_opt(inst)
    if int_opt is not None:
        assert int_opt <= lp_value
    assert trace.iterations <= trace.iteration_bound
    assert trace.within_bounds()
    assert trace.count("dropped-knapsack") <= trace.t
    assert sum(trace.refinements_by_origin()) <= sum(len(s.matroid.ground) for s in ri.side)
    # a second run is identical
    again = round_instance(ri)
    assert again.certificate == cert
    assert [e.to_json() for e in again.trace.events] == trace.to_json()


def test_fractional_generator_exercises_refine_and_drop():
    refined = dropped = 0
    for seed in range(12):
        ri = parse_instance(gen_fractional(seed, size=8, k=2)).rounding_instance()
        try:
            trace = round_instance(ri).trace
        except Infeasible:
            continue
        refined += trace.count("refined")
        dropped += trace.count("dropped-matroid")
    assert refined > 0 and dropped > 0


def test_unchecked_run_gives_same_answer():
    ri = parse_instance(gen_fractional(5, size=9, k=3)).rounding_instance()
    assert round_instance(ri, check=False).certificate == round_instance(ri).certificate


# -- certificates ----------------------------------------------------------------


@pytest.fixture
def solved():
    ri = parse_instance(gen_fractional(1, size=8, k=2)).rounding_instance()
    return ri, round_instance(ri).certificate


def test_certificate_json_round_trip(solved):
    ri, cert = solved
    back = SolutionCertificate.from_json(cert.to_json())
    assert back.R == cert.R and back.weight == cert.weight
    assert verify_certificate(ri, back) == []


def test_tampered_partition_is_caught(solved):
    ri, cert = solved
    i = next(i for i, s in enumerate(ri.side) if cert.R & s.matroid.ground)
    M = ri.side[i].matroid
    dependent = next(S for S in subsets(M.ground) if not M.is_independent(S))
    parts = list(cert.partitions)
    parts[i] = [dependent] + [p - dependent for p in parts[i]]
    fails = verify_certificate(ri, replace(cert, partitions=parts))
    assert any("part not independent" in f for f in fails)


def test_missing_basis_element_is_caught(solved):
    ri, cert = solved
    e = min(cert.R)
    fails = verify_certificate(ri, replace(cert, R=cert.R - {e}))
    assert any("not a basis" in f for f in fails)


def test_tampered_objective_is_caught(solved):
    ri, cert = solved
    assert verify_certificate(ri, replace(cert, weight=cert.weight + 1))
    assert verify_certificate(ri, replace(cert, lp_optimum=cert.weight + 1))
    assert verify_certificate(ri, replace(cert, rank_R=cert.rank_R + 1))


def test_tampered_knapsack_record_is_caught():
    ri = parse_instance(gen_random(3, size=8, k=1, t=2)).rounding_instance()
    cert = round_instance(ri).certificate
    knaps = [dict(k) for k in cert.knapsacks]
    knaps[0]["cost"] = knaps[0]["cost"] + 1
    assert any("recorded cost" in f for f in verify_certificate(ri, replace(cert, knapsacks=knaps)))


def test_threshold_rounding_fault_is_detected(monkeypatch):
    monkeypatch.setenv(FAULT_ENV, "round-half-up")
    caught = 0
    for seed in range(15):
        ri = parse_instance(gen_fractional(seed, size=8, k=2)).rounding_instance()
        try:
            cert = round_instance(ri, check=False).certificate
        except Infeasible:
            continue
        except MatroundError:
            caught += 1
            continue
        caught += bool(verify_certificate(ri, cert))
    assert caught > 0


# -- refinement and gluing ------------------------------------------------------


def _point_in(M, rng, draws=4):
    """Average of a few random independent sets, so a point of P(M)."""
    fam = independent_sets(M)
    picks = [rng.choice(fam) for _ in range(draws)]
    return {e: F(sum(e in S for S in picks), draws) for e in M.ground}


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 8))
def test_tight_split_keeps_point_feasible(seed, n):
    rng = random.Random(seed)
    M = random_matroid(seed, n)
    x = _point_in(M, rng)
    assert in_polytope(M, x)
    S = find_tight_proper_set(M, x)
    if S is None:
        return
    assert sum(x[e] for e in S) == M.rank(S)
    assert in_polytope(M.restrict(S), {e: x[e] for e in S})
    assert in_polytope(M.contract(S), {e: x[e] for e in M.ground - S})


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 8))
def test_gluing_feasible_halves_stays_feasible(seed, n):
    rng = random.Random(seed)
    M = random_matroid(seed, n)
    y = _point_in(M, rng)
    S = find_tight_proper_set(M, y)
    if S is None:
        return
    y1 = _point_in(M.restrict(S), rng)
    y2 = _point_in(M.contract(S), rng)
    assert in_polytope(M, {**y1, **y2})


def test_graphic_round_respects_side_cap():
    G = Graphic({1: (0, 1), 2: (1, 2), 3: (0, 2), 4: (2, 3)})
    side = [SideConstraint(Uniform([1, 2], 1), 1)]
    cert, trace = round(RoundingInstance(G, side, [], {1: 3, 2: 3, 3: 1, 4: 1}))
    assert G.is_independent(cert.R) and len(cert.R) == 3
    assert {3, 4} <= cert.R and len(cert.R & {1, 2}) == 1
    assert cert.weight == cert.lp_optimum == 5
