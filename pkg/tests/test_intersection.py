import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_matroid, subsets, weight
from matround.errors import GroundTooLarge, NotPartitionable
from matround.intersection import (
    PartitionCertificate,
    is_q_independent,
    partition,
    weighted_intersection,
)
from matround.lp import MatroidLp, solve_matroid_lp
from matround.matroid import Partition, Uniform

F = Fraction
A, B, C = 1, 2, 3


def brute_intersection(M1, M2, w):
    return max(weight(w, S) for S in subsets(M1.ground) if M1.is_independent(S) and M2.is_independent(S))


def brute_partitionable(M, S, q):
    """Try every assignment of ``S`` to ``q`` colours."""
    S = sorted(S)
    for colours in itertools.product(range(q), repeat=len(S)):
        parts = [frozenset(e for e, c in zip(S, colours) if c == j) for j in range(q)]
        if all(M.is_independent(p) for p in parts):
            return True
    return False


# -- weighted intersection ------------------------------------------------------


def test_intersection_examples():
    U = Uniform([A, B], 1)
    assert weighted_intersection(U, U, {A: 2, B: 1}) == {A}
    M1 = Partition([([A, B], 1)])
    M2 = Partition([([A], 1), ([B], 1)])
    R = weighted_intersection(M1, M2, {A: 1, B: 1})
    assert len(R) == 1 and brute_intersection(M1, M2, {A: 1, B: 1}) == 1
    assert weighted_intersection(U, U, {A: -1, B: -3}) == frozenset()


def test_intersection_needs_one_ground():
    with pytest.raises(ValueError):
        weighted_intersection(Uniform([A], 1), Uniform([B], 1), {A: 1, B: 1})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 9))
def test_intersection_is_integral_and_optimal(seed, n):
    rng = random.Random(seed)
    M1 = random_matroid(seed, n)
    M2 = random_matroid(seed + 1, n)
    w = {e: F(rng.randint(-2, 8)) for e in M1.ground}
    sol = solve_matroid_lp(MatroidLp(M1.ground, w, None, [M1, M2]))
    assert all(v in (0, 1) for v in sol.x.values())
    R = weighted_intersection(M1, M2, w)
    assert M1.is_independent(R) and M2.is_independent(R)
    assert weight(w, R) == brute_intersection(M1, M2, w) == sol.objective


# -- q-independence and partitioning -----------------------------------------------


def test_q_independence_examples():
    M = random_matroid(0, 6)
    I = M.max_independent(M.ground)
    assert is_q_independent(M, I, 1)
    assert not is_q_independent(Uniform([A, B, C], 1), {A, B, C}, 2)
    assert is_q_independent(Uniform([A, B], 1), {A, B}, 2)
    assert is_q_independent(M, set(), 1)
    with pytest.raises(GroundTooLarge):
        is_q_independent(Uniform(range(21), 21), range(21), 1)


def test_partition_examples(triangle):
    M = random_matroid(4, 7)
    I = M.max_independent(M.ground)
    assert partition(M, I, 3).parts == [I]
    assert sorted(partition(Uniform([A, B], 1), {A, B}, 2).parts, key=min) == [{A}, {B}]
    cert = partition(triangle, {1, 2, 3}, 2)
    assert len(cert.parts) == 2 and cert.problems(triangle, {1, 2, 3}, 2) == []
    assert brute_partitionable(triangle, {1, 2, 3}, 2)


def test_not_partitionable():
    with pytest.raises(NotPartitionable) as err:
        partition(Uniform([A, B, C], 1), {A, B, C}, 2)
    assert err.value.element == C
    with pytest.raises(ValueError):
        partition(Uniform([A], 1), {A}, 0)


def test_certificate_problems():
    U = Uniform([A, B, C], 1)
    assert PartitionCertificate([{A, B}, {C}]).problems(U, {A, B, C}, 2)
    assert PartitionCertificate([{A}, {B}, {C}]).problems(U, {A, B, C}, 2)
    assert PartitionCertificate([{A}, {A}]).problems(U, {A}, 2)
    assert PartitionCertificate([{A}]).problems(U, {A, B}, 2)
    assert PartitionCertificate([{A}, {B}]).problems(U, {A, B}, 2) == []


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 8), st.integers(1, 3))
def test_partition_iff_q_independent(seed, n, q):
    rng = random.Random(seed)
    M = random_matroid(seed, n)
    S = frozenset(e for e in M.ground if rng.random() < 0.7)
    expected = is_q_independent(M, S, q)
    try:
        cert = partition(M, S, q)
    except NotPartitionable:
        assert not expected
    else:
        assert expected
        assert cert.problems(M, S, q) == []
    if len(S) <= 7:
        assert brute_partitionable(M, S, q) == expected
