import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import oracle_bases, oracle_rank, random_matroid, subsets
from matround.errors import (
    ElementOutOfGround,
    EmptyGround,
    GroundTooLarge,
    NotAMatroid,
    OverlappingGrounds,
    WrongPadSize,
)
from matround.matroid import (
    Explicit,
    FreeExtension,
    Graphic,
    LinearRational,
    Partition,
    Uniform,
    bases,
    direct_sum,
    free_extend_and_truncate,
    free_matroid,
    independent_sets,
)

A, B, C, D = 1, 2, 3, 4


def same_matroid(M1, M2):
    assert M1.ground == M2.ground
    for S in subsets(M1.ground):
        assert M1.is_independent(S) == M2.is_independent(S), sorted(S)
        assert M1.rank(S) == M2.rank(S), sorted(S)


def check_axioms(M):
    """Empty set, downward closure and exchange, via the oracle alone."""
    indep = {S for S in subsets(M.ground) if M.is_independent(S)}
    assert frozenset() in indep
    for S in indep:
        for e in S:
            assert S - {e} in indep
    by_size = {}
    for S in indep:
        by_size.setdefault(len(S), []).append(S)
    # exchange between sizes s and s+1 implies the general form
    for s, small in by_size.items():
        for I in small:
            for J in by_size.get(s + 1, []):
                assert any(I | {e} in indep for e in J - I), (sorted(I), sorted(J))


# -- is_independent / rank ----------------------------------------------------


def test_uniform_independence():
    U = Uniform([A, B, C, D], 2)
    assert U.is_independent({A, B})
    assert not U.is_independent({A, B, C})


def test_triangle_is_dependent(triangle):
    assert not triangle.is_independent({1, 2, 3})
    assert triangle.is_independent({1, 2})


def test_out_of_ground_raises(triangle):
    with pytest.raises(ElementOutOfGround):
        triangle.is_independent({1, 9})
    with pytest.raises(ElementOutOfGround):
        triangle.rank({7})


def test_rank_examples(triangle):
    assert Uniform([A, B, C, D], 2).rank({A, B, C, D}) == 2
    assert triangle.rank(set()) == 0
    assert Uniform([A], 1).rank(set()) == 0
    assert triangle.rank({1, 2, 3}) == 2
    assert triangle.rank() == 2


def test_graphic_loops_and_parallel_edges():
    G = Graphic({1: (0, 0), 2: (0, 1), 3: (0, 1), 4: (1, 2)})
    assert not G.is_independent({1})
    assert not G.is_independent({2, 3})
    assert G.rank() == 2
    assert G.rank_table().tolist() == [oracle_rank(G, G.set_of(m)) for m in range(16)]


# -- restrict / delete ----------------------------------------------------------


def test_restrict_examples(triangle):
    U = Uniform([A, B, C, D], 2)
    assert U.restrict({A, B}).rank({A, B}) == 2
    assert triangle.restrict({1, 2}).rank({1, 2}) == 2
    with pytest.raises(EmptyGround):
        U.restrict(set())


def test_restrict_to_whole_ground_is_identity():
    M = random_matroid(3, 8)
    R = M.restrict(M.ground)
    rng = random.Random(0)
    for _ in range(50):
        S = {e for e in M.ground if rng.random() < 0.5}
        assert R.is_independent(S) == M.is_independent(S)
        assert R.rank(S) == M.rank(S)


def test_delete_mirrors_restrict(triangle):
    U = Uniform([A, B, C, D], 2)
    assert U.delete({C, D}).rank({A, B}) == 2
    assert triangle.delete({3}).rank({1, 2}) == 2
    assert triangle.delete(set()).ground == triangle.ground
    with pytest.raises(EmptyGround):
        triangle.delete({1, 2, 3})


# -- contract ----------------------------------------------------------------


def test_contract_examples(triangle):
    assert triangle.contract({1}).rank({2, 3}) == 1
    assert Uniform([A, B, C], 2).contract({A}).rank({B, C}) == 1


def test_contract_empty_is_identity():
    M = random_matroid(5, 7)
    same_matroid(M.contract(set()), M)


def test_graphic_contraction_merges_endpoints(triangle):
    Mc = triangle.contract({1})
    # edges 2 and 3 become parallel
    assert not Mc.is_independent({2, 3})
    assert Mc.is_independent({2})


# -- direct sum / truncate / free extension -------------------------------------


def test_direct_sum_examples(triangle):
    S = direct_sum([Uniform([A], 1), Uniform([B], 1)])
    assert S.rank({A, B}) == 2
    U = Uniform([A, B], 1)
    assert direct_sum([U]) is U
    T = direct_sum([Uniform([10, 11], 1), triangle])
    assert T.rank() == 3
    with pytest.raises(OverlappingGrounds):
        direct_sum([Uniform([A, B], 1), Uniform([B, C], 1)])


def test_truncate_examples(triangle):
    same_matroid(free_matroid(range(5)).truncate(2), Uniform(range(5), 2))
    M = random_matroid(11, 7)
    assert M.truncate(M.rank()) is M
    assert triangle.truncate(1).rank() == 1
    with pytest.raises(ValueError):
        triangle.truncate(-1)


def test_free_extension_examples():
    M0 = Uniform([A], 1)
    hat = free_extend_and_truncate(M0, {9})
    assert set(bases(hat)) == {frozenset({A}), frozenset({9})}
    assert hat.rank() == M0.rank()


def test_free_extension_matches_formula_and_original():
    M0 = random_matroid(21, 8)
    r = M0.rank()
    pad = set(range(100, 100 + r))
    hat = free_extend_and_truncate(M0, pad)
    for S in subsets(hat.ground):
        expected = min(M0.rank(S - pad) + len(S & pad), r)
        assert oracle_rank(hat, S) == expected
        assert hat.rank(S) == expected
    same_matroid(hat.restrict(M0.ground), M0)
    for Bs in oracle_bases(hat):
        assert M0.is_independent(Bs - pad)


def test_free_extension_errors():
    M0 = Uniform([A, B], 1)
    with pytest.raises(WrongPadSize):
        free_extend_and_truncate(M0, {8, 9})
    with pytest.raises(OverlappingGrounds):
        free_extend_and_truncate(M0, {A})


def test_free_extension_minors_match_generic_definition():
    base = random_matroid(2, 6)
    fe = FreeExtension(base, {50, 51, 52}, 4)
    for S in [{1, 50}, {2, 3}, {51}, {1, 2, 3, 50, 51}]:
        S = frozenset(S) & fe.ground
        con = fe.contract(S)
        for T in subsets(fe.ground - S):
            assert con.rank(T) == fe.rank(T | S) - fe.rank(S)
            I_S = fe.max_independent(S)
            assert con.is_independent(T) == fe.is_independent(T | I_S)
        res = fe.restrict(fe.ground - S)
        for T in subsets(res.ground):
            assert res.is_independent(T) == fe.is_independent(T)


# -- explicit -----------------------------------------------------------------


def test_explicit_validation():
    with pytest.raises(NotAMatroid):
        Explicit([A, B], [[A, B]])  # {a} missing
    with pytest.raises(NotAMatroid):
        Explicit([A, B, C], [[A], [B], [C], [A, B]])  # {c} cannot grow
    with pytest.raises(GroundTooLarge):
        Explicit(range(13), [])
    with pytest.raises(ElementOutOfGround):
        Explicit([A], [[B]])


def test_linear_agrees_with_explicit():
    L = LinearRational({1: [1, 0], 2: [0, 1], 3: [1, 1], 4: [2, 0]})
    E = Explicit([1, 2, 3, 4], [[1], [2], [3], [4], [1, 2], [1, 3], [2, 3], [2, 4], [3, 4]])
    same_matroid(L, E)
    L3 = LinearRational({1: ["1/2", 0, 0], 2: [0, "1/3", 0], 3: [1, "2/3", 0], 4: [0, 0, 5]})
    E3 = Explicit(
        [1, 2, 3, 4],
        [S for S in subsets([1, 2, 3, 4]) if len(S) <= 3 and not {1, 2, 3} <= S],
    )
    same_matroid(L3, E3)


def test_independent_sets_and_bases_enumeration(triangle):
    assert set(independent_sets(triangle)) == {S for S in subsets({1, 2, 3}) if len(S) <= 2}
    assert set(bases(triangle)) == {frozenset(p) for p in itertools.combinations([1, 2, 3], 2)}


# -- properties ----------------------------------------------------------------

seeds = st.integers(0, 10**6)


def chain(M, rng, depth):
    """Random nested restrict/contract/truncate/delete chain."""
    for _ in range(depth):
        if len(M.ground) <= 1:
            break
        op = rng.choice(["restrict", "contract", "truncate", "delete"])
        S = frozenset(e for e in M.ground if rng.random() < 0.3)
        if op == "restrict" and S:
            M = M.restrict(S)
        elif op == "contract" and S != M.ground:
            M = M.contract(S)
        elif op == "delete" and S != M.ground:
            M = M.delete(S)
        elif op == "truncate":
            M = M.truncate(rng.randint(0, M.rank()))
    return M


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 8), st.integers(0, 4))
def test_axioms_hold_on_random_constructions(seed, n, depth):
    rng = random.Random(seed)
    M = chain(random_matroid(seed, n), rng, depth)
    check_axioms(M)
    table = M.rank_table().tolist()
    assert table == [oracle_rank(M, M.set_of(m)) for m in range(1 << len(M.ground))]


def test_axioms_on_ten_element_grounds():
    for seed in range(4):
        rng = random.Random(seed)
        M = random_matroid(seed, 10, ("uniform", "partition", "graphic", "linear"))
        check_axioms(M)
        check_axioms(chain(M, rng, 3))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 10))
def test_restriction_and_contraction_rank_identities(seed, n):
    rng = random.Random(seed)
    M = random_matroid(seed, n)
    S = frozenset(e for e in M.ground if rng.random() < 0.5) or frozenset([min(M.ground)])
    rest = M.restrict(S)
    con = M.contract(S)
    for _ in range(100):
        Asub = frozenset(e for e in S if rng.random() < 0.5)
        assert rest.rank(Asub) == M.rank(Asub)
        Bsub = frozenset(e for e in M.ground - S if rng.random() < 0.5)
        assert con.rank(Bsub) == M.rank(Bsub | S) - M.rank(S)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 9))
def test_contraction_does_not_depend_on_chosen_basis(seed, n):
    rng = random.Random(seed)
    M = random_matroid(seed, n)
    S = frozenset(e for e in M.ground if rng.random() < 0.5)
    con = M.contract(S)
    rS = oracle_rank(M, S)
    maximal = [J for J in subsets(S) if len(J) == rS and M.is_independent(J)]
    rest = M.ground - S
    for J in maximal:
        for I in subsets(rest):
            assert con.is_independent(I) == M.is_independent(I | J)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 10))
def test_rank_is_submodular_and_monotone(seed, n):
    rng = random.Random(seed)
    M = random_matroid(seed, n)
    for _ in range(60):
        X = frozenset(e for e in M.ground if rng.random() < 0.5)
        Y = frozenset(e for e in M.ground if rng.random() < 0.5)
        assert M.rank(X) + M.rank(Y) >= M.rank(X | Y) + M.rank(X & Y)
        assert M.rank(X & Y) <= M.rank(X) <= M.rank(X | Y)


def test_partition_blocks_must_be_disjoint():
    with pytest.raises(OverlappingGrounds):
        Partition([([A, B], 1), ([B], 1)])
    P = Partition([([A, B], 1), ([C], 0)])
    assert P.rank() == 1
    assert not P.is_independent({C})
