"""Shared fixtures and oracle helpers.

The helpers here only touch a matroid through ``is_independent``, so they
stay independent of the rank tables and kernels under test.
"""
import itertools
import random
from fractions import Fraction

import pytest

from matround.harness.generators import random_matroid_json
from matround.harness.io import matroid_from_json
from matround.matroid import Graphic

F = Fraction


def subsets(ground):
    ground = sorted(ground)
    for r in range(len(ground) + 1):
        for c in itertools.combinations(ground, r):
            yield frozenset(c)


def oracle_rank(M, S):
    """Largest independent subset of ``S`` by enumeration."""
    best = 0
    for T in subsets(S):
        if len(T) > best and M.is_independent(T):
            best = len(T)
    return best


def oracle_bases(M):
    indep = [S for S in subsets(M.ground) if M.is_independent(S)]
    r = max(len(S) for S in indep)
    return {S for S in indep if len(S) == r}


def weight(w, S):
    return sum((Fraction(w[e]) for e in S), Fraction(0))


def random_matroid(seed, n, families=("uniform", "partition", "graphic", "linear", "explicit")):
    rng = random.Random(seed)
    ground = list(range(1, n + 1))
    return matroid_from_json(random_matroid_json(rng, ground, families))


@pytest.fixture
def triangle():
    # edges 1, 2, 3 of a triangle on vertices 0, 1, 2
    return Graphic({1: (0, 1), 2: (1, 2), 3: (0, 2)})


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
