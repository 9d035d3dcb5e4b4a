"""Oracle-backed matroids, concrete families and derived constructions.

Elements are non-negative integers.  A matroid is immutable after
construction; the only mutable state is a rank memo and a cached rank table
(rank of every subset, indexed by bitmask over the sorted ground set), both
pure functions of the matroid so sharing across threads is harmless.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from matround import kernels
from matround.errors import (
    ElementOutOfGround,
    EmptyGround,
    GroundTooLarge,
    NotAMatroid,
    OverlappingGrounds,
    WrongPadSize,
)

# Largest ground for which a derived table is built from its parent's table.
TABLE_FROM_PARENT_LIMIT = 22
EXPLICIT_LIMIT = 12


class Matroid:
    """Base class; subclasses implement :meth:`_independent`."""

    family = "abstract"

    def __init__(self, ground: Iterable[int]):
        self.ground = frozenset(ground)
        self.elements = tuple(sorted(self.ground))
        self._index = {e: i for i, e in enumerate(self.elements)}
        self._rank_memo: dict[frozenset, int] = {}
        self._table = None
        self.provenance: tuple = (self.family,)

    def __repr__(self):
        return f"<{type(self).__name__} |N|={len(self.ground)}>"

    def __len__(self):
        return len(self.ground)

    # -- subset plumbing ---------------------------------------------------
    def _check(self, S) -> frozenset:
        S = frozenset(S)
        if not S <= self.ground:
            raise ElementOutOfGround(f"elements {sorted(S - self.ground)} not in ground set")
        return S

    def mask_of(self, S) -> int:
        m = 0
        for e in S:
            m |= 1 << self._index[e]
        return m

    def set_of(self, mask: int) -> frozenset:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.elements[i])
            mask >>= 1
            i += 1
        return frozenset(out)

    # -- oracle interface --------------------------------------------------
    def is_independent(self, S) -> bool:
        return self._independent(self._check(S))

    def _independent(self, S: frozenset) -> bool:
        raise NotImplementedError

    def rank(self, S=None) -> int:
        S = self.ground if S is None else self._check(S)
        r = self._rank_memo.get(S)
        if r is None:
            r = self._rank(S)
            self._rank_memo[S] = r
        return r

    def _rank(self, S: frozenset) -> int:
        # greedy augmentation; optimal by the exchange axiom
        indep: list[int] = []
        for e in sorted(S):
            if self._independent(frozenset(indep + [e])):
                indep.append(e)
        return len(indep)

    def max_independent(self, S) -> frozenset:
        """Greedy maximum independent subset of ``S`` in ascending element order."""
        S = self._check(S)
        indep: list[int] = []
        for e in sorted(S):
            if self._independent(frozenset(indep + [e])):
                indep.append(e)
        return frozenset(indep)

    def rank_table(self) -> np.ndarray:
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def _build_table(self) -> np.ndarray:
        return kernels.rank_table_from_oracle(
            len(self.elements), lambda mask: self._independent(self.set_of(mask))
        )

    # -- derivations -------------------------------------------------------
    def restrict(self, S) -> "Matroid":
        S = self._check(S)
        if not S:
            raise EmptyGround("restriction to the empty set")
        if S == self.ground:
            return self
        out = self._restrict(S)
        out.provenance = ("restrict", self.provenance, tuple(sorted(S)))
        return out

    def _restrict(self, S: frozenset) -> "Matroid":
        return Restriction(self, S)

    def contract(self, S) -> "Matroid":
        S = self._check(S)
        if not S:
            return self
        out = self._contract(S)
        out.provenance = ("contract", self.provenance, tuple(sorted(S)))
        return out

    def _contract(self, S: frozenset) -> "Matroid":
        return Contraction(self, S)

    def delete(self, S) -> "Matroid":
        S = self._check(S)
        if S == self.ground:
            raise EmptyGround("deleting the whole ground set")
        return self.restrict(self.ground - S)

    def truncate(self, k: int) -> "Matroid":
        if k < 0:
            raise ValueError("truncation rank must be non-negative")
        if k >= self.rank():
            return self
        out = self._truncate(k)
        out.provenance = ("truncate", self.provenance, k)
        return out

    def _truncate(self, k: int) -> "Matroid":
        return Truncation(self, k)


# ---------------------------------------------------------------------------
# concrete families


class Uniform(Matroid):
    family = "uniform"

    def __init__(self, ground, k: int):
        super().__init__(ground)
        if k < 0:
            raise ValueError("rank bound must be non-negative")
        self.k = k

    def _independent(self, S):
        return len(S) <= self.k

    def _rank(self, S):
        return min(len(S), self.k)

    def _build_table(self):
        return np.minimum(kernels.popcounts(len(self.elements)), self.k).astype(np.int32)

    def _restrict(self, S):
        return Uniform(S, self.k)

    def _contract(self, S):
        return Uniform(self.ground - S, self.k - min(len(S), self.k))

    def _truncate(self, k):
        return Uniform(self.ground, k)


def free_matroid(ground) -> Uniform:
    ground = frozenset(ground)
    return Uniform(ground, len(ground))


class Partition(Matroid):
    """At most ``cap`` elements from each block; blocks cover the ground."""

    family = "partition"

    def __init__(self, blocks: Sequence[tuple[Iterable[int], int]]):
        blocks = [(frozenset(b), int(c)) for b, c in blocks]
        seen: set = set()
        for b, c in blocks:
            if seen & b:
                raise OverlappingGrounds("partition blocks must be disjoint")
            if c < 0:
                raise ValueError("block caps must be non-negative")
            seen |= b
        super().__init__(seen)
        self.blocks = [(b, c) for b, c in blocks if b]

    def _independent(self, S):
        return all(len(S & b) <= c for b, c in self.blocks)

    def _rank(self, S):
        return sum(min(len(S & b), c) for b, c in self.blocks)

    def _build_table(self):
        n = len(self.elements)
        pc = kernels.popcounts(n)
        masks = np.arange(1 << n, dtype=np.int64)
        out = np.zeros(1 << n, dtype=np.int32)
        for b, c in self.blocks:
            out += np.minimum(pc[masks & self.mask_of(b)], c)
        return out

    def _restrict(self, S):
        return Partition([(b & S, c) for b, c in self.blocks])

    def _contract(self, S):
        return Partition(
            [(b - S, max(c - len(b & S), 0)) for b, c in self.blocks]
        )


class Graphic(Matroid):
    """Cycle matroid of a multigraph; each element names one edge."""

    family = "graphic"

    def __init__(self, edges: Mapping[int, tuple]):
        super().__init__(edges.keys())
        self.edges = {e: (u, v) for e, (u, v) in edges.items()}
        verts = sorted({x for uv in self.edges.values() for x in uv}, key=repr)
        self._vid = {v: i for i, v in enumerate(verts)}

    def _forest_size(self, S):
        parent = list(range(len(self._vid)))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        size = 0
        for e in S:
            u, v = self.edges[e]
            a, b = find(self._vid[u]), find(self._vid[v])
            if a != b:
                parent[a] = b
                size += 1
        return size

    def _independent(self, S):
        return self._forest_size(S) == len(S)

    def _rank(self, S):
        return self._forest_size(S)

    def _build_table(self):
        us = [self._vid[self.edges[e][0]] for e in self.elements]
        vs = [self._vid[self.edges[e][1]] for e in self.elements]
        return kernels.graphic_rank_table(len(self.elements), us, vs, len(self._vid))

    def _restrict(self, S):
        return Graphic({e: self.edges[e] for e in S})

    def _contract(self, S):
        rep = {v: v for uv in self.edges.values() for v in uv}

        def find(a):
            while rep[a] != a:
                a = rep[a]
            return a

        for e in sorted(S):
            u, v = self.edges[e]
            a, b = find(u), find(v)
            if a != b:
                rep[a] = b
        return Graphic({e: (find(u), find(v)) for e, (u, v) in self.edges.items() if e not in S})


def _column_rank(columns: list[Sequence[Fraction]]) -> int:
    rows = [list(c) for c in columns]
    rank = 0
    if not rows:
        return 0
    width = len(rows[0])
    for col in range(width):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank]
        for i in range(rank + 1, len(rows)):
            f = rows[i][col]
            if f:
                f = f / p[col]
                rows[i] = [a - f * b for a, b in zip(rows[i], p)]
        rank += 1
    return rank


class LinearRational(Matroid):
    """Column matroid of an exact-rational matrix."""

    family = "linear"

    def __init__(self, columns: Mapping[int, Sequence]):
        super().__init__(columns.keys())
        self.columns = {e: tuple(Fraction(v) for v in col) for e, col in columns.items()}
        if len({len(c) for c in self.columns.values()}) > 1:
            raise ValueError("all columns must have the same length")

    def _rank(self, S):
        return _column_rank([self.columns[e] for e in sorted(S)])

    def _independent(self, S):
        return self._rank(S) == len(S)


class Explicit(Matroid):
    """Matroid given by its full list of independent sets."""

    family = "explicit"

    def __init__(self, ground, independent: Iterable[Iterable[int]]):
        super().__init__(ground)
        if len(self.ground) > EXPLICIT_LIMIT:
            raise GroundTooLarge(
                f"explicit matroids are limited to {EXPLICIT_LIMIT} elements"
            )
        fam = {frozenset(s) for s in independent}
        fam.add(frozenset())
        for s in fam:
            if not s <= self.ground:
                raise ElementOutOfGround(f"independent set {sorted(s)} leaves the ground set")
        self.independent_sets = frozenset(fam)
        self._validate()

    def _validate(self):
        fam = self.independent_sets
        for s in fam:
            for e in s:
                if s - {e} not in fam:
                    raise NotAMatroid(f"family not downward closed at {sorted(s)}")
        # A downward-closed family is a matroid iff its max-size function is
        # submodular; local submodularity over all (X, e, f) is equivalent.
        table = self.rank_table()
        n = len(self.elements)
        masks = np.arange(1 << n, dtype=np.int64)
        for i, j in itertools.combinations(range(n), 2):
            bi, bj = 1 << i, 1 << j
            X = masks[(masks & (bi | bj)) == 0]
            if np.any(table[X | bi] + table[X | bj] < table[X | bi | bj] + table[X]):
                raise NotAMatroid("exchange axiom fails")

    def _independent(self, S):
        return S in self.independent_sets


# ---------------------------------------------------------------------------
# derived matroids


class Restriction(Matroid):
    family = "restriction"

    def __init__(self, parent: Matroid, S):
        super().__init__(S)
        self.parent = parent

    def _independent(self, S):
        return self.parent._independent(S)

    def _rank(self, S):
        return self.parent.rank(S)

    def _build_table(self):
        if len(self.parent.ground) <= TABLE_FROM_PARENT_LIMIT:
            pos = [self.parent._index[e] for e in self.elements]
            return self.parent.rank_table()[kernels.embed_masks(pos)]
        return super()._build_table()

    def _restrict(self, S):
        return Restriction(self.parent, S)


class Contraction(Matroid):
    """``I`` is independent iff ``I ∪ I_S`` is independent in the parent.

    ``I_S`` is the greedy maximum independent subset of ``S`` in ascending
    element order.
    """

    family = "contraction"

    def __init__(self, parent: Matroid, S):
        S = frozenset(S)
        super().__init__(parent.ground - S)
        self.parent = parent
        self.contracted = S
        self.basis_of_contracted = parent.max_independent(S)
        self._rank_contracted = len(self.basis_of_contracted)

    def _independent(self, S):
        return self.parent._independent(S | self.basis_of_contracted)

    def _rank(self, S):
        return self.parent.rank(S | self.contracted) - self._rank_contracted

    def _build_table(self):
        if len(self.parent.ground) <= TABLE_FROM_PARENT_LIMIT:
            pos = [self.parent._index[e] for e in self.elements]
            smask = self.parent.mask_of(self.contracted)
            t = self.parent.rank_table()
            return (t[kernels.embed_masks(pos) | smask] - self._rank_contracted).astype(np.int32)
        return super()._build_table()

    def _contract(self, S):
        return Contraction(self.parent, self.contracted | S)


class Truncation(Matroid):
    family = "truncation"

    def __init__(self, parent: Matroid, k: int):
        super().__init__(parent.ground)
        self.parent = parent
        self.k = k

    def _independent(self, S):
        return len(S) <= self.k and self.parent._independent(S)

    def _rank(self, S):
        return min(self.parent.rank(S), self.k)

    def _build_table(self):
        return np.minimum(self.parent.rank_table(), self.k).astype(np.int32)

    def _truncate(self, k):
        return Truncation(self.parent, k)


def _extract_table(parent_elements, sub: Matroid, index) -> np.ndarray:
    """Rank of ``sub`` evaluated on every mask over ``parent_elements``."""
    n = len(parent_elements)
    masks = np.arange(1 << n, dtype=np.int64)
    sub_mask = np.zeros(1 << n, dtype=np.int64)
    for j, e in enumerate(sub.elements):
        sub_mask |= ((masks >> index[e]) & 1) << j
    return sub.rank_table()[sub_mask]


class DirectSum(Matroid):
    family = "direct_sum"

    def __init__(self, parts: Sequence[Matroid]):
        ground: set = set()
        for m in parts:
            if ground & m.ground:
                raise OverlappingGrounds("direct sum needs pairwise disjoint grounds")
            ground |= m.ground
        super().__init__(ground)
        self.parts = list(parts)

    def _independent(self, S):
        return all(m._independent(S & m.ground) for m in self.parts)

    def _rank(self, S):
        return sum(m.rank(S & m.ground) for m in self.parts)

    def _build_table(self):
        out = np.zeros(1 << len(self.elements), dtype=np.int32)
        for m in self.parts:
            out += _extract_table(self.elements, m, self._index).astype(np.int32)
        return out


class FreeExtension(Matroid):
    """Base matroid plus free pad elements, truncated at ``cap``.

    Rank is ``min(r_base(S ∩ base) + |S ∩ pad|, cap)``.  Closed under
    restriction and contraction, which keeps the pad structure visible to
    the cutting-plane separator.
    """

    family = "free_extension"

    def __init__(self, base: Matroid | None, pad, cap: int):
        pad = frozenset(pad)
        base_ground = base.ground if base is not None else frozenset()
        if base_ground & pad:
            raise OverlappingGrounds("pad elements must be new")
        super().__init__(base_ground | pad)
        self.base = base
        self.pad = pad
        self.cap = cap

    def _split(self, S):
        return S - self.pad, S & self.pad

    def _base_rank(self, A):
        return self.base.rank(A) if A else 0

    def _independent(self, S):
        A, F = self._split(S)
        if len(S) > self.cap:
            return False
        return not A or self.base._independent(A)

    def _rank(self, S):
        A, F = self._split(S)
        return min(self._base_rank(A) + len(F), self.cap)

    def _build_table(self):
        n = len(self.elements)
        masks = np.arange(1 << n, dtype=np.int64)
        pc = kernels.popcounts(n)
        if self.base is not None:
            base_part = _extract_table(self.elements, self.base, self._index)
        else:
            base_part = np.zeros(1 << n, dtype=np.int32)
        pad_counts = pc[masks & self.mask_of(self.pad)]
        return np.minimum(base_part + pad_counts, self.cap).astype(np.int32)

    def _restrict(self, S):
        A, F = self._split(S)
        base = self.base.restrict(A) if A else None
        return FreeExtension(base, F, self.cap)

    def _contract(self, S):
        A, F = self._split(S)
        rho = self._rank(S)
        base = self.base
        if base is not None and base.ground - A:
            base = base.contract(A)
        else:
            base = None
        if self._base_rank(A) + len(F) > self.cap:
            cap = 0
        else:
            cap = self.cap - rho
        return FreeExtension(base, self.pad - F, cap)


# ---------------------------------------------------------------------------
# functional API


def is_independent(M: Matroid, S) -> bool:
    return M.is_independent(S)


def rank(M: Matroid, S) -> int:
    return M.rank(S)


def restrict(M: Matroid, S) -> Matroid:
    return M.restrict(S)


def contract(M: Matroid, S) -> Matroid:
    return M.contract(S)


def delete(M: Matroid, S) -> Matroid:
    return M.delete(S)


def truncate(M: Matroid, k: int) -> Matroid:
    return M.truncate(k)


def direct_sum(Ms: Sequence[Matroid]) -> Matroid:
    if len(Ms) == 1:
        return Ms[0]
    out = DirectSum(Ms)
    out.provenance = ("direct_sum", tuple(m.provenance for m in Ms))
    return out


def free_extend_and_truncate(M0: Matroid, F) -> FreeExtension:
    """Add free pad elements ``F`` to ``M0`` and truncate to ``M0``'s rank.

    Bases of the result meet the original ground in independent sets of
    ``M0``, and every independent set of ``M0`` extends to such a basis.
    """
    F = frozenset(F)
    if F & M0.ground:
        raise OverlappingGrounds("pad elements overlap the ground set")
    r = M0.rank()
    if len(F) != r:
        raise WrongPadSize(f"pad has {len(F)} elements, rank is {r}")
    out = FreeExtension(M0, F, r)
    out.provenance = ("truncate", ("direct_sum", (M0.provenance, ("free",))), r)
    return out


def bases(M: Matroid) -> list[frozenset]:
    """All bases, by enumeration over the rank table."""
    table = M.rank_table()
    r = M.rank()
    pc = kernels.popcounts(len(M.elements))
    hits = np.nonzero((pc == r) & (table == r))[0]
    return [M.set_of(int(m)) for m in hits]


def independent_sets(M: Matroid) -> list[frozenset]:
    table = M.rank_table()
    pc = kernels.popcounts(len(M.elements))
    return [M.set_of(int(m)) for m in np.nonzero(table == pc)[0]]
