"""Pure-Python versions of the bitmask kernels.

Subsets of an ordered ground set are encoded as integer masks, bit ``i``
standing for the ``i``-th smallest element.  Every function here has a twin
in ``_ckernels.pyx`` with identical results.
"""
import numpy as np


def rank_table_from_oracle(n, oracle):
    """Rank of every subset of an ``n``-element ground set.

    ``oracle(mask)`` is consulted only for masks all of whose one-smaller
    subsets are independent; downward closure settles the rest.
    """
    size = 1 << n
    ranks = [0] * size
    indep = [False] * size
    indep[0] = True
    for mask in range(1, size):
        best = 0
        all_sub = True
        m = mask
        while m:
            low = m & -m
            sub = mask ^ low
            if not indep[sub]:
                all_sub = False
            if ranks[sub] > best:
                best = ranks[sub]
            m ^= low
        if all_sub and oracle(mask):
            indep[mask] = True
            ranks[mask] = best + 1
        else:
            ranks[mask] = best
    return np.array(ranks, dtype=np.int32)


def graphic_rank_table(n, us, vs, nverts):
    size = 1 << n
    ranks = [0] * size
    us = [int(u) for u in us]
    vs = [int(v) for v in vs]
    for mask in range(1, size):
        parent = list(range(nverts))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        count = 0
        m = mask
        i = 0
        while m:
            if m & 1:
                a, b = find(us[i]), find(vs[i])
                if a != b:
                    parent[a] = b
                    count += 1
            m >>= 1
            i += 1
        ranks[mask] = count
    return np.array(ranks, dtype=np.int32)


def _lex_smaller(a, b):
    low = (a ^ b) & -(a ^ b)
    return bool(a & low)


def min_slack_subset(ranks, xs, scale, proper):
    """Minimise ``scale * rank(S) - X(S)`` over nonempty (proper) masks.

    Ties go to the smaller cardinality, then to the lexicographically
    smaller sorted element tuple.  Returns ``(mask, value)``, or
    ``(-1, 0)`` when no admissible mask exists.
    """
    n = len(xs)
    size = 1 << n
    full = size - 1
    sums = [0] * size
    best_mask, best_val, best_card = -1, 0, 0
    for mask in range(1, size):
        low = mask & -mask
        sums[mask] = sums[mask ^ low] + xs[low.bit_length() - 1]
        if proper and mask == full:
            continue
        val = scale * int(ranks[mask]) - sums[mask]
        card = bin(mask).count("1")
        if (
            best_mask < 0
            or val < best_val
            or (val == best_val and card < best_card)
            or (val == best_val and card == best_card and _lex_smaller(mask, best_mask))
        ):
            best_mask, best_val, best_card = mask, val, card
    return best_mask, best_val


def first_q_violation(ranks, q):
    """Smallest mask with ``|T| > q * rank(T)``, or -1."""
    for mask in range(1, len(ranks)):
        if bin(mask).count("1") > q * int(ranks[mask]):
            return mask
    return -1
