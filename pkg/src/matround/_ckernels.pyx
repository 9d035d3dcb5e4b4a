# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bitmask kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np

from libc.stdint cimport int32_t, int64_t
from libc.stdlib cimport malloc, free


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


def rank_table_from_oracle(int n, oracle):
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    ranks = np.zeros(size, dtype=np.int32)
    indep_arr = np.zeros(size, dtype=np.uint8)
    cdef int32_t[::1] r = ranks
    cdef unsigned char[::1] ind = indep_arr
    cdef Py_ssize_t mask, m, low, sub
    cdef int32_t best
    cdef bint all_sub
    ind[0] = 1
    for mask in range(1, size):
        best = 0
        all_sub = True
        m = mask
        while m:
            low = m & -m
            sub = mask ^ low
            if not ind[sub]:
                all_sub = False
            if r[sub] > best:
                best = r[sub]
            m ^= low
        if all_sub and oracle(mask):
            ind[mask] = 1
            r[mask] = best + 1
        else:
            r[mask] = best
    return ranks


cdef inline int _find(int* parent, int a) nogil:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def graphic_rank_table(int n, us, vs, int nverts):
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    ranks = np.zeros(size, dtype=np.int32)
    cdef int32_t[::1] r = ranks
    cdef int32_t[::1] u = np.ascontiguousarray(us, dtype=np.int32)
    cdef int32_t[::1] v = np.ascontiguousarray(vs, dtype=np.int32)
    cdef int* parent = <int*>malloc(max(nverts, 1) * sizeof(int))
    cdef Py_ssize_t mask
    cdef unsigned long long m
    cdef int i, a, b, count, j
    try:
        with nogil:
            for mask in range(1, size):
                for j in range(nverts):
                    parent[j] = j
                count = 0
                m = mask
                while m:
                    i = __builtin_ctzll(m)
                    a = _find(parent, u[i])
                    b = _find(parent, v[i])
                    if a != b:
                        parent[a] = b
                        count += 1
                    m &= m - 1
                r[mask] = count
    finally:
        free(parent)
    return ranks


def min_slack_subset(const int32_t[::1] ranks, const int64_t[::1] xs, int64_t scale, bint proper):
    cdef int n = xs.shape[0]
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    cdef Py_ssize_t full = size - 1
    cdef int64_t* sums = <int64_t*>malloc(size * sizeof(int64_t))
    cdef Py_ssize_t mask, low, diff
    cdef Py_ssize_t best_mask = -1
    cdef int64_t best_val = 0, val
    cdef int best_card = 0, card
    cdef bint better
    try:
        with nogil:
            sums[0] = 0
            for mask in range(1, size):
                low = mask & -mask
                sums[mask] = sums[mask ^ low] + xs[__builtin_ctzll(<unsigned long long>mask)]
                if proper and mask == full:
                    continue
                val = scale * ranks[mask] - sums[mask]
                card = __builtin_popcountll(<unsigned long long>mask)
                if best_mask < 0 or val < best_val:
                    better = True
                elif val == best_val and card < best_card:
                    better = True
                elif val == best_val and card == best_card:
                    diff = mask ^ best_mask
                    better = (mask & (diff & -diff)) != 0
                else:
                    better = False
                if better:
                    best_mask = mask
                    best_val = val
                    best_card = card
    finally:
        free(sums)
    return best_mask, best_val


def first_q_violation(const int32_t[::1] ranks, int64_t q):
    cdef Py_ssize_t size = ranks.shape[0]
    cdef Py_ssize_t mask, found = -1
    with nogil:
        for mask in range(1, size):
            if __builtin_popcountll(<unsigned long long>mask) > q * ranks[mask]:
                found = mask
                break
    return found
