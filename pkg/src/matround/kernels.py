"""Backend selection for the bitmask kernels.

The compiled module is used when it was built; otherwise, or when the
environment variable ``MATROUND_PURE_PYTHON`` is set, the pure-Python twin
is used.  Both produce identical results.
"""
import math
import os

import numpy as np

from matround import _pykernels

_INT64_HEADROOM = 1 << 62

try:
    if os.environ.get("MATROUND_PURE_PYTHON"):
        raise ImportError("pure Python backend requested")
    from matround import _ckernels
except ImportError:
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"
_impl = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    return out


def rank_table_from_oracle(n, oracle):
    return _impl.rank_table_from_oracle(n, oracle)


def graphic_rank_table(n, us, vs, nverts):
    return _impl.graphic_rank_table(n, us, vs, nverts)


def scale_to_integers(values):
    """Common denominator ``D`` and the integers ``v * D``."""
    denom = 1
    for v in values:
        denom = math.lcm(denom, v.denominator)
    return denom, [int(v * denom) for v in values]


def min_slack_subset(ranks, xs, proper):
    """Minimise ``rank(S) - x(S)`` over nonempty masks (proper if asked).

    ``xs`` holds exact rationals in ground order.  Returns ``(mask, value)``
    with ``value`` a ``Fraction``; ``mask`` is -1 when nothing qualifies.
    """
    from fractions import Fraction

    denom, ints = scale_to_integers(xs)
    n = len(xs)
    bound = denom * (n + 1) + sum(abs(v) for v in ints)
    if bound < _INT64_HEADROOM and n < 63:
        mask, val = _impl.min_slack_subset(
            np.ascontiguousarray(ranks, dtype=np.int32),
            np.array(ints, dtype=np.int64),
            denom,
            bool(proper),
        )
    else:
        mask, val = _pykernels.min_slack_subset(ranks, ints, denom, proper)
    return int(mask), Fraction(int(val), denom)


def first_q_violation(ranks, q):
    return int(_impl.first_q_violation(np.ascontiguousarray(ranks, dtype=np.int32), int(q)))


def popcounts(n):
    pc = np.zeros(1 << n, dtype=np.int32)
    for i in range(n):
        pc[1 << i : 1 << (i + 1)] = pc[: 1 << i] + 1
    return pc


def embed_masks(positions):
    """Map each child mask to the parent mask with bits at ``positions``."""
    n = len(positions)
    out = np.zeros(1 << n, dtype=np.int64)
    for i, p in enumerate(positions):
        out[1 << i : 1 << (i + 1)] = out[: 1 << i] | (1 << p)
    return out
