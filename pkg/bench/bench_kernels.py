"""Time the compiled kernels against the pure-Python fallback.

    python3 bench/bench_kernels.py --sizes 10 12 14 --repeat 3

Each row reports the best of ``--repeat`` runs per backend and the speedup.
Results are checked for equality before timing is reported.
"""
import argparse
import random
import time
from fractions import Fraction

import numpy as np

from matround import kernels
from matround.harness.generators import random_matroid_json
from matround.harness.io import matroid_from_json


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n, seed):
    rng = random.Random(seed)
    ground = list(range(n))
    M = matroid_from_json(random_matroid_json(rng, ground, ("linear",)))
    ranks = M.rank_table()
    denom = 12
    xs = np.array([rng.randint(0, denom) for _ in range(n)], dtype=np.int64)
    verts = max(2, n // 2)
    us = [rng.randrange(verts) for _ in range(n)]
    vs = [rng.randrange(verts) for _ in range(n)]

    # the oracle is a plain table lookup so only the kernel is timed
    table = ranks.tolist()
    pc = kernels.popcounts(n).tolist()

    def oracle(mask):
        return table[mask] == pc[mask]

    return {
        "rank_table_from_oracle": lambda k: k.rank_table_from_oracle(n, oracle),
        "graphic_rank_table": lambda k: k.graphic_rank_table(n, us, vs, verts),
        "min_slack_subset": lambda k: k.min_slack_subset(ranks, xs, denom, True),
        "first_q_violation": lambda k: k.first_q_violation(ranks, 2),
    }


def same(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return tuple(np.atleast_1d(a)) == tuple(np.atleast_1d(b))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 12, 14])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the Python backend is available")
    print(f"{'kernel':<24}{'n':>4}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for n in args.sizes:
        for name, run in cases(n, args.seed).items():
            t_py, out_py = best_of(lambda: run(backends["python"]), args.repeat)
            if "cython" in backends:
                t_cy, out_cy = best_of(lambda: run(backends["cython"]), args.repeat)
                if not same(out_py, out_cy):
                    raise SystemExit(f"{name} n={n}: backends disagree")
                print(f"{name:<24}{n:>4}{t_py * 1e3:>12.3f}{t_cy * 1e3:>12.3f}{t_py / max(t_cy, 1e-9):>9.0f}x")
            else:
                print(f"{name:<24}{n:>4}{t_py * 1e3:>12.3f}{'-':>12}{'-':>10}")

    # end to end: one separation call through the public wrapper
    n = args.sizes[-1]
    M = matroid_from_json(random_matroid_json(random.Random(args.seed), list(range(n)), ("linear",)))
    x = [Fraction(1, 3)] * n
    t, _ = best_of(lambda: kernels.min_slack_subset(M.rank_table(), x, False), args.repeat)
    print(f"\nactive backend: {kernels.BACKEND}; separation over {n} elements: {t * 1e3:.3f} ms")


if __name__ == "__main__":
    main()
