"""Seeded random instance files.

Every generator takes a seed and returns a JSON-ready dict; the same seed
always produces the same document.
"""
from __future__ import annotations

import random
from fractions import Fraction

from matround.harness.io import fmt, matroid_to_json
from matround.matroid import Explicit, Graphic, LinearRational, independent_sets
from matround.rounding import default_q

FAMILIES = ("uniform", "partition", "graphic", "linear", "explicit")
EXPLICIT_GEN_LIMIT = 8


def _weights(rng: random.Random, ground, lo=-3, hi=9) -> dict:
    out = {}
    for e in ground:
        v = Fraction(rng.randint(lo, hi))
        if rng.random() < 0.25:
            v += Fraction(1, rng.choice((2, 3)))
        out[str(e)] = fmt(v)
    return out


def _graphic_edges(rng: random.Random, ground, tight: bool = False) -> dict:
    top = max(2, len(ground) // 2 + 1) if tight else max(2, len(ground))
    nverts = rng.randint(2, top)
    edges = {}
    for e in ground:
        u = rng.randrange(nverts)
        v = rng.randrange(nverts - 1)
        if v >= u:
            v += 1
        # occasional loop so rank-0 elements appear too
        if rng.random() < 0.05:
            v = u
        edges[e] = (u, v)
    return edges


def random_matroid_json(rng: random.Random, ground, families=FAMILIES, tight: bool = False) -> dict:
    """One random matroid on ``ground`` drawn from ``families``.

    With ``tight`` ranks are biased low, which makes fractional LP vertices
    (and so refinements and drops) far more common.
    """
    ground = sorted(ground)
    n = len(ground)
    fams = [f for f in families if f != "explicit" or n <= EXPLICIT_GEN_LIMIT] or ["uniform"]
    fam = rng.choice(fams)
    if fam == "uniform":
        top = max(1, n // 2) if tight else n
        return {"type": "uniform", "ground": ground, "rank": rng.randint(1, top)}
    if fam == "partition":
        nb = rng.randint(1, max(1, (n + 1) // 2))
        blocks: list[list] = [[] for _ in range(nb)]
        for e in ground:
            blocks[rng.randrange(nb)].append(e)
        blocks = [b for b in blocks if b]
        caps = [1 if tight and rng.random() < 0.7 else rng.randint(1, len(b)) for b in blocks]
        return {
            "type": "partition",
            "blocks": [{"elements": b, "cap": c} for b, c in zip(blocks, caps)],
        }
    if fam == "graphic":
        return matroid_to_json(Graphic(_graphic_edges(rng, ground, tight)))
    if fam == "linear":
        top = max(1, min(n, 4) // 2) if tight else max(1, min(n, 4))
        d = rng.randint(1, top)
        cols = {}
        for e in ground:
            col = [Fraction(rng.randint(-2, 2)) for _ in range(d)]
            if rng.random() < 0.2:
                col = [v / 2 for v in col]
            cols[e] = col
        return matroid_to_json(LinearRational(cols))
    # explicit: enumerate a random graphic or linear matroid into a list
    if rng.random() < 0.5:
        src = Graphic(_graphic_edges(rng, ground))
    else:
        d = rng.randint(1, 3)
        src = LinearRational({e: [rng.randint(-1, 1) for _ in range(d)] for e in ground})
    return matroid_to_json(Explicit(ground, independent_sets(src)))


def _random_subset(rng: random.Random, ground, lo: int = 1) -> list:
    ground = sorted(ground)
    size = rng.randint(min(lo, len(ground)), len(ground))
    return sorted(rng.sample(ground, size))


def _ground(rng: random.Random, size: int) -> list:
    # ids are opaque: spread them out instead of using 0..n-1
    return sorted(rng.sample(range(3 * size + 5), size))


def gen_random(
    seed: int,
    size: int = 8,
    k: int = 2,
    t: int = 0,
    mix=FAMILIES,
    problem: str | None = None,
    random_q: bool = False,
    tight: bool = True,
) -> dict:
    """Random instance file for ``problem`` (default: round, or round-knapsack when ``t > 0``)."""
    if problem is None:
        problem = "round-knapsack" if t else "round"
    rng = random.Random(f"{problem}:{seed}:{size}:{k}:{t}:{','.join(mix)}:{random_q}:{tight}")
    if problem == "gmdst":
        return gen_gmdst(seed, max_vertices=min(7, max(3, size)), k=min(k, 3), mix=mix)
    N = _ground(rng, size)
    doc = {"problem": problem, "ground": N, "weights": _weights(rng, N)}
    if problem in ("3mat", "intersect2"):
        m = 3 if problem == "3mat" else 2
        doc["weights"] = _weights(rng, N, lo=0, hi=9)
        doc["matroids"] = [random_matroid_json(rng, N, mix, tight=tight) for _ in range(m)]
        return doc

    mats = [random_matroid_json(rng, N, mix)]
    grounds = []
    for _ in range(k):
        g = _random_subset(rng, N)
        mats.append(random_matroid_json(rng, g, mix, tight=tight))
        grounds.append(g)
    knaps = []
    for _ in range(t):
        g = _random_subset(rng, N)
        cost = {e: Fraction(rng.randint(0, 5)) for e in g}
        top = max(cost.values())
        total = sum(cost.values())
        budget = Fraction(rng.randint(int(top), max(int(top), int(total))))
        knaps.append({"ground": g, "cost": {str(e): fmt(c) for e, c in cost.items()}, "budget": fmt(budget)})
        grounds.append(g)
    doc["matroids"] = mats
    if grounds:
        q = default_q(grounds)
        if random_q:
            q = [v + rng.randint(0, 1) for v in q]
        doc["q"] = q
    else:
        doc["q"] = []
    if knaps:
        doc["knapsacks"] = knaps
    return doc


def gen_gmdst(seed: int, max_vertices: int = 6, k: int = 2, mix=("uniform", "partition", "graphic", "linear")) -> dict:
    """Random connected multigraph with up to ``k`` disjoint node sets."""
    rng = random.Random(f"gmdst:{seed}:{max_vertices}:{k}:{','.join(mix)}")
    nv = rng.randint(3, max(3, max_vertices))
    vertices = list(range(nv))
    edges = []
    # random spanning tree first, then extra edges
    order = vertices[:]
    rng.shuffle(order)
    for i in range(1, nv):
        edges.append((order[i], order[rng.randrange(i)]))
    extra = rng.randint(0, min(6, 13 - len(edges)))
    for _ in range(extra):
        u, v = rng.sample(vertices, 2)
        edges.append((u, v))
    ids = sorted(rng.sample(range(10 * len(edges)), len(edges)))
    rng.shuffle(ids)
    edge_docs = [{"id": i, "u": u, "v": v} for i, (u, v) in zip(ids, edges)]
    costs = {str(i): fmt(Fraction(rng.randint(1, 9))) for i in ids}
    pool = vertices[:]
    rng.shuffle(pool)
    node_sets = []
    for _ in range(rng.randint(0, k)):
        if not pool:
            break
        size = rng.randint(1, min(2, len(pool)))
        node_sets.append(sorted(pool[:size]))
        pool = pool[size:]
    matroids = []
    fams = [f for f in mix if f != "explicit"] or ["uniform"]
    for S in node_sets:
        delta = sorted(i for i, (u, v) in zip(ids, edges) if (u in S) != (v in S))
        if not delta:
            matroids.append(None)
            continue
        matroids.append(random_matroid_json(rng, delta, fams))
    kept = [(S, m) for S, m in zip(node_sets, matroids) if m is not None]
    return {
        "problem": "gmdst",
        "graph": {"vertices": vertices, "edges": edge_docs},
        "costs": costs,
        "node_sets": [S for S, _ in kept],
        "matroids": [m for _, m in kept],
    }


def gen_partition_request(seed: int, size: int = 8, mix=FAMILIES) -> dict:
    rng = random.Random(f"partition:{seed}:{size}")
    N = _ground(rng, size)
    m = random_matroid_json(rng, N, mix)
    S = _random_subset(rng, N, lo=0)
    return {"matroid": m, "set": S, "q": rng.randint(1, 3)}


def _gadget_weights(rng: random.Random):
    """Weights for one odd-cycle gadget ``(a, b, c, p)`` whose LP optimum is
    the all-halves point: ``w_c - w_p`` must beat ``|w_a - w_b|``."""
    wa, wb = rng.randint(1, 5), rng.randint(1, 5)
    wp = -rng.randint(1, 4)
    wc = wp + abs(wa - wb) + rng.randint(1, 4)
    return [Fraction(v) for v in (wa, wb, wc, wp)]


def gen_fractional(seed: int, size: int = 8, k: int = 2, t: int = 0, problem: str | None = None) -> dict:
    """Instances built from planted odd cycles, so the first LP vertex is
    fractional and the rounding loop has to refine, drop and re-solve.

    Each gadget has elements ``a, b, c, p``: the basis matroid pairs
    ``{a, b}`` and ``{c, p}`` (cap 1 each), one side matroid caps ``{b, c}``
    and another caps ``{a, c}``.  Leftover elements become filler blocks.
    ``problem="3mat"`` plants triangles instead, one pair per matroid.
    """
    if problem is None:
        problem = "round-knapsack" if t else "round"
    size = max(size, 3 if problem == "3mat" else 4)
    rng = random.Random(f"fractional:{problem}:{seed}:{size}:{k}:{t}")
    ids = rng.sample(range(4 * size + 8), size)
    if problem == "3mat":
        n_tri = max(1, size // 3)
        tri = [ids[3 * i : 3 * i + 3] for i in range(n_tri)]
        rest = ids[3 * n_tri :]
        blocks: list[list] = [[], [], []]
        for a, b, c in tri:
            blocks[0] += [([a, b], 1), ([c], 1)]
            blocks[1] += [([b, c], 1), ([a], 1)]
            blocks[2] += [([a, c], 1), ([b], 1)]
        w = {}
        for g in tri:
            for e in g:
                w[e] = Fraction(rng.randint(3, 5))
        for e in rest:
            w[e] = Fraction(rng.randint(0, 4))
            for bl in blocks:
                bl.append(([e], 1))
        mats = [
            {"type": "partition", "blocks": [{"elements": sorted(b), "cap": c} for b, c in bl]}
            for bl in blocks
        ]
        return {
            "problem": "3mat",
            "ground": sorted(ids),
            "weights": {str(e): fmt(v) for e, v in sorted(w.items())},
            "matroids": mats,
        }

    n_gad = max(1, size // 4)
    gad = [ids[4 * i : 4 * i + 4] for i in range(n_gad)]
    rest = ids[4 * n_gad :]
    w = {}
    m0_blocks, s1, s2 = [], [], []
    for a, b, c, p in gad:
        for e, v in zip((a, b, c, p), _gadget_weights(rng)):
            w[e] = v
        m0_blocks += [([a, b], 1), ([c, p], 1)]
        s1.append(([b, c], 1))
        s2.append(([a, c], 1))
    # filler: blocks of the basis matroid, sometimes also seen by the side matroids
    i = 0
    while i < len(rest):
        blk = rest[i : i + rng.randint(1, 2)]
        i += len(blk)
        m0_blocks.append((blk, rng.randint(1, len(blk))))
        for e in blk:
            w[e] = Fraction(rng.randint(-2, 6))
            if rng.random() < 0.5:
                rng.choice((s1, s2)).append(([e], 1))
    if rng.random() < 0.5:
        # same matroid drawn as a multigraph: each capped pair is a parallel class
        edges, v = [], 0
        for blk, cap in m0_blocks:
            if cap == len(blk):
                for e in blk:
                    edges.append({"id": e, "u": v, "v": v + 1})
                    v += 2
            else:
                for e in blk:
                    edges.append({"id": e, "u": v, "v": v + 1})
                v += 2
        m0 = {"type": "graphic", "edges": sorted(edges, key=lambda d: d["id"])}
    else:
        m0 = {"type": "partition", "blocks": [{"elements": sorted(b), "cap": c} for b, c in m0_blocks]}

    def side_json(bl):
        if len(bl) == 1 and rng.random() < 0.5:
            return {"type": "uniform", "ground": sorted(bl[0][0]), "rank": bl[0][1]}
        return {"type": "partition", "blocks": [{"elements": sorted(b), "cap": c} for b, c in bl]}

    mats = [m0, side_json(s1), side_json(s2)]
    grounds = [sorted(x for b, _ in s1 for x in b), sorted(x for b, _ in s2 for x in b)]
    N = sorted(ids)
    if k >= 3:
        g = _random_subset(rng, N)
        mats.append({"type": "uniform", "ground": g, "rank": rng.randint(max(1, len(g) // 2), len(g))})
        grounds.append(g)
    knaps = []
    for _ in range(t):
        g = _random_subset(rng, N)
        cost = {e: Fraction(rng.randint(0, 4)) for e in g}
        top, total = max(cost.values()), sum(cost.values())
        budget = Fraction(rng.randint(int(top), max(int(top), int(total))))
        knaps.append({"ground": g, "cost": {str(e): fmt(c) for e, c in cost.items()}, "budget": fmt(budget)})
        grounds.append(g)
    doc = {
        "problem": problem,
        "ground": N,
        "weights": {str(e): fmt(v) for e, v in sorted(w.items())},
        "matroids": mats,
        "q": default_q(grounds),
    }
    if knaps:
        doc["knapsacks"] = knaps
    return doc
