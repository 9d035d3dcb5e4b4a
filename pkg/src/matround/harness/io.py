"""Instance and report files: JSON with every rational written as ``"p/q"``."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import jsonschema

from matround.matroid import Explicit, Graphic, LinearRational, Matroid, Partition, Uniform
from matround.rounding import KnapsackConstraint, RoundingInstance, SideConstraint, default_q

PROBLEMS = ("round", "round-knapsack", "3mat", "gmdst", "intersect2")

RATIONAL = {"type": "string", "pattern": r"^-?[0-9]+(/[0-9]+)?$"}
IDS = {"type": "array", "items": {"type": "integer"}, "uniqueItems": True}

MATROID_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "oneOf": [
        {
            "properties": {"type": {"const": "uniform"}, "ground": IDS, "rank": {"type": "integer", "minimum": 0}},
            "required": ["ground", "rank"],
        },
        {
            "properties": {
                "type": {"const": "partition"},
                "blocks": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"elements": IDS, "cap": {"type": "integer", "minimum": 0}},
                        "required": ["elements", "cap"],
                    },
                },
            },
            "required": ["blocks"],
        },
        {
            "properties": {
                "type": {"const": "graphic"},
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"id": {"type": "integer"}, "u": {}, "v": {}},
                        "required": ["id", "u", "v"],
                    },
                },
            },
            "required": ["edges"],
        },
        {
            "properties": {
                "type": {"const": "linear"},
                "columns": {
                    "type": "object",
                    "patternProperties": {"^-?[0-9]+$": {"type": "array", "items": RATIONAL}},
                    "additionalProperties": False,
                },
            },
            "required": ["columns"],
        },
        {
            "properties": {
                "type": {"const": "explicit"},
                "ground": IDS,
                "independent": {"type": "array", "items": IDS},
            },
            "required": ["ground", "independent"],
        },
    ],
}

KNAPSACK_SCHEMA = {
    "type": "object",
    "properties": {
        "ground": IDS,
        "cost": {"type": "object", "additionalProperties": RATIONAL},
        "budget": RATIONAL,
        "q": {"type": "integer", "minimum": 1},
    },
    "required": ["ground", "cost", "budget"],
}

INSTANCE_SCHEMA = {
    "type": "object",
    "properties": {
        "problem": {"enum": list(PROBLEMS)},
        "ground": IDS,
        "weights": {"type": "object", "additionalProperties": RATIONAL},
        "matroids": {"type": "array", "items": MATROID_SCHEMA},
        "q": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "knapsacks": {"type": "array", "items": KNAPSACK_SCHEMA},
        "independent": {"type": "boolean"},
        "graph": {
            "type": "object",
            "properties": {
                "vertices": {"type": "array"},
                "edges": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {"id": {"type": "integer"}, "u": {}, "v": {}},
                        "required": ["id", "u", "v"],
                    },
                },
            },
            "required": ["vertices", "edges"],
        },
        "costs": {"type": "object", "additionalProperties": RATIONAL},
        "node_sets": {"type": "array", "items": {"type": "array"}},
    },
    "required": ["problem", "matroids"],
    "allOf": [
        {
            "if": {"properties": {"problem": {"const": "gmdst"}}},
            "then": {"required": ["graph", "costs", "node_sets"]},
            "else": {"required": ["ground", "weights"]},
        }
    ],
}

PARTITION_SCHEMA = {
    "type": "object",
    "properties": {"matroid": MATROID_SCHEMA, "set": IDS, "q": {"type": "integer", "minimum": 1}},
    "required": ["matroid", "set", "q"],
}


class InstanceError(ValueError):
    """Schema violation or inconsistent ids in an instance file."""


def fmt(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _rat(s: str) -> Fraction:
    return Fraction(s)


def _id_map(d: dict) -> dict:
    return {int(k): _rat(v) for k, v in d.items()}


def _validate(doc, schema) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        raise InstanceError(f"schema: {exc.message} at {list(exc.absolute_path)}") from None


def matroid_from_json(d: dict) -> Matroid:
    _validate(d, MATROID_SCHEMA)
    fam = d["type"]
    if fam == "uniform":
        return Uniform(d["ground"], d["rank"])
    if fam == "partition":
        return Partition([(b["elements"], b["cap"]) for b in d["blocks"]])
    if fam == "graphic":
        edges = {}
        for e in d["edges"]:
            if e["id"] in edges:
                raise InstanceError(f"duplicate edge id {e['id']}")
            edges[e["id"]] = (e["u"], e["v"])
        return Graphic(edges)
    if fam == "linear":
        return LinearRational({int(k): [_rat(v) for v in col] for k, col in d["columns"].items()})
    return Explicit(d["ground"], d["independent"])


def matroid_to_json(M: Matroid) -> dict:
    if isinstance(M, Uniform):
        return {"type": "uniform", "ground": sorted(M.ground), "rank": M.k}
    if isinstance(M, Partition):
        return {
            "type": "partition",
            "blocks": [{"elements": sorted(b), "cap": c} for b, c in M.blocks],
        }
    if isinstance(M, Graphic):
        return {
            "type": "graphic",
            "edges": [{"id": e, "u": u, "v": v} for e, (u, v) in sorted(M.edges.items())],
        }
    if isinstance(M, LinearRational):
        return {
            "type": "linear",
            "columns": {str(e): [fmt(v) for v in col] for e, col in sorted(M.columns.items())},
        }
    if isinstance(M, Explicit):
        return {
            "type": "explicit",
            "ground": sorted(M.ground),
            "independent": sorted(sorted(s) for s in M.independent_sets),
        }
    raise TypeError(f"cannot serialise {type(M).__name__}")


@dataclass
class Instance:
    """Parsed instance file; ``raw`` keeps the source document."""

    problem: str
    ground: frozenset
    weights: dict
    matroids: list
    q: list
    knapsacks: list
    independent: bool = False
    edges: dict = field(default_factory=dict)
    vertices: list = field(default_factory=list)
    costs: dict = field(default_factory=dict)
    node_sets: list = field(default_factory=list)
    raw: Any = None

    def rounding_instance(self) -> RoundingInstance:
        """For round / round-knapsack / gmdst: first matroid is the basis matroid."""
        if self.problem == "gmdst":
            from matround.apps import gmdst_instance

            return gmdst_instance(self.edges, self.costs, self.node_sets, self.matroids, self.vertices)
        side = [SideConstraint(m, q) for m, q in zip(self.matroids[1:], self.q)]
        knaps = [
            KnapsackConstraint(k["ground"], k["cost"], k["budget"], q)
            for k, q in zip(self.knapsacks, self.q[len(side):])
        ]
        return RoundingInstance(self.matroids[0], side, knaps, self.weights)


def parse_instance(doc: dict) -> Instance:
    _validate(doc, INSTANCE_SCHEMA)
    problem = doc["problem"]
    matroids = [matroid_from_json(m) for m in doc["matroids"]]
    if problem == "gmdst":
        g = doc["graph"]
        edges = {}
        for e in g["edges"]:
            if e["id"] in edges:
                raise InstanceError(f"duplicate edge id {e['id']}")
            edges[e["id"]] = (e["u"], e["v"])
        vertices = list(g["vertices"])
        for u, v in edges.values():
            if u not in vertices or v not in vertices:
                raise InstanceError("edge endpoint is not a listed vertex")
        costs = _id_map(doc["costs"])
        if set(costs) != set(edges):
            raise InstanceError("costs must name exactly the edge ids")
        ground = frozenset(edges)
        return Instance(
            problem, ground, {e: -c for e, c in costs.items()}, matroids, [2] * len(matroids), [],
            edges=edges, vertices=vertices, costs=costs,
            node_sets=[list(s) for s in doc["node_sets"]], raw=doc,
        )

    ground = frozenset(doc["ground"])
    weights = _id_map(doc["weights"])
    if set(weights) != ground:
        raise InstanceError("weights must name exactly the ground elements")
    knapsacks = []
    for k in doc.get("knapsacks", []):
        cost = _id_map(k["cost"])
        if set(cost) != set(k["ground"]):
            raise InstanceError("knapsack cost must name exactly its ground")
        knapsacks.append({"ground": frozenset(k["ground"]), "cost": cost, "budget": _rat(k["budget"]), "q": k.get("q")})
    for m in matroids:
        if not m.ground <= ground:
            raise InstanceError("a matroid mentions an id outside the ground set")
    for k in knapsacks:
        if not k["ground"] <= ground:
            raise InstanceError("a knapsack mentions an id outside the ground set")

    if problem in ("round", "round-knapsack"):
        if not matroids or matroids[0].ground != ground:
            raise InstanceError("the first matroid must span the ground set")
        if problem == "round" and knapsacks:
            raise InstanceError("use problem round-knapsack for knapsack rows")
        grounds = [m.ground for m in matroids[1:]] + [k["ground"] for k in knapsacks]
        # "q" lists side matroids then knapsacks; a knapsack's own "q" wins
        q = doc.get("q")
        if q is None:
            q = default_q(grounds) if grounds else []
        q = list(q)
        if len(q) == len(grounds):
            k0 = len(matroids) - 1
            for i, k in enumerate(knapsacks):
                if k["q"] is not None:
                    q[k0 + i] = k["q"]
        if len(q) != len(grounds):
            raise InstanceError(f"need {len(grounds)} q-values, got {len(q)}")
    else:
        need = 3 if problem == "3mat" else 2
        if len(matroids) != need:
            raise InstanceError(f"{problem} needs exactly {need} matroids")
        if any(m.ground != ground for m in matroids):
            raise InstanceError(f"{problem} matroids must share the ground set")
        if knapsacks:
            raise InstanceError(f"{problem} takes no knapsacks")
        q = []
    return Instance(
        problem, ground, weights, matroids, list(q), knapsacks,
        independent=bool(doc.get("independent", False)), raw=doc,
    )


def load_instance(path) -> Instance:
    with open(path) as fh:
        doc = json.load(fh)
    return parse_instance(doc)


def parse_partition_request(doc: dict):
    _validate(doc, PARTITION_SCHEMA)
    return matroid_from_json(doc["matroid"]), frozenset(doc["set"]), doc["q"]


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
