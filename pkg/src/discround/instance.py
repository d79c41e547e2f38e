"""JSON instance files.

A file is one JSON object. Indices are 0-based. ``n`` and ``y`` are
required unless a ``paths`` block supplies the ground set::

    {"n": 4, "y": [0.5, 0.5, 0.5, 0.5],
     "constraints": [{"coeffs": [1, 1, 0, 0], "b": 1},
                     {"indices": [2, 3], "b": 1, "lambda": 2.0}],
     "matroid": {"kind": "partition", "n": 4, "parts": [[0, 1], [2, 3]],
                 "capacities": [1, 1], "base": true},
     "laminar": {"sense": "ge", "sets": [{"members": [0, 1], "value": 1}]},
     "costs": [1, 2, 3, 4], "budgets": [5], "epsilon": 0.5,
     "paths": {"pairs": [[{"edges": ["a", "b"], "weight": 1}]],
               "capacities": [{"edge": "a", "cap": 1}],
               "requirements": [{"pairs": [0], "r": 1}]}}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .matroid import LaminarFamily, Matroid, matroid_from_dict

SCHEMA = "schema"
DIMENSION = "dimension"
RANGE = "range"

_TOP_KEYS = {"n", "y", "constraints", "matroid", "laminar", "costs", "budgets", "epsilon", "paths", "name"}


class InstanceError(ValueError):
    """Validation failure with a machine code (schema, dimension or range) and a location."""

    def __init__(self, code: str, location: str, message: str):
        super().__init__(f"[{code}] {location}: {message}")
        self.code = code
        self.location = location


@dataclass
class Constraint:
    coeffs: np.ndarray
    b: float | None = None
    lam: float | None = None
    group: int | None = None
    sparse: bool = False


@dataclass
class Paths:
    pairs: list
    capacities: dict
    requirements: list = field(default_factory=list)


@dataclass
class Instance:
    n: int
    y: np.ndarray
    constraints: list = field(default_factory=list)
    matroid: Matroid | None = None
    base: bool = False
    laminar: LaminarFamily | None = None
    costs: np.ndarray | None = None
    budgets: np.ndarray | None = None
    epsilon: float | None = None
    paths: Paths | None = None
    name: str | None = None

    @property
    def a(self) -> np.ndarray:
        if not self.constraints:
            return np.zeros((0, self.n))
        return np.vstack([c.coeffs for c in self.constraints])

    @property
    def b(self) -> np.ndarray:
        a = self.a
        return np.array([a[j] @ self.y if c.b is None else c.b for j, c in enumerate(self.constraints)])

    @property
    def groups(self):
        g = [c.group for c in self.constraints]
        return None if all(v is None for v in g) else [0 if v is None else v for v in g]


def _num(value, loc: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(SCHEMA, loc, f"expected a number, got {type(value).__name__}")
    if not np.isfinite(value):
        raise InstanceError(RANGE, loc, "value must be finite")
    return float(value)


def _int(value, loc: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(SCHEMA, loc, f"expected an integer, got {value!r}")
    return value


def _list(value, loc: str) -> list:
    if not isinstance(value, list):
        raise InstanceError(SCHEMA, loc, f"expected a list, got {type(value).__name__}")
    return value


def _index(value, n: int, loc: str) -> int:
    i = _int(value, loc)
    if not 0 <= i < n:
        raise InstanceError(RANGE, loc, f"index {i} outside 0..{n - 1}")
    return i


def _edge(value, loc: str):
    if isinstance(value, str):
        return value
    if isinstance(value, list) and all(isinstance(v, (int, str)) and not isinstance(v, bool) for v in value):
        return tuple(value)
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    raise InstanceError(SCHEMA, loc, "edge must be a string, an integer or a list of endpoints")


def _constraint(data, n: int, loc: str) -> Constraint:
    if not isinstance(data, dict):
        raise InstanceError(SCHEMA, loc, "constraint must be an object")
    unknown = set(data) - {"coeffs", "indices", "weights", "b", "lambda", "group"}
    if unknown:
        raise InstanceError(SCHEMA, loc, f"unknown keys {sorted(unknown)}")
    if ("coeffs" in data) == ("indices" in data):
        raise InstanceError(SCHEMA, loc, "give exactly one of 'coeffs' or 'indices'")
    sparse = "indices" in data
    if sparse:
        idx = [_index(v, n, f"{loc}.indices[{k}]") for k, v in enumerate(_list(data["indices"], f"{loc}.indices"))]
        weights = data.get("weights")
        if weights is None:
            w = [1.0] * len(idx)
        else:
            w = [_num(v, f"{loc}.weights[{k}]") for k, v in enumerate(_list(weights, f"{loc}.weights"))]
            if len(w) != len(idx):
                raise InstanceError(DIMENSION, f"{loc}.weights", f"{len(w)} weights for {len(idx)} indices")
        if len(set(idx)) != len(idx):
            raise InstanceError(SCHEMA, f"{loc}.indices", "repeated index")
        coeffs = np.zeros(n)
        coeffs[idx] = w
    else:
        raw = _list(data["coeffs"], f"{loc}.coeffs")
        if len(raw) != n:
            raise InstanceError(DIMENSION, f"{loc}.coeffs", f"length {len(raw)}, expected n={n}")
        coeffs = np.array([_num(v, f"{loc}.coeffs[{k}]") for k, v in enumerate(raw)])
    b = _num(data["b"], f"{loc}.b") if "b" in data else None
    lam = None
    if "lambda" in data:
        raw = data["lambda"]
        lam = np.inf if raw in ("inf", "unbounded") else _num(raw, f"{loc}.lambda")
        if lam < 0:
            raise InstanceError(RANGE, f"{loc}.lambda", "lambda must be nonnegative")
    group = _int(data["group"], f"{loc}.group") if "group" in data else None
    return Constraint(coeffs, b, lam, group, sparse)


def _matroid(data, n: int | None, loc: str):
    if not isinstance(data, dict):
        raise InstanceError(SCHEMA, loc, "matroid block must be an object")
    body = {k: v for k, v in data.items() if k != "base"}
    base = data.get("base", False)
    if not isinstance(base, bool):
        raise InstanceError(SCHEMA, f"{loc}.base", "expected true or false")
    try:
        m = matroid_from_dict(body)
    except KeyError as exc:
        raise InstanceError(SCHEMA, loc, f"missing field {exc.args[0]!r}") from None
    except (ValueError, TypeError) as exc:
        raise InstanceError(SCHEMA, loc, str(exc)) from None
    if n is not None and m.n != n:
        raise InstanceError(DIMENSION, loc, f"matroid ground set has {m.n} elements, expected n={n}")
    return m, base


def _laminar(data, n: int, loc: str) -> LaminarFamily:
    if not isinstance(data, dict):
        raise InstanceError(SCHEMA, loc, "laminar block must be an object")
    sets, vals = [], []
    for k, entry in enumerate(_list(data.get("sets", []), f"{loc}.sets")):
        eloc = f"{loc}.sets[{k}]"
        if not isinstance(entry, dict) or "members" not in entry or "value" not in entry:
            raise InstanceError(SCHEMA, eloc, "expected {members, value}")
        sets.append([_index(v, n, f"{eloc}.members[{i}]") for i, v in enumerate(_list(entry["members"], eloc))])
        vals.append(_num(entry["value"], f"{eloc}.value"))
    try:
        return LaminarFamily(n, tuple(sets), tuple(vals), data.get("sense", "ge"))
    except ValueError as exc:
        raise InstanceError(SCHEMA, loc, str(exc)) from None


def _paths(data, loc: str) -> Paths:
    if not isinstance(data, dict) or "pairs" not in data:
        raise InstanceError(SCHEMA, loc, "paths block needs 'pairs'")
    pairs = []
    for i, cands in enumerate(_list(data["pairs"], f"{loc}.pairs")):
        ploc = f"{loc}.pairs[{i}]"
        out = []
        for k, c in enumerate(_list(cands, ploc)):
            if not isinstance(c, dict) or "edges" not in c or "weight" not in c:
                raise InstanceError(SCHEMA, f"{ploc}[{k}]", "expected {edges, weight}")
            edges = [_edge(e, f"{ploc}[{k}].edges[{q}]") for q, e in enumerate(_list(c["edges"], ploc))]
            w = _num(c["weight"], f"{ploc}[{k}].weight")
            if w < 0:
                raise InstanceError(RANGE, f"{ploc}[{k}].weight", "weight must be nonnegative")
            out.append((edges, w))
        pairs.append(out)
    caps = {}
    for k, c in enumerate(_list(data.get("capacities", []), f"{loc}.capacities")):
        if not isinstance(c, dict) or "edge" not in c or "cap" not in c:
            raise InstanceError(SCHEMA, f"{loc}.capacities[{k}]", "expected {edge, cap}")
        caps[_edge(c["edge"], f"{loc}.capacities[{k}].edge")] = _num(c["cap"], f"{loc}.capacities[{k}].cap")
    reqs = []
    for k, r in enumerate(_list(data.get("requirements", []), f"{loc}.requirements")):
        if not isinstance(r, dict) or "pairs" not in r or "r" not in r:
            raise InstanceError(SCHEMA, f"{loc}.requirements[{k}]", "expected {pairs, r}")
        members = [_index(v, len(pairs), f"{loc}.requirements[{k}].pairs") for v in _list(r["pairs"], loc)]
        reqs.append((members, _num(r["r"], f"{loc}.requirements[{k}].r")))
    return Paths(pairs, caps, reqs)


def parse_instance(text) -> Instance:
    """Parse and validate instance text (str or bytes); raises :class:`InstanceError`."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceError(SCHEMA, f"byte {exc.start}", "not valid UTF-8") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(SCHEMA, f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    if not isinstance(data, dict):
        raise InstanceError(SCHEMA, "top level", "instance must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise InstanceError(SCHEMA, "top level", f"unknown keys {sorted(unknown)}")

    paths = _paths(data["paths"], "paths") if "paths" in data else None
    if "y" not in data or "n" not in data:
        if paths is None:
            raise InstanceError(SCHEMA, "top level", "'n' and 'y' are required")
        n, y = 0, np.zeros(0)
    else:
        n = _int(data["n"], "n")
        if n < 0:
            raise InstanceError(RANGE, "n", "n must be nonnegative")
        raw = _list(data["y"], "y")
        if len(raw) != n:
            raise InstanceError(DIMENSION, "y", f"length {len(raw)}, expected n={n}")
        y = np.array([_num(v, f"y[{i}]") for i, v in enumerate(raw)])
        bad = np.flatnonzero((y < 0) | (y > 1))
        if bad.size:
            i = int(bad[0])
            raise InstanceError(RANGE, f"y[{i}]", f"coordinate {i} = {y[i]} outside [0, 1]")

    cons = [_constraint(c, n, f"constraints[{j}]") for j, c in enumerate(_list(data.get("constraints", []), "constraints"))]
    matroid, base = (None, False)
    if "matroid" in data:
        matroid, base = _matroid(data["matroid"], n if "y" in data else None, "matroid")
    laminar = _laminar(data["laminar"], n, "laminar") if "laminar" in data else None

    costs = budgets = None
    if "costs" in data:
        raw = _list(data["costs"], "costs")
        rows = raw if raw and isinstance(raw[0], list) else [raw]
        costs = []
        for r, row in enumerate(rows):
            row = _list(row, f"costs[{r}]")
            if len(row) != n:
                raise InstanceError(DIMENSION, f"costs[{r}]", f"length {len(row)}, expected n={n}")
            costs.append([_num(v, f"costs[{r}][{i}]") for i, v in enumerate(row)])
        costs = np.array(costs)
        if np.any(costs < 0):
            raise InstanceError(RANGE, "costs", "costs must be nonnegative")
        if not (raw and isinstance(raw[0], list)):
            costs = costs[0]
    if "budgets" in data:
        budgets = np.array([_num(v, f"budgets[{i}]") for i, v in enumerate(_list(data["budgets"], "budgets"))])
        if np.any(budgets <= 0):
            raise InstanceError(RANGE, "budgets", "budgets must be positive")
        k = 1 if costs is None or costs.ndim == 1 else costs.shape[0]
        if costs is not None and budgets.shape[0] != k:
            raise InstanceError(DIMENSION, "budgets", f"{budgets.shape[0]} budgets for {k} cost rows")
    eps = None
    if "epsilon" in data:
        eps = _num(data["epsilon"], "epsilon")
        if eps <= 0:
            raise InstanceError(RANGE, "epsilon", "epsilon must be positive")
    name = data.get("name")
    return Instance(n, y, cons, matroid, base, laminar, costs, budgets, eps, paths, name)


def _plain(v):
    v = float(v)
    return int(v) if v.is_integer() else v


def instance_to_dict(inst: Instance) -> dict:
    out: dict = {}
    if inst.name is not None:
        out["name"] = inst.name
    if inst.paths is None or inst.n:
        out["n"] = inst.n
        out["y"] = [_plain(v) for v in inst.y]
    if inst.constraints:
        rows = []
        for c in inst.constraints:
            if c.sparse:
                idx = np.flatnonzero(c.coeffs)
                row = {"indices": [int(i) for i in idx]}
                if np.any(c.coeffs[idx] != 1):
                    row["weights"] = [_plain(v) for v in c.coeffs[idx]]
            else:
                row = {"coeffs": [_plain(v) for v in c.coeffs]}
            if c.b is not None:
                row["b"] = _plain(c.b)
            if c.lam is not None:
                row["lambda"] = "inf" if np.isinf(c.lam) else _plain(c.lam)
            if c.group is not None:
                row["group"] = c.group
            rows.append(row)
        out["constraints"] = rows
    if inst.matroid is not None:
        out["matroid"] = {**inst.matroid.to_dict(), "base": inst.base}
    if inst.laminar is not None:
        out["laminar"] = inst.laminar.to_dict()
    if inst.costs is not None:
        out["costs"] = (inst.costs.tolist() if inst.costs.ndim == 2 else [_plain(v) for v in inst.costs])
    if inst.budgets is not None:
        out["budgets"] = [_plain(v) for v in inst.budgets]
    if inst.epsilon is not None:
        out["epsilon"] = _plain(inst.epsilon)
    if inst.paths is not None:
        enc = lambda e: list(e) if isinstance(e, tuple) else e  # noqa: E731
        out["paths"] = {
            "pairs": [[{"edges": [enc(e) for e in p], "weight": _plain(w)} for p, w in cands]
                      for cands in inst.paths.pairs],
            "capacities": [{"edge": enc(e), "cap": _plain(c)} for e, c in inst.paths.capacities.items()],
            "requirements": [{"pairs": list(m), "r": _plain(r)} for m, r in inst.paths.requirements],
        }
    return out


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


def load_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return parse_instance(fh.read())
