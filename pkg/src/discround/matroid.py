"""Matroid oracles, matroid polytope geometry and laminar families.

Elements are indexed ``0..n-1``. Subsets are accepted as any iterable of
ints and returned as ``frozenset``. For ground sets of at most
``TABLE_LIMIT`` elements a full rank table (one entry per bitmask) is
cached and drives exhaustive separation and tight-set computations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .numeric import DEFAULT_TOL, ToleranceModel, numerical_rank

TABLE_LIMIT = 20

_BYTE_POP = np.array([bin(i).count("1") for i in range(256)], dtype=np.int8)


def _popcount(masks: np.ndarray) -> np.ndarray:
    masks = masks.astype(np.uint32)
    out = np.zeros(masks.shape, dtype=np.int16)
    for shift in (0, 8, 16, 24):
        out += _BYTE_POP[(masks >> shift) & 0xFF]
    return out


def _mask(subset) -> int:
    m = 0
    for e in subset:
        m |= 1 << int(e)
    return m


def _members(mask: int) -> frozenset:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def subset_sums(x) -> np.ndarray:
    """``out[mask] = sum(x[i] for i in mask)`` for every bitmask."""
    out = np.zeros(1)
    for v in np.asarray(x, dtype=float):
        out = np.concatenate([out, out + v])
    return out


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, a):
        p = self.parent.setdefault(a, a)
        while p != a:
            self.parent[a] = self.parent.setdefault(p, p)
            a, p = p, self.parent[a]
        return a

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True


class Matroid:
    """Base class; subclasses are frozen dataclasses with an ``n`` field."""

    kind = "abstract"

    def _check(self, subset) -> frozenset:
        s = frozenset(int(e) for e in subset)
        if any(e < 0 or e >= self.n for e in s):
            raise ValueError(f"subset {sorted(s)} not contained in ground set of size {self.n}")
        return s

    def is_independent(self, subset) -> bool:
        raise NotImplementedError

    def rank(self, subset) -> int:
        indep: list[int] = []
        for e in sorted(self._check(subset)):
            if self.is_independent(indep + [e]):
                indep.append(e)
        return len(indep)

    def greedy(self, order) -> frozenset:
        """Independent set built greedily along ``order``."""
        chosen: list[int] = []
        for e in order:
            if self.is_independent(chosen + [e]):
                chosen.append(e)
        return frozenset(chosen)

    @property
    def full_rank(self) -> int:
        return self.rank(range(self.n))

    def rank_table(self) -> np.ndarray:
        """Rank of every subset, indexed by bitmask (only for n <= TABLE_LIMIT)."""
        if self.n > TABLE_LIMIT:
            raise ValueError(f"rank table needs n <= {TABLE_LIMIT}, got {self.n}")
        return self._rank_table

    @cached_property
    def _rank_table(self) -> np.ndarray:
        table = np.zeros(1 << self.n, dtype=np.int16)
        for m in range(1, 1 << self.n):
            table[m] = self.rank(_members(m))
        return table

    def polytope_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Rank inequalities ``rows @ x <= rhs`` that, with ``0 <= x <= 1``,
        describe P(M) completely. Rank-one singletons are left to the box."""
        raise NotImplementedError

    def restrict(self, keep) -> "Matroid":
        raise NotImplementedError

    def _contract(self, subset: frozenset) -> "Matroid":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _relabel(keep: list[int]) -> dict[int, int]:
    return {old: new for new, old in enumerate(keep)}


@dataclass(frozen=True)
class UniformMatroid(Matroid):
    n: int
    r: int
    kind = "uniform"

    def __post_init__(self):
        if not 0 <= self.r:
            raise ValueError("uniform matroid rank must be nonnegative")

    def is_independent(self, subset) -> bool:
        return len(self._check(subset)) <= self.r

    def rank(self, subset) -> int:
        return min(len(self._check(subset)), self.r)

    @cached_property
    def _rank_table(self) -> np.ndarray:
        pc = _popcount(np.arange(1 << self.n))
        return np.minimum(pc, self.r).astype(np.int16)

    def polytope_rows(self):
        rows, rhs = [], []
        if self.r < self.n:
            rows.append(np.ones(self.n))
            rhs.append(float(self.r))
        if self.r == 0:
            rows = [np.eye(self.n)[i] for i in range(self.n)]
            rhs = [0.0] * self.n
        return _pack(rows, rhs, self.n)

    def restrict(self, keep):
        keep = sorted(self._check(keep))
        return UniformMatroid(len(keep), min(self.r, len(keep)))

    def _contract(self, subset):
        return UniformMatroid(self.n - len(subset), self.r - len(subset))

    def to_dict(self):
        return {"kind": "uniform", "n": self.n, "rank": self.r}


@dataclass(frozen=True)
class PartitionMatroid(Matroid):
    n: int
    parts: tuple
    capacities: tuple
    kind = "partition"

    def __post_init__(self):
        parts = tuple(tuple(sorted(int(e) for e in p)) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "capacities", tuple(int(c) for c in self.capacities))
        if len(parts) != len(self.capacities):
            raise ValueError("one capacity per part required")
        seen: set[int] = set()
        for p in parts:
            for e in p:
                if e in seen:
                    raise ValueError(f"partition parts overlap at element {e}")
                if not 0 <= e < self.n:
                    raise ValueError(f"part element {e} outside ground set")
                seen.add(e)
        if len(seen) != self.n:
            raise ValueError("partition parts must cover the ground set")
        if any(c < 0 for c in self.capacities):
            raise ValueError("capacities must be nonnegative")

    @cached_property
    def _part_of(self) -> np.ndarray:
        owner = np.empty(self.n, dtype=int)
        for idx, p in enumerate(self.parts):
            owner[list(p)] = idx
        return owner

    def is_independent(self, subset) -> bool:
        counts = np.bincount(self._part_of[list(self._check(subset))], minlength=len(self.parts))
        return bool(np.all(counts <= np.array(self.capacities)))

    def rank(self, subset) -> int:
        counts = np.bincount(self._part_of[list(self._check(subset))], minlength=len(self.parts))
        return int(np.minimum(counts, self.capacities).sum())

    @cached_property
    def _rank_table(self) -> np.ndarray:
        masks = np.arange(1 << self.n)
        table = np.zeros(masks.shape, dtype=np.int16)
        for p, c in zip(self.parts, self.capacities):
            table += np.minimum(_popcount(masks & _mask(p)), c).astype(np.int16)
        return table

    def polytope_rows(self):
        rows, rhs = [], []
        for p, c in zip(self.parts, self.capacities):
            if c < len(p):
                row = np.zeros(self.n)
                row[list(p)] = 1.0
                rows.append(row)
                rhs.append(float(c))
        return _pack(rows, rhs, self.n)

    def restrict(self, keep):
        keep = sorted(self._check(keep))
        mp = _relabel(keep)
        parts, caps = [], []
        for p, c in zip(self.parts, self.capacities):
            q = [mp[e] for e in p if e in mp]
            if q:
                parts.append(q)
                caps.append(min(c, len(q)))
        return PartitionMatroid(len(keep), tuple(parts), tuple(caps))

    def _contract(self, subset):
        keep = [e for e in range(self.n) if e not in subset]
        mp = _relabel(keep)
        parts, caps = [], []
        for p, c in zip(self.parts, self.capacities):
            used = sum(1 for e in p if e in subset)
            q = [mp[e] for e in p if e in mp]
            if q:
                parts.append(q)
                caps.append(c - used)
        return PartitionMatroid(len(keep), tuple(parts), tuple(caps))

    def to_dict(self):
        return {"kind": "partition", "n": self.n, "parts": [list(p) for p in self.parts],
                "capacities": list(self.capacities)}


@dataclass(frozen=True)
class GraphicMatroid(Matroid):
    """Cycle matroid of a multigraph; element ``i`` is ``edges[i]``."""

    edges: tuple
    n: int = field(init=False)
    kind = "graphic"

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "n", len(edges))

    def is_independent(self, subset) -> bool:
        uf = _UnionFind()
        return all(uf.union(*self.edges[e]) for e in self._check(subset))

    def rank(self, subset) -> int:
        uf = _UnionFind()
        return sum(1 for e in self._check(subset) if uf.union(*self.edges[e]))

    def polytope_rows(self):
        verts = sorted({v for e in self.edges for v in e})
        if len(verts) > TABLE_LIMIT:
            raise ValueError(f"forest polytope enumeration needs <= {TABLE_LIMIT} vertices")
        rows, rhs = [], []
        for i, (u, v) in enumerate(self.edges):
            if u == v:
                row = np.zeros(self.n)
                row[i] = 1.0
                rows.append(row)
                rhs.append(0.0)
        vidx = {v: i for i, v in enumerate(verts)}
        for size in range(2, len(verts) + 1):
            for combo in itertools.combinations(range(len(verts)), size):
                cset = set(combo)
                inside = [i for i, (u, v) in enumerate(self.edges)
                          if u != v and vidx[u] in cset and vidx[v] in cset]
                if len(inside) < 2:
                    continue
                uf = _UnionFind()
                for i in inside:
                    uf.union(vidx[self.edges[i][0]], vidx[self.edges[i][1]])
                if len({uf.find(c) for c in combo}) != 1:
                    continue
                row = np.zeros(self.n)
                row[inside] = 1.0
                rows.append(row)
                rhs.append(float(size - 1))
        return _pack(rows, rhs, self.n)

    def restrict(self, keep):
        keep = sorted(self._check(keep))
        return GraphicMatroid(tuple(self.edges[e] for e in keep))

    def _contract(self, subset):
        uf = _UnionFind()
        for e in subset:
            uf.union(*self.edges[e])
        return GraphicMatroid(tuple((uf.find(u), uf.find(v))
                                    for i, (u, v) in enumerate(self.edges) if i not in subset))

    def to_dict(self):
        return {"kind": "graphic", "edges": [list(e) for e in self.edges]}


@dataclass(frozen=True)
class ExplicitMatroid(Matroid):
    """Matroid given by its bases (independent sets are their subsets)."""

    n: int
    bases: tuple
    kind = "explicit"

    def __post_init__(self):
        if self.n > TABLE_LIMIT:
            raise ValueError(f"explicit matroids are limited to n <= {TABLE_LIMIT}")
        bases = tuple(sorted({frozenset(int(e) for e in b) for b in self.bases}, key=sorted))
        if not bases:
            bases = (frozenset(),)
        sizes = {len(b) for b in bases}
        if len(sizes) != 1:
            raise ValueError("all bases must have the same size")
        for b in bases:
            if any(not 0 <= e < self.n for e in b):
                raise ValueError("base element outside ground set")
        object.__setattr__(self, "bases", bases)

    @cached_property
    def _base_masks(self) -> list[int]:
        return [_mask(b) for b in self.bases]

    def is_independent(self, subset) -> bool:
        m = _mask(self._check(subset))
        return any(m & ~b == 0 for b in self._base_masks)

    def rank(self, subset) -> int:
        m = _mask(self._check(subset))
        return max(bin(m & b).count("1") for b in self._base_masks)

    @cached_property
    def _rank_table(self) -> np.ndarray:
        masks = np.arange(1 << self.n)
        table = np.zeros(masks.shape, dtype=np.int16)
        for b in self._base_masks:
            np.maximum(table, _popcount(masks & b), out=table)
        return table

    def polytope_rows(self):
        table = self.rank_table()
        rows, rhs = [], []
        for m in range(1, 1 << self.n):
            size = bin(m).count("1")
            r = int(table[m])
            if r >= size or (size == 1 and r == 1):
                continue
            # only closed sets (flats) are needed
            closed = all(table[m | (1 << e)] > r for e in range(self.n) if not m >> e & 1)
            if closed:
                row = np.zeros(self.n)
                row[list(_members(m))] = 1.0
                rows.append(row)
                rhs.append(float(r))
        return _pack(rows, rhs, self.n)

    def restrict(self, keep):
        keep = sorted(self._check(keep))
        mp = _relabel(keep)
        cand = {frozenset(mp[e] for e in b if e in mp) for b in self.bases}
        top = max(len(c) for c in cand)
        return ExplicitMatroid(len(keep), tuple(c for c in cand if len(c) == top))

    def _contract(self, subset):
        keep = [e for e in range(self.n) if e not in subset]
        mp = _relabel(keep)
        return ExplicitMatroid(len(keep), tuple(frozenset(mp[e] for e in b if e in mp)
                                                for b in self.bases if subset <= b))

    def to_dict(self):
        return {"kind": "explicit", "n": self.n, "bases": [sorted(b) for b in self.bases]}


def _pack(rows, rhs, n):
    if not rows:
        return np.zeros((0, n)), np.zeros(0)
    return np.vstack(rows), np.asarray(rhs, dtype=float)


def matroid_from_dict(data: dict) -> Matroid:
    kind = data.get("kind")
    if kind == "uniform":
        return UniformMatroid(int(data["n"]), int(data["rank"]))
    if kind == "partition":
        return PartitionMatroid(int(data["n"]), tuple(map(tuple, data["parts"])), tuple(data["capacities"]))
    if kind == "graphic":
        return GraphicMatroid(tuple(tuple(e) for e in data["edges"]))
    if kind == "explicit":
        return ExplicitMatroid(int(data["n"]), tuple(map(frozenset, data["bases"])))
    raise ValueError(f"unknown matroid kind {kind!r}")


# ---------------------------------------------------------------------------
# polytope geometry
# ---------------------------------------------------------------------------

def rank(oracle: Matroid, subset) -> int:
    return oracle.rank(subset)


@dataclass(frozen=True)
class Violation:
    subset: frozenset
    amount: float


def _best_prefix(values: np.ndarray, cap: int):
    """Best ``sum(top-s values) - min(s, cap)`` over s, with the chosen count."""
    order = np.argsort(-values, kind="stable")
    sums = np.concatenate([[0.0], np.cumsum(values[order])])
    s = np.arange(len(values) + 1)
    gains = sums - np.minimum(s, cap)
    best = int(np.argmax(gains))
    return float(gains[best]), order[:best]


def max_violation(oracle: Matroid, x) -> Violation:
    """Most violated rank constraint ``x(S) - r(S)`` (may be <= 0)."""
    x = np.asarray(x, dtype=float)
    if isinstance(oracle, UniformMatroid):
        gain, chosen = _best_prefix(x, oracle.r)
        return Violation(frozenset(int(i) for i in chosen), gain)
    if isinstance(oracle, PartitionMatroid):
        total, chosen = 0.0, []
        for p, c in zip(oracle.parts, oracle.capacities):
            idx = np.array(p)
            gain, pick = _best_prefix(x[idx], c)
            if gain > 0:
                total += gain
                chosen.extend(int(i) for i in idx[pick])
        return Violation(frozenset(chosen), total)
    return _max_violation_table(oracle, x)


def _max_violation_table(oracle: Matroid, x) -> Violation:
    gaps = subset_sums(x) - oracle.rank_table()
    # prefer the largest maximizer so ties report e.g. the full edge set
    best = float(gaps.max())
    cands = np.flatnonzero(gaps >= best - 1e-12)
    pc = _popcount(cands)
    m = int(cands[np.argmax(pc)])
    return Violation(_members(m), best)


def separate(oracle: Matroid, x, tol: ToleranceModel = DEFAULT_TOL) -> Violation | None:
    """``None`` when ``x`` lies in P(M) up to eps_feas, else a maximally violated set."""
    x = np.asarray(x, dtype=float)
    if x.shape != (oracle.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({oracle.n},)")
    if np.any(x < -tol.eps_feas):
        raise ValueError("separation requires a nonnegative point")
    v = max_violation(oracle, x)
    return v if v.amount > tol.eps_feas else None


def in_polytope(oracle: Matroid, x, tol: ToleranceModel = DEFAULT_TOL, base: bool = False) -> bool:
    x = np.asarray(x, dtype=float)
    if np.any(x < -tol.eps_feas) or separate(oracle, x, tol) is not None:
        return False
    if base and abs(float(x.sum()) - oracle.full_rank) > tol.eps_feas * max(1, oracle.n):
        return False
    return True


@dataclass(frozen=True)
class TightChain:
    sets: tuple  # nested frozensets, increasing
    ranks: tuple

    def __len__(self):
        return len(self.sets)

    def indicators(self, n: int) -> np.ndarray:
        out = np.zeros((len(self.sets), n))
        for i, s in enumerate(self.sets):
            out[i, list(s)] = 1.0
        return out


def _tight_masks(oracle: Matroid, x, tol: ToleranceModel) -> np.ndarray:
    table = oracle.rank_table()
    gaps = subset_sums(x) - table
    tight = np.abs(gaps) <= tol.eps_tight * np.maximum(1.0, table)
    tight[0] = False
    return np.flatnonzero(tight)


def _closure_tight_sets(oracle: Matroid, x, tol: ToleranceModel) -> list[int]:
    # large ground sets: ring closure of the tight polytope rows and unit singletons
    rows, rhs = oracle.polytope_rows()
    gens: set[int] = set()
    for row, r in zip(rows, rhs):
        if abs(float(row @ x) - r) <= tol.eps_tight * max(1.0, r):
            gens.add(_mask(np.flatnonzero(row)))
    for e in np.flatnonzero(np.abs(x - 1.0) <= tol.eps_tight):
        gens.add(1 << int(e))
    if abs(float(x.sum()) - oracle.full_rank) <= tol.eps_tight * max(1.0, oracle.n):
        gens.add((1 << oracle.n) - 1)
    family = set(gens)
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(family), 2):
            for c in (a | b, a & b):
                if c and c not in family:
                    family.add(c)
                    changed = True
    return sorted(family)


def _chain_from_masks(masks, n: int) -> list[int]:
    masks = np.asarray(masks, dtype=np.int64)
    chain: list[int] = []
    cur = 0
    while True:
        unions = masks | cur
        unions = unions[unions != cur]
        if unions.size == 0:
            return chain
        nxt = int(unions[np.argmin(_popcount(unions))])
        chain.append(nxt)
        cur = nxt


def tight_chain(oracle: Matroid, x, tol: ToleranceModel = DEFAULT_TOL) -> TightChain:
    """Maximal chain of tight rank sets; its indicators span every tight rank constraint."""
    x = np.asarray(x, dtype=float)
    if x.shape != (oracle.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({oracle.n},)")
    if np.any(x < -tol.eps_feas) or np.any(x > 1 + tol.eps_feas) or separate(oracle, x, tol) is not None:
        raise ValueError("tight_chain requires a point of P(M) within [0,1]^n")
    if oracle.n <= TABLE_LIMIT:
        masks = _tight_masks(oracle, x, tol)
    else:
        masks = _closure_tight_sets(oracle, x, tol)
    chain = _chain_from_masks(masks, oracle.n)
    sets = tuple(_members(m) for m in chain)
    return TightChain(sets, tuple(oracle.rank(s) for s in sets))


def contract(oracle: Matroid, subset) -> Matroid:
    """Contraction by an independent set, re-indexed onto the remaining elements in order."""
    s = oracle._check(subset)
    if not oracle.is_independent(s):
        raise ValueError(f"cannot contract dependent set {sorted(s)}")
    if not s:
        return oracle
    return oracle._contract(s)


def minor(oracle: Matroid, ones, zeros) -> tuple[Matroid, list[int]]:
    """Contract ``ones`` and delete ``zeros``; returns the minor and its original labels."""
    ones = oracle._check(ones)
    zeros = oracle._check(zeros)
    keep = [e for e in range(oracle.n) if e not in zeros]
    restricted = oracle.restrict(keep)
    mp = _relabel(keep)
    con = contract(restricted, {mp[e] for e in ones})
    labels = [e for e in keep if e not in ones]
    return con, labels


def _greedy_order(oracle: Matroid, p: np.ndarray, tol: ToleranceModel) -> list[int]:
    chain = tight_chain(oracle, p, tol)
    zero = p <= tol.eps_feas
    placed = np.zeros(oracle.n, dtype=bool)
    order: list[int] = []
    levels = [sorted(s) for s in chain.sets] + [list(range(oracle.n))]
    for level in levels:
        fresh = [e for e in level if not placed[e]]
        fresh.sort(key=lambda e: (bool(zero[e]), -p[e], e))
        order.extend(fresh)
        placed[fresh] = True
    return order


def base_decompose(oracle: Matroid, x, tol: ToleranceModel = DEFAULT_TOL) -> list[tuple[frozenset, float]]:
    """Convex combination of bases equal to ``x`` (a point of the base polytope)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (oracle.n,) or not in_polytope(oracle, x, tol, base=True) or np.any(x > 1 + tol.eps_feas):
        raise ValueError("base_decompose requires a point of the base polytope")
    rows, rhs = oracle.polytope_rows()
    full = oracle.full_rank
    z = np.clip(x, 0.0, 1.0)
    mass = 1.0
    out: list[tuple[frozenset, float]] = []
    for _ in range(oracle.n + 2):
        p = np.clip(z / mass, 0.0, 1.0)
        p *= full / p.sum() if p.sum() > 0 else 1.0
        base = oracle.greedy(_greedy_order(oracle, p, tol))
        ind = np.zeros(oracle.n)
        ind[list(base)] = 1.0
        theta = 1.0
        if base:
            theta = min(theta, float(p[ind > 0].min()))
        outside = ind == 0
        if outside.any():
            theta = min(theta, float((1.0 - p[outside]).min()))
        if rows.shape[0]:
            denom = rhs - rows @ ind
            room = rhs - rows @ p
            pos = denom > 1e-12
            if pos.any():
                theta = min(theta, float(np.min(np.maximum(room[pos], 0.0) / denom[pos])))
        if theta >= 1.0 - tol.eps_feas:
            out.append((base, mass))
            break
        if theta <= tol.eps_rank:
            raise RuntimeError("base decomposition stalled; point not in the base polytope?")
        w = theta * mass
        out.append((base, w))
        z = np.maximum(z - w * ind, 0.0)
        mass -= w
        if mass <= tol.eps_feas:
            break
    total = sum(w for _, w in out)
    return [(b, w / total) for b, w in out]


# ---------------------------------------------------------------------------
# laminar families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaminarFamily:
    """Sets with required values; ``sense`` is 'ge', 'le' or 'eq' for ``x(S) ? value``."""

    n: int
    sets: tuple
    values: tuple
    sense: str = "ge"

    def __post_init__(self):
        sets = tuple(frozenset(int(e) for e in s) for s in self.sets)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(sets) != len(self.values):
            raise ValueError("one required value per laminar set")
        if self.sense not in ("ge", "le", "eq"):
            raise ValueError(f"unknown sense {self.sense!r}")
        for s in sets:
            if any(not 0 <= e < self.n for e in s):
                raise ValueError("laminar set element outside ground set")
        for a, b in itertools.combinations(sets, 2):
            if a & b and not (a <= b or b <= a):
                raise ValueError(f"sets {sorted(a)} and {sorted(b)} cross; family is not laminar")

    def nesting_order(self) -> list[int]:
        """Indices ordered so that every set precedes its supersets."""
        return sorted(range(len(self.sets)), key=lambda i: (len(self.sets[i]), i))

    def rows(self) -> np.ndarray:
        out = np.zeros((len(self.sets), self.n))
        for i, s in enumerate(self.sets):
            out[i, list(s)] = 1.0
        return out

    def violation(self, x) -> float:
        if not self.sets:
            return 0.0
        diff = self.rows() @ np.asarray(x, dtype=float) - np.array(self.values)
        if self.sense == "ge":
            return float(max(0.0, (-diff).max()))
        if self.sense == "le":
            return float(max(0.0, diff.max()))
        return float(np.abs(diff).max())

    def restrict(self, keep, fixed) -> "LaminarFamily":
        """Family on ``keep`` with values reduced by the contribution of ``fixed`` (full-length)."""
        keep = list(keep)
        mp = _relabel(keep)
        fixed = np.asarray(fixed, dtype=float)
        sets, vals = [], []
        for s, v in zip(self.sets, self.values):
            inner = frozenset(mp[e] for e in s if e in mp)
            outer = sum(fixed[e] for e in s if e not in mp)
            if inner:
                sets.append(inner)
                vals.append(v - outer)
        return LaminarFamily(len(keep), tuple(sets), tuple(vals), self.sense)

    def to_dict(self):
        return {"sense": self.sense,
                "sets": [{"members": sorted(s), "value": v} for s, v in zip(self.sets, self.values)]}


def laminar_tight(family: LaminarFamily, x, tol: ToleranceModel = DEFAULT_TOL) -> list[frozenset]:
    x = np.asarray(x, dtype=float)
    out = []
    for s, v in zip(family.sets, family.values):
        if abs(float(x[list(s)].sum()) - v) <= tol.eps_tight * max(1.0, abs(v)):
            out.append(s)
    return out


def chain_rank(chain: TightChain, n: int, tol: ToleranceModel = DEFAULT_TOL) -> int:
    if not len(chain):
        return 0
    return numerical_rank(chain.indicators(n), tol)
