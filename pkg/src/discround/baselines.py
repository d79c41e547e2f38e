"""Reference rounders: independent randomized rounding, iterated rounding, exhaustive search."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .matroid import Matroid
from .numeric import DEFAULT_TOL, ToleranceModel, orthonormal_nullspace_basis

BRUTE_FORCE_LIMIT = 22


@dataclass(frozen=True)
class ViolationProfile:
    violations: np.ndarray
    normalized: np.ndarray | None = None

    @property
    def max(self) -> float:
        return float(self.violations.max(initial=0.0))

    @classmethod
    def of(cls, a, b, x, bounds=None) -> "ViolationProfile":
        a = np.atleast_2d(np.asarray(a, dtype=float))
        v = np.abs(a @ np.asarray(x, dtype=float) - np.asarray(b, dtype=float))
        norm = None if bounds is None else v / np.asarray(bounds, dtype=float)
        return cls(v, norm)


def randomized_round(y, seed=None) -> np.ndarray:
    """Set ``x_i = 1`` with probability ``y_i``, independently."""
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)):
        raise ValueError("point outside [0,1]^n")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.Philox(ss))
    return (rng.random(y.shape[0]) < y).astype(float)


def fewest_fractional(a_frac: np.ndarray, live: list[int]) -> int:
    """Drop rule: the live row with the smallest support on fractional coordinates."""
    support = np.count_nonzero(a_frac[live], axis=1)
    return live[int(np.argmin(support))]


def iterated_round(y, a=None, drop_rule=fewest_fractional, tol: ToleranceModel = DEFAULT_TOL):
    """Round by moving inside the null space of the live rows until a box face is hit.

    When no direction is left, one row is dropped by ``drop_rule(a_frac,
    live)``. Returns ``(x, dropped)`` with the dropped row indices in order.
    """
    x = np.array(y, dtype=float)
    n = x.shape[0]
    a = np.zeros((0, n)) if a is None else np.atleast_2d(np.asarray(a, dtype=float))
    live = list(range(a.shape[0]))
    dropped: list[int] = []
    while True:
        frac = np.flatnonzero((x > tol.eps_feas) & (x < 1 - tol.eps_feas))
        x[(x <= tol.eps_feas)] = 0.0
        x[(x >= 1 - tol.eps_feas)] = 1.0
        if frac.size == 0:
            return x, dropped
        if not live:
            x[frac] = np.floor(x[frac] + 0.5)
            return x, dropped
        sub = a[np.ix_(live, frac)]
        basis = orthonormal_nullspace_basis(sub, tol, n=frac.size)
        if basis.shape[0] == 0:
            j = drop_rule(a[:, frac], live)
            live.remove(j)
            dropped.append(j)
            continue
        d = basis[0]
        xf = x[frac]
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(d > 0, (1 - xf) / d, np.inf)
            down = np.where(d < 0, -xf / d, np.inf)
        steps = np.minimum(up, down)
        i = int(np.argmin(steps))
        x[frac] = np.clip(xf + steps[i] * d, 0.0, 1.0)
        x[frac[i]] = 1.0 if d[i] > 0 else 0.0


def _candidates(n: int, matroid: Matroid | None, chunk: int = 1 << 16):
    if matroid is None:
        total = 1 << n
        cols = np.arange(n)
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk))
            yield ((idx[:, None] >> cols) & 1).astype(float)
        return
    r = matroid.full_rank
    batch = []
    for combo in itertools.combinations(range(n), r):
        if matroid.is_independent(combo):
            v = np.zeros(n)
            v[list(combo)] = 1.0
            batch.append(v)
            if len(batch) == chunk:
                yield np.array(batch)
                batch = []
    if batch:
        yield np.array(batch)


def brute_force_best(a, b, matroid: Matroid | None = None):
    """Exact ``min max_j |<a_j, x> - b_j|`` over 0/1 vectors (bases of ``matroid`` if given).

    Returns ``(value, witness)``; the witness is the first minimizer in
    enumeration order.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    n = a.shape[1] if matroid is None else matroid.n
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"exhaustive search limited to n <= {BRUTE_FORCE_LIMIT}, got {n}")
    if a.shape[0] and a.shape[1] != n:
        raise ValueError("constraint matrix does not match the ground set")
    best, witness = np.inf, None
    for cands in _candidates(n, matroid):
        if a.shape[0]:
            viol = np.max(np.abs(cands @ a.T - b), axis=1)
        else:
            viol = np.zeros(cands.shape[0])
        i = int(np.argmin(viol))
        if viol[i] < best:
            best, witness = float(viol[i]), cands[i].copy()
    if witness is None:
        raise ValueError("matroid has no bases")
    return best, witness
