"""Drivers built on partial rounding.

``round_full`` repeats partial rounding with a per-constraint lambda
schedule chosen from the cheapest of four additive bounds, then finishes
the last few fractional coordinates by enumeration. The other drivers
reduce degree-bounded matroid bases, multi-budget bases and path routing
to that loop.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .matroid import (
    LaminarFamily,
    Matroid,
    PartitionMatroid,
    base_decompose,
    in_polytope,
    minor,
)
from .numeric import DEFAULT_TOL, ToleranceModel
from .report import ConstraintRow, RoundingReport
from .walk import (
    UNBOUNDED,
    PreconditionError,
    SideConstraint,
    WalkConfig,
    WalkError,
    fractional_mask,
    partial_round,
)

log = logging.getLogger(__name__)

PARTS = ("M1", "M2", "M3", "M4")
COMPLETION_LIMIT = 16


class ConvergenceError(WalkError):
    """Partial rounding made no progress after all restarts."""


# ---------------------------------------------------------------------------
# bound menu and lambda schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleParams:
    c1: float = 1 / 200
    c2: float | None = None
    k1: float | None = None
    c_l: float = 1.0
    groups: tuple | None = None

    def __post_init__(self):
        if not 0 < self.c1 < 1 / 150:
            raise ValueError("c1 must lie in (0, 1/150)")
        if self.c_l <= 0:
            raise ValueError("c_l must be positive")

    def resolved(self, k0: float) -> "ScheduleParams":
        c2 = 2 * k0 if self.c2 is None else self.c2
        k1 = 4 * k0 if self.k1 is None else self.k1
        if c2 < 2 * k0:
            raise ValueError("c2 must be at least 2*k0")
        return ScheduleParams(self.c1, c2, k1, self.c_l, self.groups)


def l_scale(n: int, m: int, c_l: float = 1.0) -> float:
    return c_l * max(1, math.ceil(math.log2(max(m, 2)))) * max(1, math.ceil(math.log2(max(n, 2))))


@dataclass(frozen=True)
class PartLabel:
    part: str
    menu: tuple

    @property
    def bound_min(self) -> float:
        return min(self.menu)


def menu_values(j: int, n: int, m: int, b: float, delta: float, big_l: float) -> tuple:
    """The four additive bounds for constraint ``j`` (1-based)."""
    return (
        math.sqrt(j),
        math.sqrt(n * math.log(2 + m / n)),
        math.sqrt(big_l * max(b, 0.0)) + big_l,
        math.sqrt(delta) * math.log(max(n, 2)),
    )


def column_sparsity(a) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 1
    return max(1, int(np.max(np.count_nonzero(a, axis=0))))


def row_scales(a) -> np.ndarray:
    """Largest absolute entry of each row (1 for empty rows)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] == 0:
        return np.zeros(0)
    w = np.max(np.abs(a), axis=1) if a.shape[1] else np.ones(a.shape[0])
    return np.where(w > 0, w, 1.0)


def assign_parts(b, n: int, m: int | None = None, delta: float = 1, c_l: float = 1.0,
                 scales=None) -> list[PartLabel]:
    """Label constraint ``j`` by its smallest menu value; ties go to the lower part.

    ``scales`` gives each row's largest entry; a row with entries in [0, w]
    gets the menu of its [0, 1] rescaling multiplied by ``w``.
    """
    b = list(b)
    m = len(b) if m is None else m
    scales = [1.0] * len(b) if scales is None else [float(w) for w in scales]
    big_l = l_scale(n, m, c_l)
    out = []
    for j, (bj, w) in enumerate(zip(b, scales), start=1):
        menu = tuple(w * v for v in menu_values(j, n, m, bj / w, delta, big_l))
        out.append(PartLabel(PARTS[int(np.argmin(menu))], menu))
    return out


def lambda_for(part: str, j: int, f: float, b_j: float, support: int, params: ScheduleParams,
               delta: float = 1, k0: float = 10.0, group_size: int = 1) -> float:
    p = params.resolved(k0)
    if f < 1:
        raise ValueError("f must be at least 1")
    if part in ("M1", "M2"):
        t = p.c1 * f
        return 0.0 if j < t else math.sqrt(p.c2 * math.log(j / t))
    if part == "M3":
        return UNBOUNDED
    if part == "M4":
        if support <= 0:
            return UNBOUNDED
        return math.sqrt(p.k1 * group_size * delta) / math.sqrt(support)
    raise ValueError(f"unknown part {part!r}")


# ---------------------------------------------------------------------------
# full rounding
# ---------------------------------------------------------------------------

@dataclass
class IterationLog:
    f: int
    lambda_sum: float
    newly_integral: int
    truncations: int
    restarts_used: int
    m4_scale: float


def _structure_feasible(structure, x, base: bool) -> bool:
    if structure is None:
        return True
    if isinstance(structure, Matroid):
        sel = np.flatnonzero(x > 0.5)
        if not structure.is_independent(sel):
            return False
        return not base or len(sel) == structure.full_rank
    return structure.violation(x) <= 1e-9


def complete_residual(x, score, structure=None, base: bool = False, limit: int = COMPLETION_LIMIT,
                      tol: ToleranceModel = DEFAULT_TOL):
    """Best structure-feasible 0/1 completion of the fractional coordinates of ``x``.

    ``score`` maps a batch of full 0/1 vectors (rows) to one number each;
    the lowest score wins and ties go to the earliest enumeration order.
    """
    x = np.asarray(x, dtype=float)
    frac = np.flatnonzero(fractional_mask(x, tol))
    fixed = np.where(x > 0.5, 1.0, 0.0)
    if frac.size == 0:
        return fixed
    fixed[frac] = 0.0
    if frac.size > limit:
        raise ConvergenceError(f"{frac.size} fractional coordinates left; enumeration limit is {limit}")
    bits = ((np.arange(2 ** frac.size)[:, None] >> np.arange(frac.size)) & 1).astype(float)
    cands = np.repeat(fixed[None, :], bits.shape[0], axis=0)
    cands[:, frac] = bits
    if isinstance(structure, Matroid) and base:
        need = structure.full_rank - int(fixed.sum())
        cands = cands[bits.sum(axis=1) == need]
    scores = score(cands)
    for idx in np.argsort(scores, kind="stable"):
        if _structure_feasible(structure, cands[idx], base):
            return cands[idx]
    raise ConvergenceError("no structure-feasible integral completion")


def _seed_for(seed, *path):
    base = [] if seed is None else [int(seed)]
    return tuple(base + [int(p) for p in path])


def _iterate(x, rows, lambdas_of, structure, cfg: WalkConfig, seed, base: bool,
             stop_at: int, tol: ToleranceModel, logs: list, extra_side=()):
    """Partial rounding rounds until at most ``stop_at`` coordinates stay fractional.

    ``lambdas_of(f, active)`` returns (lambdas, m4_scale) for the current
    fractional index set, or ``None`` when the lambda condition cannot be
    met, in which case the loop ends early.
    """
    it = 0
    truncations = 0
    while True:
        active = np.flatnonzero(fractional_mask(x, tol))
        f = active.size
        if f <= stop_at:
            break
        got = lambdas_of(f, active)
        if got is None:
            log.info("lambda condition cannot be met at f=%d; stopping iterations", f)
            break
        lams, scale = got
        side = [SideConstraint(rows[j], lams[j]) for j in range(rows.shape[0])]
        side += [SideConstraint(r, lam) for r, lam in extra_side]
        x_new, rep = partial_round(x, side, structure, cfg, seed=_seed_for(seed, it), tol=tol, base=base)
        truncations += rep.truncations
        lam_sum = float(sum(math.exp(-min(l, f) ** 2 / cfg.k0) for l in lams if math.isfinite(l)))
        logs.append(IterationLog(f, lam_sum, rep.newly_integral, rep.truncations, rep.restarts_used, scale))
        if rep.newly_integral == 0:
            if f <= COMPLETION_LIMIT:
                # few coordinates spread over many scale classes can pin each other
                log.info("walk stalled at f=%d; finishing by enumeration", f)
                break
            raise ConvergenceError(f"no coordinate became integral at f={f} after {rep.restarts_used} restarts")
        if not rep.success:
            log.warning("iteration %d accepted a weak attempt: %d newly integral of %d", it, rep.newly_integral, f)
        x = x_new
        it += 1
    return x, it, truncations


def _schedule(a, b, labels, params: ScheduleParams, delta, cfg: WalkConfig, n_total: int,
              budget_extra: float = 0.0, group_of=None, group_delta=None):
    """Closure computing the per-iteration lambdas; M4 scale doubles until the condition holds."""
    m = a.shape[0]
    nz = a != 0

    def lambdas_of(f, active, force=False):
        support = nz[:, active].sum(axis=1)
        base = []
        for j in range(m):
            if support[j] == 0:
                base.append(UNBOUNDED)
                continue
            part = labels[j].part
            if part == "M4" and group_of is not None:
                g = group_of[j]
                base.append(lambda_for(part, j + 1, f, b[j], int(support[j]), params,
                                       group_delta[g], cfg.k0, group_size=len(group_delta)))
            else:
                base.append(lambda_for(part, j + 1, f, b[j], int(support[j]), params, delta, cfg.k0))
        if force:
            return base, 1.0
        scale = 1.0
        for _ in range(12):
            lams = [l * math.sqrt(scale) if labels[j].part == "M4" else l for j, l in enumerate(base)]
            f_eff = f if cfg.lambda_scope == "active" else n_total
            vals = [l for l in lams if math.isfinite(l)]
            total = float(np.sum(np.exp(-np.minimum(vals, f_eff) ** 2 / cfg.k0))) if vals else 0.0
            if total + budget_extra < f_eff / 16:
                if scale > 1:
                    log.info("M4 scale escalated to %g at f=%d", scale, f)
                return lams, scale
            scale *= 2
        return None

    return lambdas_of


def _rows_from(labels, a, b, x, lam_first, n, m, delta, big_l) -> list[ConstraintRow]:
    rows = []
    viol = np.abs(a @ x - b)
    for j in range(a.shape[0]):
        menu = labels[j].menu
        rows.append(ConstraintRow(j, labels[j].part, float(b[j]), float(lam_first[j]), float(viol[j]), *menu))
    return rows


def round_full(y, a, b=None, structure=None, cfg: WalkConfig | None = None, seed=0,
               params: ScheduleParams | None = None, base: bool = False, residual_max: int = 8,
               groups=None, tol: ToleranceModel = DEFAULT_TOL):
    """Round ``y`` to a 0/1 vector while keeping each ``<a_j, x>`` near ``b_j``.

    ``b`` defaults to ``a @ y``. ``groups`` optionally assigns each row a
    group id for the group-sparse M4 rule. Returns ``(x, RoundingReport)``.
    """
    cfg = cfg or WalkConfig()
    params = params or ScheduleParams()
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    a = np.zeros((0, n)) if a is None else np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[1] != n:
        raise ValueError(f"constraint matrix has {a.shape[1]} columns, point has {n}")
    m = a.shape[0]
    b = a @ y if b is None else np.asarray(b, dtype=float)
    delta = column_sparsity(a)
    big_l = l_scale(n, max(m, 1), params.c_l)
    labels = assign_parts(b, n, max(m, 1), delta, params.c_l, row_scales(a))
    group_of = group_delta = None
    if groups is not None:
        group_of = [int(g) for g in groups]
        group_delta = {g: column_sparsity(a[[i for i in range(m) if group_of[i] == g]]) for g in set(group_of)}
    lambdas_of = _schedule(a, b, labels, params, delta, cfg, n, group_of=group_of, group_delta=group_delta)

    f0 = int(fractional_mask(y, tol).sum())
    lam_first = lambdas_of(max(f0, 1), np.flatnonzero(fractional_mask(y, tol)), force=True)[0] if m else []
    logs: list[IterationLog] = []
    x, iters, truncs = _iterate(y.copy(), a, lambdas_of, structure, cfg, seed, base, residual_max, tol, logs)

    bound_min = np.array([lab.bound_min for lab in labels]) if m else np.zeros(0)

    def score(cands):
        if m == 0:
            return np.zeros(cands.shape[0])
        return np.max(np.abs(cands @ a.T - b) / bound_min, axis=1)

    x = complete_residual(x, score, structure, base, tol=tol)
    internal = {j: max(float(b[j]), big_l) for j in range(m) if labels[j].part == "M3"}
    rep = RoundingReport(
        rows=_rows_from(labels, a, b, x, lam_first, n, m, delta, big_l),
        meta={"driver": "round", "seed": seed, "preset": cfg.preset, "restarts": cfg.restarts,
              "iterations": iters, "truncations": truncs, "n": n, "m": m, "delta": delta, "L": big_l,
              "m3_internal_targets": internal, "iteration_log": [vars(l) for l in logs]},
    )
    return x, rep


# ---------------------------------------------------------------------------
# degree-bounded matroid bases
# ---------------------------------------------------------------------------

@dataclass
class DegMatResult:
    base: frozenset
    cost: float
    lp_cost: float
    loads: np.ndarray
    violations: np.ndarray
    report: RoundingReport
    decomposition: list = field(default_factory=list)


def degmat(costs, a, b, matroid: Matroid, y, cfg: WalkConfig | None = None, seed=0,
           params: ScheduleParams | None = None, tol: ToleranceModel = DEFAULT_TOL) -> DegMatResult:
    """Base of ``matroid`` with cost at most the fractional cost plus one and small degree excess."""
    cfg = cfg or WalkConfig()
    params = params or ScheduleParams()
    y = np.asarray(y, dtype=float)
    n = matroid.n
    d = np.asarray(costs, dtype=float)
    if np.any(d < 0):
        raise ValueError("costs must be nonnegative")
    a = np.zeros((0, n)) if a is None else np.atleast_2d(np.asarray(a, dtype=float))
    m = a.shape[0]
    b = np.asarray(b, dtype=float) if b is not None else a @ y
    if y.shape != (n,) or not in_polytope(matroid, y, tol, base=True) or np.any(y > 1 + tol.eps_feas):
        raise PreconditionError("fractional point is outside the base polytope")
    delta = column_sparsity(a)
    labels = assign_parts(b, n, max(m, 1), delta, params.c_l, row_scales(a))
    lambdas_of = _schedule(a, b, labels, params, delta, cfg, n, budget_extra=1.0)
    lam_first = lambdas_of(max(int(fractional_mask(y, tol).sum()), 1), np.flatnonzero(fractional_mask(y, tol)),
                           force=True)[0]
    logs: list[IterationLog] = []
    stop = max(8, int(cfg.k0))
    x, iters, truncs = _iterate(y.copy(), a, lambdas_of, matroid, cfg, seed, True, stop, tol, logs,
                                extra_side=[(d, 0.0)])
    ones = np.flatnonzero(~fractional_mask(x, tol) & (x > 0.5))
    zeros = np.flatnonzero(~fractional_mask(x, tol) & (x <= 0.5))
    sub, labels_sub = minor(matroid, ones, zeros)
    frac_part = np.clip(x[labels_sub], 0.0, 1.0)
    if sub.n:
        decomp = base_decompose(sub, frac_part, tol)
    else:
        decomp = [(frozenset(), 1.0)]
    options = []
    for bset, w in decomp:
        full = frozenset(int(e) for e in ones) | frozenset(labels_sub[e] for e in bset)
        options.append((float(sum(d[e] for e in full)), sorted(full), full, w))
    options.sort(key=lambda t: (t[0], t[1]))
    cost, _, chosen, _ = options[0]
    if not matroid.is_independent(chosen) or len(chosen) != matroid.full_rank:
        raise AssertionError("decomposition produced a non-base")
    ind = np.zeros(n)
    ind[list(chosen)] = 1.0
    loads = a @ ind
    viol = np.maximum(loads - b, 0.0)
    rows = [ConstraintRow(j, labels[j].part, float(b[j]), float(lam_first[j]), float(viol[j]), *labels[j].menu)
            for j in range(m)]
    lp_cost = float(d @ y)
    if cost > lp_cost + 1 + 1e-9:
        raise AssertionError(f"base cost {cost} exceeds fractional cost {lp_cost} + 1")
    rep = RoundingReport(rows, {"driver": "degmat", "seed": seed, "preset": cfg.preset, "restarts": cfg.restarts,
                                "iterations": iters, "truncations": truncs, "cost": cost, "lp_cost": lp_cost,
                                "cost_drift": float(abs(d @ x - lp_cost)), "decomposition_size": len(decomp),
                                "iteration_log": [vars(l) for l in logs]})
    return DegMatResult(chosen, cost, lp_cost, loads, viol, rep,
                        [(sorted(o[2]), o[3]) for o in options])


# ---------------------------------------------------------------------------
# multiple budgets
# ---------------------------------------------------------------------------

@dataclass
class MulticritResult:
    status: str
    base: frozenset | None
    costs: np.ndarray | None
    ratios: np.ndarray | None
    constant: float | None
    branches: int
    heavy: list

    @property
    def feasible(self) -> bool:
        return self.status != "INFEASIBLE"


def _lp_point(sub: Matroid, cost_rows, caps):
    from scipy.optimize import linprog

    n = sub.n
    rows, rhs = sub.polytope_rows()
    a_ub = np.vstack([rows, cost_rows]) if rows.shape[0] else cost_rows
    b_ub = np.concatenate([rhs, caps]) if rows.shape[0] else caps
    res = linprog(np.zeros(n), A_ub=a_ub, b_ub=b_ub, A_eq=np.ones((1, n)), b_eq=[sub.full_rank],
                  bounds=[(0, 1)] * n, method="highs")
    if res.status != 0:
        return None
    return np.clip(res.x, 0.0, 1.0)


def heavy_elements(costs, budgets, eps: float) -> list[int]:
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    k = costs.shape[0]
    thr = eps / math.sqrt(k) * np.asarray(budgets, dtype=float)
    return [int(e) for e in np.flatnonzero(np.any(costs > thr[:, None], axis=0))]


def _heavy_subsets(matroid: Matroid, heavy, costs, budgets, max_size: int):
    """Independent, within-budget heavy subsets in size-ascending lexicographic order."""
    level = [()]
    yield ()
    for _ in range(max_size):
        nxt = []
        for h in level:
            start = heavy.index(h[-1]) + 1 if h else 0
            for e in heavy[start:]:
                cand = h + (e,)
                if not matroid.is_independent(cand):
                    continue
                if np.any(costs[:, list(cand)].sum(axis=1) > budgets + 1e-12):
                    continue
                nxt.append(cand)
                yield cand
        if not nxt:
            return
        level = nxt


def multicrit(matroid: Matroid, costs, budgets, eps: float, cfg: WalkConfig | None = None, seed=0,
              max_branches: int = 10 ** 6, retries: int = 3, tol: ToleranceModel = DEFAULT_TOL) -> MulticritResult:
    """Base with every cost within ``(1+eps)`` of its budget, via heavy-element guessing."""
    cfg = cfg or WalkConfig()
    costs = np.atleast_2d(np.asarray(costs, dtype=float))
    budgets = np.asarray(budgets, dtype=float).ravel()
    k, n = costs.shape
    if n != matroid.n or budgets.shape[0] != k:
        raise ValueError("costs must be k x n with one budget per row")
    if np.any(budgets <= 0) or eps <= 0:
        raise ValueError("budgets and eps must be positive")
    if np.all(costs == 0):
        base = matroid.greedy(range(n))
        return MulticritResult("OK", base, np.zeros(k), np.zeros(k), 0.0, 0, [])
    heavy = heavy_elements(costs, budgets, eps)
    max_size = math.ceil(k ** 1.5 / eps)
    best = None
    branches = 0
    lp_feasible = 0
    for h in _heavy_subsets(matroid, heavy, costs, budgets, max_size):
        branches += 1
        if branches > max_branches:
            log.warning("enumeration cap of %d branches reached", max_branches)
            break
        excluded = [e for e in heavy if e not in h]
        sub, labels = minor(matroid, list(h), excluded)
        if sub.full_rank != matroid.full_rank - len(h):
            # dropping the excluded heavy elements lost rank: no base of M fits this guess
            continue
        spent = costs[:, list(h)].sum(axis=1)
        sub_costs = costs[:, labels]
        if sub.n == 0:
            xs = np.zeros(0)
        else:
            xs = _lp_point(sub, sub_costs, budgets - spent)
            if xs is None:
                continue
        lp_feasible += 1
        for r in range(retries):
            try:
                pick = _round_budgets(sub, sub_costs, budgets - spent, xs, cfg, _seed_for(seed, branches, r), tol)
            except (WalkError, PreconditionError) as exc:
                log.info("branch %d retry %d failed: %s", branches, r, exc)
                continue
            chosen = frozenset(h) | frozenset(labels[e] for e in np.flatnonzero(pick > 0.5))
            total = costs[:, sorted(chosen)].sum(axis=1)
            ratios = total / budgets
            worst = float(ratios.max())
            if best is None or worst < best[0]:
                best = (worst, chosen, total, ratios)
            if worst <= 1 + eps + 1e-9:
                c = max(0.0, (worst - 1) / eps)
                return MulticritResult("OK", chosen, total, ratios, c, branches, heavy)
    if best is None:
        return MulticritResult("INFEASIBLE", None, None, None, None, branches, heavy)
    worst, chosen, total, ratios = best
    c = max(0.0, (worst - 1) / eps)
    log.warning("best basis exceeds (1+eps) budgets; measured constant %.3f", c)
    return MulticritResult("APPROX", chosen, total, ratios, c, branches, heavy)


def _round_budgets(sub: Matroid, cost_rows, caps, x, cfg: WalkConfig, seed, tol):
    k = cost_rows.shape[0]
    big_n = 16 * k

    def lambdas_of(f, active):
        if f >= big_n:
            return [0.0] * k, 1.0
        return [math.sqrt(cfg.k0 * math.log(big_n / f))] * k, 1.0

    x = np.asarray(x, dtype=float).copy()
    it = 0
    while True:
        active = np.flatnonzero(fractional_mask(x, tol))
        f = active.size
        if f <= 8:
            break
        lams, _ = lambdas_of(f, active)
        side = [SideConstraint(cost_rows[j], lams[j]) for j in range(k)]
        x_new, rep = partial_round(x, side, sub, cfg, seed=_seed_for(None, *seed, it), tol=tol, base=True,
                                   check_lambda=False)
        if rep.newly_integral == 0:
            if f <= COMPLETION_LIMIT:
                break
            raise ConvergenceError(f"no progress at f={f}")
        x = x_new
        it += 1

    def score(cands):
        return np.max((cands @ cost_rows.T) / np.maximum(caps, 1e-12), axis=1)

    return complete_residual(x, score, sub, base=True, tol=tol)


# ---------------------------------------------------------------------------
# path routing
# ---------------------------------------------------------------------------

@dataclass
class PathInstance:
    """Ground set of candidate paths: ``paths[i] = (pair, edges)``."""

    paths: list
    y: np.ndarray
    edges: list
    a: np.ndarray
    b: np.ndarray
    matroid: PartitionMatroid

    @property
    def delta(self) -> int:
        return max((len(p[1]) for p in self.paths), default=1)


def _edge_key(e):
    return tuple(e) if isinstance(e, (list, tuple)) else e


def rsp_reduce(pairs, capacities) -> PathInstance:
    """One partition part per pair (choose one path), one degree row per edge.

    ``pairs`` is a list of ``[(edges, weight), ...]``; weights of a pair are
    normalized to sum to one. ``capacities`` maps edge -> bound.
    """
    paths, weights, parts = [], [], []
    for i, cands in enumerate(pairs):
        cands = [(tuple(_edge_key(e) for e in p), float(w)) for p, w in cands if float(w) > 0]
        if not cands:
            raise ValueError(f"pair {i} has no path with positive weight")
        total = sum(w for _, w in cands)
        if total < 1 - 1e-9:
            raise ValueError(f"pair {i} has total path weight {total} < 1")
        part = []
        for p, w in cands:
            part.append(len(paths))
            paths.append((i, p))
            weights.append(w / total)
        parts.append(part)
    edges = sorted({e for _, p in paths for e in p}, key=repr)
    index = {e: r for r, e in enumerate(edges)}
    a = np.zeros((len(edges), len(paths)))
    for c, (_, p) in enumerate(paths):
        for e in p:
            a[index[e], c] += 1.0
    b = np.array([float(capacities.get(e, capacities.get(str(e), np.inf))) for e in edges])
    y = np.array(weights)
    b = np.where(np.isfinite(b), b, a @ y)
    matroid = PartitionMatroid(len(paths), [tuple(p) for p in parts], [1] * len(parts))
    return PathInstance(paths, y, edges, a, b, matroid)


@dataclass
class PathResult:
    chosen: dict
    loads: dict
    violations: dict
    report: RoundingReport


def rsp(pairs, capacities, cfg: WalkConfig | None = None, seed=0) -> PathResult:
    inst = rsp_reduce(pairs, capacities)
    res = degmat(np.zeros(inst.y.shape[0]), inst.a, inst.b, inst.matroid, inst.y, cfg, seed)
    chosen = {}
    for c in sorted(res.base):
        pair, p = inst.paths[c]
        chosen[pair] = list(p)
    loads = {e: float(v) for e, v in zip(inst.edges, res.loads)}
    viol = {e: float(v) for e, v in zip(inst.edges, res.violations)}
    res.report.meta["driver"] = "rsp"
    return PathResult(chosen, loads, viol, res.report)


@dataclass
class MultiPathResult:
    counts: dict
    loads: dict
    requirements_met: bool
    report: RoundingReport


def laminar_rsp(pairs, requirements, capacities, cfg: WalkConfig | None = None, seed=0,
                tol: ToleranceModel = DEFAULT_TOL) -> MultiPathResult:
    """Multiset of paths meeting every laminar requirement ``(set of pairs, r)`` exactly or above.

    ``pairs`` lists ``[(edges, multiplicity), ...]``; multiplicities may exceed one.
    """
    paths, z = [], []
    for i, cands in enumerate(pairs):
        for p, w in cands:
            if float(w) < 0:
                raise ValueError("negative path multiplicity")
            paths.append((i, tuple(_edge_key(e) for e in p)))
            z.append(float(w))
    z = np.array(z)
    whole = np.floor(z + tol.eps_feas)
    frac = np.clip(z - whole, 0.0, 1.0)
    frac[frac < tol.eps_feas] = 0.0
    fam_sets, fam_vals = [], []
    for members, r in requirements:
        members = set(int(i) for i in members)
        cols = [c for c, (pair, _) in enumerate(paths) if pair in members]
        have = float(z[cols].sum())
        if have < float(r) - 1e-9:
            raise PreconditionError(f"fractional solution gives {have} < {r} paths for pairs {sorted(members)}")
        fam_sets.append(frozenset(cols))
        fam_vals.append(float(r) - float(whole[cols].sum()))
    family = LaminarFamily(len(paths), tuple(fam_sets), tuple(fam_vals), "ge")

    edges = sorted({e for _, p in paths for e in p}, key=repr)
    index = {e: r for r, e in enumerate(edges)}
    a = np.zeros((len(edges), len(paths)))
    for c, (_, p) in enumerate(paths):
        for e in p:
            a[index[e], c] += 1.0
    cap = np.array([float(capacities.get(e, capacities.get(str(e), np.inf))) for e in edges])
    cap = np.where(np.isfinite(cap), cap, a @ z)
    b_frac = cap - a @ whole
    x, rep = round_full(frac, a, b_frac, family, cfg, seed, tol=tol)
    total = whole + x
    counts = {}
    for c, (pair, p) in enumerate(paths):
        if total[c] > 0:
            counts.setdefault(pair, []).append((list(p), int(round(total[c]))))
    loads_vec = a @ total
    met = all(float(total[list(s)].sum()) >= r - 1e-9 for s, (_, r) in zip(fam_sets, requirements))
    rows = [ConstraintRow(r.constraint_id, r.part, float(cap[r.constraint_id]), r.lam,
                          float(abs(loads_vec[r.constraint_id] - cap[r.constraint_id])),
                          r.bound_sqrt_j, r.bound_nlog, r.bound_Lb, r.bound_delta) for r in rep.rows]
    rep.rows = rows
    rep.meta["driver"] = "laminar-rsp"
    return MultiPathResult(counts, {e: float(v) for e, v in zip(edges, loads_vec)}, met, rep)
