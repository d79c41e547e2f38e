"""Partial rounding by a scaled random walk inside a polytope.

The walk starts at a fractional point ``y`` and moves by random +-1
combinations of an orthonormal basis of the subspace left free by the
constraints that are currently tight. Coordinates are scaled by their
dyadic distance to the nearest integer, and the total value of every
scale class is conserved, so coordinates close to 0 or 1 move slowly but
still get absorbed at their bounds. Steps that would leave the polytope
are shortened to the boundary and the constraint that was hit is frozen
into the registry for the rest of the run.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .matroid import (
    TABLE_LIMIT,
    LaminarFamily,
    Matroid,
    minor,
    separate,
    tight_chain,
)
from .numeric import (
    DEFAULT_TOL,
    LinearDescription,
    ToleranceModel,
    orthonormal_nullspace_basis,
    project_out,
    snap_to_feasible,
)

log = logging.getLogger(__name__)

UNBOUNDED = math.inf


class WalkError(Exception):
    """Base class for walk failures."""


class PreconditionError(WalkError, ValueError):
    """Infeasible input point or violated lambda condition."""


class WalkTerminated(WalkError):
    """The free subspace is empty; no further step is possible."""


class InvariantError(WalkError, AssertionError):
    """An internal invariant of the walk was breached."""


# ---------------------------------------------------------------------------
# scale classes
# ---------------------------------------------------------------------------

def default_levels(n: int) -> int:
    return max(1, 3 * math.ceil(math.log2(max(n, 1))))


def _dyadic_level(v: float) -> int:
    # k with 2^{-k-1} < v <= 2^{-k}, for 0 < v <= 1/2
    m, e = math.frexp(v)
    return 1 - e if m == 0.5 else -e


@dataclass(frozen=True)
class ScaleClasses:
    """Dyadic classes ``U_k`` (values near 0) and ``V_k`` (values near 1).

    ``side`` is +1 for U, -1 for V and 0 for frozen (integral) coordinates;
    frozen coordinates carry level 0 and scale 0.
    """

    side: np.ndarray
    level: np.ndarray
    scale: np.ndarray
    ell: int

    @property
    def frozen(self) -> np.ndarray:
        return self.side == 0

    @property
    def n(self) -> int:
        return self.side.shape[0]

    def labels(self) -> list:
        out = []
        for sd, k in zip(self.side, self.level):
            out.append(None if sd == 0 else f"{'U' if sd > 0 else 'V'}{int(k)}")
        return out

    def class_rows(self) -> np.ndarray:
        """Indicator rows for U_1..U_ell followed by V_1..V_ell."""
        rows = np.zeros((2 * self.ell, self.n))
        for i, (sd, k) in enumerate(zip(self.side, self.level)):
            if sd > 0:
                rows[k - 1, i] = 1.0
            elif sd < 0:
                rows[self.ell + k - 1, i] = 1.0
        return rows


def classify_scales(y, ell: int | None = None) -> ScaleClasses:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("point must be a vector")
    bad = np.flatnonzero((y < 0) | (y > 1) | ~np.isfinite(y))
    if bad.size:
        raise ValueError(f"coordinate {int(bad[0])} = {y[bad[0]]!r} outside [0, 1]")
    ell = default_levels(y.shape[0]) if ell is None else int(ell)
    n = y.shape[0]
    side = np.zeros(n, dtype=np.int8)
    level = np.zeros(n, dtype=np.int64)
    scale = np.zeros(n)
    for i, v in enumerate(y):
        if v == 0.0 or v == 1.0:
            continue
        if v <= 0.5:
            side[i], dist = 1, v
        else:
            side[i], dist = -1, 1.0 - v
        k = min(_dyadic_level(dist), ell)
        level[i] = k
        scale[i] = 2.0 ** -k
    return ScaleClasses(side, level, scale, ell)


def potential(x, classes: ScaleClasses) -> float:
    """Sum over classes of 4^k times squared distance to the class's anchor (0 or 1)."""
    x = np.asarray(x, dtype=float)
    live = ~classes.frozen
    dist = np.where(classes.side > 0, x, 1.0 - x)[live]
    weight = 4.0 ** classes.level[live]
    return float(np.sum(weight * dist ** 2))


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WalkConfig:
    """Walk parameters.

    ``stop_fraction`` ends a run early once that fraction of the walked
    coordinates sits on a variable bound. ``lambda_scope`` chooses whether
    the lambda budget uses the active fractional count or the full length.
    """

    alpha: float = 4.0
    gamma: float = 0.04
    steps: int = 100_000
    k0: float = 10.0
    slack_exp: float = 3.0
    restarts: int = 5
    stop_fraction: float = 0.5
    preset: str = "practical"
    lambda_scope: str = "active"
    audit_every: int = 100
    debug: bool = False

    def __post_init__(self):
        if self.alpha < 2:
            raise ValueError("alpha must be >= 2")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.steps < 1 or self.restarts < 1:
            raise ValueError("steps and restarts must be >= 1")
        if not self.k0 > 0:
            raise ValueError("k0 must be positive")
        if not 0 < self.stop_fraction <= 1:
            raise ValueError("stop_fraction must lie in (0, 1]")
        if self.lambda_scope not in ("active", "global"):
            raise ValueError("lambda_scope must be 'active' or 'global'")

    @classmethod
    def practical(cls, **overrides) -> "WalkConfig":
        alpha = overrides.pop("alpha", 4.0)
        gamma = overrides.pop("gamma", 0.04)
        steps = overrides.pop("steps", int(round(10 * alpha ** 2 / gamma ** 2)))
        return cls(alpha=alpha, gamma=gamma, steps=steps, preset="practical", **overrides)

    @classmethod
    def paper(cls, n: int, **overrides) -> "WalkConfig":
        """Constants from the analysis; only meaningful as a sanity run on tiny n."""
        alpha = overrides.pop("alpha", 40.0)
        gamma = overrides.pop("gamma", float(n) ** -6)
        steps = overrides.pop("steps", int(10 * alpha ** 2 / gamma ** 2))
        return cls(alpha=alpha, gamma=gamma, steps=steps, preset="paper", **overrides)

    @classmethod
    def from_preset(cls, preset: str, n: int = 64, **overrides) -> "WalkConfig":
        if preset == "paper":
            return cls.paper(n, **overrides)
        if preset == "practical":
            return cls.practical(**overrides)
        raise ValueError(f"unknown preset {preset!r}")


def check_lambda_condition(lambdas, f: float, k0: float, budget: float = 1 / 16) -> bool:
    """True iff ``sum exp(-min(lambda, f)^2 / k0) < budget * f``; unbounded entries add 0."""
    lam = np.asarray(list(lambdas), dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda values must be nonnegative")
    finite = lam[np.isfinite(lam)]
    total = float(np.sum(np.exp(-np.minimum(finite, f) ** 2 / k0)))
    return total < budget * f


# ---------------------------------------------------------------------------
# the polytope Q
# ---------------------------------------------------------------------------

@dataclass
class SideConstraint:
    """Linear constraint tracked with slack multiplier ``lam`` (``UNBOUNDED`` = measured only)."""

    coeffs: np.ndarray
    lam: float = 0.0
    target: float | None = None

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).ravel()
        if self.lam < 0 or math.isnan(self.lam):
            raise ValueError("lambda must be nonnegative")


@dataclass
class Polytope:
    y: np.ndarray
    classes: ScaleClasses
    lower: np.ndarray
    upper: np.ndarray
    side_rows: np.ndarray
    side_center: np.ndarray
    side_width: np.ndarray
    side_lambda: np.ndarray
    w_scale: np.ndarray
    w_point: np.ndarray
    class_rows: np.ndarray
    class_rhs: np.ndarray
    struct_rows: np.ndarray
    struct_rhs: np.ndarray
    eq_rows: np.ndarray
    eq_rhs: np.ndarray
    structure: object = None
    base: bool = False
    tol: ToleranceModel = DEFAULT_TOL

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def constraint_count(self) -> int:
        return (self.struct_rows.shape[0] + self.eq_rows.shape[0] + self.side_rows.shape[0]
                + self.class_rows.shape[0] + 2 * self.n)

    def linear(self) -> LinearDescription:
        bounded = np.isfinite(self.side_width)
        a = self.side_rows[bounded]
        c = self.side_center[bounded]
        w = self.side_width[bounded]
        ineq = np.vstack([self.struct_rows, a, -a])
        rhs = np.concatenate([self.struct_rhs, c + w, w - c])
        return LinearDescription(
            self.lower.copy(), self.upper.copy(),
            np.vstack([self.class_rows, self.eq_rows]), np.concatenate([self.class_rhs, self.eq_rhs]),
            ineq, rhs,
        )

    def violation(self, x) -> float:
        if getattr(self, "_linear", None) is None:
            self._linear = self.linear()
        return self._linear.violation(x)

    def structure_ok(self, x) -> bool:
        """Independent audit of the structure constraint (separation oracle / laminar check)."""
        tol = self.tol
        if isinstance(self.structure, Matroid):
            if separate(self.structure, np.maximum(x, 0.0), tol) is not None:
                return False
            if self.base:
                return abs(float(np.sum(x)) - self.structure.full_rank) <= tol.eps_feas * max(1, self.n)
            return True
        if isinstance(self.structure, LaminarFamily):
            return self.structure.violation(x) <= tol.eps_feas * max(1, self.n)
        return True

    def contains(self, x) -> bool:
        return self.violation(x) <= self.tol.eps_feas and self.structure_ok(x)


def _side_list(side, n: int) -> list[SideConstraint]:
    if side is None:
        return []
    out = []
    for sc in side:
        if not isinstance(sc, SideConstraint):
            raise TypeError("side constraints must be SideConstraint instances")
        if sc.coeffs.shape[0] != n:
            raise ValueError(f"side constraint has length {sc.coeffs.shape[0]}, expected {n}")
        out.append(sc)
    return out


def _structure_rows(structure, n: int, base: bool):
    empty = (np.zeros((0, n)), np.zeros(0))
    if structure is None:
        return empty, empty
    if structure.n != n:
        raise ValueError(f"structure has ground size {structure.n}, point has {n}")
    if isinstance(structure, Matroid):
        ineq = structure.polytope_rows()
        eq = (np.ones((1, n)), np.array([float(structure.full_rank)])) if base else empty
        return ineq, eq
    if isinstance(structure, LaminarFamily):
        rows, vals = structure.rows(), np.array(structure.values)
        if structure.sense == "le":
            return (rows, vals), empty
        if structure.sense == "ge":
            return (-rows, -vals), empty
        return empty, (rows, vals)
    raise TypeError(f"unsupported structure {type(structure).__name__}")


def build_polytope(y, side=None, structure=None, cfg: WalkConfig | None = None,
                   tol: ToleranceModel = DEFAULT_TOL, base: bool = False) -> Polytope:
    cfg = cfg or WalkConfig()
    y = np.asarray(y, dtype=float)
    classes = classify_scales(y)
    n = y.shape[0]
    side = _side_list(side, n)

    cap = np.minimum(cfg.alpha * classes.scale, 1.0)
    lower = np.where(classes.side > 0, 0.0, np.maximum(1.0 - cap, 0.0))
    upper = np.where(classes.side > 0, cap, 1.0)
    lower[classes.frozen] = y[classes.frozen]
    upper[classes.frozen] = y[classes.frozen]

    m = len(side)
    rows = np.vstack([sc.coeffs for sc in side]) if m else np.zeros((0, n))
    lam = np.array([min(sc.lam, n) for sc in side], dtype=float)
    w_s = (rows ** 2) @ (classes.scale ** 2) if m else np.zeros(0)
    w_y = (rows ** 2) @ (np.minimum(y, 1 - y) ** 2) if m else np.zeros(0)
    norms = np.linalg.norm(rows, axis=1) if m else np.zeros(0)
    slack = norms / float(n) ** cfg.slack_exp
    if m:
        lhs = np.sqrt(w_s)
        rhs = 2 * np.sqrt(w_y) + norms / float(n) ** 3
        if np.any(lhs > rhs * (1 + 1e-12) + 1e-15):
            raise InvariantError("scale weights exceed twice the point weights")
    with np.errstate(invalid="ignore"):
        width = np.where(np.isfinite(lam), lam * np.sqrt(w_s) + slack, np.inf)

    (srows, srhs), (erows, erhs) = _structure_rows(structure, n, base)
    class_rows = classes.class_rows()

    q = Polytope(
        y=y.copy(), classes=classes, lower=lower, upper=upper,
        side_rows=rows, side_center=rows @ y, side_width=width, side_lambda=lam,
        w_scale=w_s, w_point=w_y,
        class_rows=class_rows, class_rhs=class_rows @ y,
        struct_rows=srows, struct_rhs=srhs, eq_rows=erows, eq_rhs=erhs,
        structure=structure, base=base, tol=tol,
    )
    viol = q.violation(y)
    if viol > tol.eps_feas or not q.structure_ok(y):
        raise PreconditionError(f"initial point is infeasible for the structure (violation {viol:.3e})")
    return q


# ---------------------------------------------------------------------------
# the walk
# ---------------------------------------------------------------------------

@dataclass
class Audit:
    step: int
    violation: float
    structure_ok: bool
    chain_length: int | None = None
    strictly_fractional: bool = False


@dataclass
class WalkReport:
    success: bool
    n: int
    n_frac: int
    newly_integral: int
    c_var: int
    c_side: int
    c_rank: int
    steps: int
    truncations: int
    dim_final: int
    restarts_used: int
    seed: int | None
    potential_start: float
    potential_end: float
    max_class_drift: float
    max_side_excess: float
    audits: list = field(default_factory=list)
    attempts: list = field(default_factory=list)


class RoundingWalk:
    """Mutable walk state over a fixed polytope ``q``."""

    def __init__(self, q: Polytope, cfg: WalkConfig, rng: np.random.Generator,
                 tol: ToleranceModel = DEFAULT_TOL, audit_structure: bool | None = None):
        self.q, self.cfg, self.rng, self.tol = q, cfg, rng, tol
        n = q.n
        self.X = q.y.copy()
        self.scale = np.where(q.classes.frozen, 1.0, q.classes.scale)
        self.t = 0
        self.truncations = 0
        self.var_state = np.zeros(n, dtype=np.int8)
        self.var_state[q.classes.frozen] = 2
        self.side_state = np.zeros(q.side_rows.shape[0], dtype=np.int8)
        self.struct_state = np.zeros(q.struct_rows.shape[0], dtype=bool)
        self.rank_registered = 0
        self.audits: list[Audit] = []
        self._signs = np.zeros(0)
        self._sign_pos = 0
        if audit_structure is None:
            audit_structure = q.structure is not None and q.n <= TABLE_LIMIT
        self.audit_structure = audit_structure
        self._finite_side = np.isfinite(q.side_width)
        self._side_norm = np.linalg.norm(q.side_rows, axis=1)
        self._struct_norm = np.linalg.norm(q.struct_rows, axis=1)

        self._reg_rows: list[np.ndarray] = []
        self._reg_rhs: list[float] = []
        self._fixed_rows = np.vstack([q.class_rows, q.eq_rows])
        self._fixed_rhs = np.concatenate([q.class_rhs, q.eq_rhs])
        self._seed_registry()
        self._refresh_values()
        self._rebuild_basis()
        self._updates_since_rebuild = 0

    # -- registry ----------------------------------------------------------

    def _seed_registry(self):
        q, tol, x = self.q, self.tol, self.X
        lo_hit = (self.var_state == 0) & (x <= q.lower + tol.eps_tight)
        hi_hit = (self.var_state == 0) & (x >= q.upper - tol.eps_tight)
        self.var_state[lo_hit] = -1
        self.var_state[hi_hit] = 1
        self._c_var = int(np.count_nonzero(lo_hit | hi_hit))
        if q.struct_rows.shape[0]:
            vals = q.struct_rows @ x
            tight = vals >= q.struct_rhs - tol.eps_tight * np.maximum(1.0, np.abs(q.struct_rhs))
            for r in np.flatnonzero(tight):
                self._register_struct(int(r), rebuild=False)

    def _register_struct(self, r: int, rebuild: bool = True):
        self.struct_state[r] = True
        self._reg_rows.append(self.q.struct_rows[r])
        self._reg_rhs.append(float(self.q.struct_rhs[r]))
        if rebuild:
            self._project_out(self.q.struct_rows[r], counts_rank=True)

    def _register_side(self, j: int, sign: int):
        q = self.q
        self.side_state[j] = sign
        self._reg_rows.append(q.side_rows[j])
        self._reg_rhs.append(float(q.side_center[j] + sign * q.side_width[j]))
        self._project_out(q.side_rows[j])

    def _register_var(self, i: int, sign: int):
        self.var_state[i] = sign
        self._c_var += 1
        self.X[i] = self.q.upper[i] if sign > 0 else self.q.lower[i]
        e = np.zeros(self.q.n)
        e[i] = 1.0
        self._project_out(e)

    def _project_out(self, row: np.ndarray, counts_rank: bool = False):
        self.basis, reduced = project_out(self.basis, row * self.scale, self.tol)
        if reduced and counts_rank:
            self.rank_registered += 1
        self._updates_since_rebuild += 1

    def registered_rows(self) -> np.ndarray:
        """Normals of every registered tight constraint (x-space)."""
        n = self.q.n
        pinned = np.flatnonzero(self.var_state != 0)
        var_rows = np.zeros((pinned.size, n))
        var_rows[np.arange(pinned.size), pinned] = 1.0
        extra = np.vstack(self._reg_rows) if self._reg_rows else np.zeros((0, n))
        return np.vstack([self._fixed_rows, var_rows, extra])

    def _rebuild_basis(self):
        rows = self.registered_rows() * self.scale
        rows = rows[np.any(rows != 0, axis=1)]
        self.basis = orthonormal_nullspace_basis(rows, self.tol, n=self.q.n).T.copy()
        if not self._reg_rows and self.q.struct_rows.shape[0] == 0:
            self.rank_registered = 0
        self._updates_since_rebuild = 0

    def _refresh_values(self):
        q = self.q
        self.side_val = q.side_rows @ self.X - q.side_center
        self.struct_val = q.struct_rows @ self.X

    # -- geometry ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def direction(self) -> np.ndarray:
        """Random direction in the free subspace (before the step size)."""
        k = self.dim
        if k == 0:
            raise WalkTerminated("free subspace is empty")
        if self._sign_pos + k > self._signs.shape[0]:
            fresh = self.rng.integers(0, 2, size=max(4096, k)) * 2.0 - 1.0
            self._signs = np.concatenate([self._signs[self._sign_pos:], fresh])
            self._sign_pos = 0
        g = self._signs[self._sign_pos:self._sign_pos + k]
        self._sign_pos += k
        return self.scale * (self.basis @ g)

    def _ratios(self, d: np.ndarray, side_val, struct_val, x):
        """Largest feasible step fraction along ``d`` and the constraints that limit it."""
        q = self.q
        dn = float(np.linalg.norm(d))
        best = np.inf
        hits: list[tuple] = []

        def consider(kind, idx, ratio, sign=None):
            nonlocal best, hits
            if ratio.size == 0:
                return
            j = int(np.argmin(ratio))
            r = float(ratio[j])
            if r < best * (1 - 1e-12) - 1e-300:
                best = r
                hits = []
            cutoff = best * (1 + 1e-12) + 1e-300
            for jj in np.flatnonzero(ratio <= cutoff):
                hits.append((kind, int(idx[jj]), None if sign is None else int(sign[jj])))

        free = np.flatnonzero(self.var_state == 0)
        if free.size:
            df = d[free]
            thr = 1e-13 * dn
            up = df > thr
            dn_ = df < -thr
            ratio_up = (q.upper[free][up] - x[free][up]) / df[up]
            ratio_dn = (q.lower[free][dn_] - x[free][dn_]) / df[dn_]
            consider("var", free[up], ratio_up, np.ones(up.sum(), dtype=int))
            consider("var", free[dn_], ratio_dn, -np.ones(dn_.sum(), dtype=int))

        side_free = np.flatnonzero((self.side_state == 0) & self._finite_side)
        if side_free.size:
            ad = q.side_rows[side_free] @ d
            thr = 1e-12 * self._side_norm[side_free] * dn
            v = side_val[side_free]
            w = q.side_width[side_free]
            up = ad > thr
            dn_ = ad < -thr
            consider("side", side_free[up], (w[up] - v[up]) / ad[up], np.ones(up.sum(), dtype=int))
            consider("side", side_free[dn_], (-w[dn_] - v[dn_]) / ad[dn_], -np.ones(dn_.sum(), dtype=int))

        struct_free = np.flatnonzero(~self.struct_state)
        if struct_free.size:
            rd = q.struct_rows[struct_free] @ d
            thr = 1e-12 * self._struct_norm[struct_free] * dn
            up = rd > thr
            consider("rank", struct_free[up], (q.struct_rhs[struct_free][up] - struct_val[struct_free][up]) / rd[up])
        return max(best, 0.0), hits

    def max_step(self, x, d):
        """Step fraction and limiting constraints for an arbitrary feasible point ``x``."""
        q = self.q
        return self._ratios(d, q.side_rows @ x - q.side_center, q.struct_rows @ x, x)

    def _apply_hits(self, hits):
        for kind, idx, sign in hits:
            if kind == "var":
                if self.var_state[idx] == 0:
                    self._register_var(idx, sign)
            elif kind == "side":
                if self.side_state[idx] == 0:
                    self._register_side(idx, sign)
            elif not self.struct_state[idx]:
                self._register_struct(idx)

    def truncate(self, x, y):
        """Move from ``x`` toward ``y`` as far as Q allows; register what becomes tight."""
        x = np.asarray(x, dtype=float)
        d = np.asarray(y, dtype=float) - x
        mu, hits = self.max_step(x, d)
        if self.q.violation(x) > self.tol.eps_feas:
            raise InvariantError("truncation started from an infeasible point")
        if mu >= 1.0:
            return x + d, []
        self.X = x + mu * d
        self._apply_hits(hits)
        # no snapping: an arbitrary segment need not respect the registered equalities
        self._after_registration(snap=False)
        return self.X.copy(), hits

    def _after_registration(self, snap: bool = True):
        if self._updates_since_rebuild >= 32:
            self._rebuild_basis()
        if snap:
            self._snap()
        self._refresh_values()

    def _snap(self):
        q = self.q
        pinned = self.var_state != 0
        rows = np.vstack([self._fixed_rows] + ([np.vstack(self._reg_rows)] if self._reg_rows else []))
        rhs = np.concatenate([self._fixed_rhs, np.asarray(self._reg_rhs)])
        if rows.shape[0] == 0:
            return
        resid = rows @ self.X - rhs
        if np.max(np.abs(resid), initial=0.0) <= 1e-13:
            return
        free = ~pinned
        if not free.any():
            return
        delta, *_ = np.linalg.lstsq(rows[:, free], resid, rcond=None)
        self.X[free] -= delta
        self.X = np.clip(self.X, q.lower, q.upper)

    # -- stepping ----------------------------------------------------------

    def _full_step_ok(self, y, ad, rd) -> bool:
        """True when ``y`` violates no unregistered constraint (the common case)."""
        q = self.q
        free = self.var_state == 0
        if np.any(free & ((y > q.upper) | (y < q.lower))):
            return False
        if ad is not None:
            nv = self.side_val + ad
            if np.any((self.side_state == 0) & (np.abs(nv) > q.side_width)):
                return False
        if rd is not None:
            if np.any(~self.struct_state & (self.struct_val + rd > q.struct_rhs)):
                return False
        return True

    def step(self) -> bool:
        """One walk step; returns True when the step was truncated."""
        q = self.q
        d = self.cfg.gamma * self.direction()
        self.t += 1
        y = self.X + d
        ad = q.side_rows @ d if q.side_rows.shape[0] else None
        rd = q.struct_rows @ d if q.struct_rows.shape[0] else None
        mu, hits = (1.0, ()) if self._full_step_ok(y, ad, rd) else self._ratios(d, self.side_val, self.struct_val, self.X)
        if mu >= 1.0:
            self.X = y
            if ad is not None:
                self.side_val += ad
            if rd is not None:
                self.struct_val += rd
            truncated = False
        else:
            self.X += mu * d
            self._apply_hits(hits)
            self.truncations += 1
            self._after_registration()
            truncated = True
            if self.truncations > self.n_frac:
                raise InvariantError(f"{self.truncations} truncations exceed n_frac={self.n_frac}")
        if self.cfg.debug or truncated or self.t % self.cfg.audit_every == 0:
            self.audit(chain=truncated)
        return truncated

    @property
    def n_frac(self) -> int:
        return int(np.count_nonzero(~self.q.classes.frozen))

    @property
    def c_var(self) -> int:
        return self._c_var

    @property
    def c_side(self) -> int:
        return int(np.count_nonzero(self.side_state))

    def integral_count(self) -> int:
        live = ~self.q.classes.frozen
        return int(np.count_nonzero(live & ((self.X == 0.0) | (self.X == 1.0))))

    def audit(self, chain: bool = False) -> Audit:
        viol = self.q.violation(self.X)
        ok = viol <= self.tol.eps_feas
        s_ok = True
        chain_len = None
        strict = bool(np.all((self.X > 0) & (self.X < 1)))
        if self.audit_structure:
            s_ok = self.q.structure_ok(self.X)
            if chain and strict and isinstance(self.q.structure, Matroid) and s_ok:
                chain_len = len(tight_chain(self.q.structure, np.clip(self.X, 0, 1), self.tol))
        a = Audit(self.t, viol, s_ok, chain_len, strict)
        self.audits.append(a)
        if not (ok and s_ok):
            raise InvariantError(f"walk left Q at step {self.t}: violation {viol:.3e}, structure ok={s_ok}")
        return a

    def run(self) -> None:
        target = self.cfg.stop_fraction * self.n_frac
        while self.t < self.cfg.steps and self.dim > 0 and self.c_var < target:
            self.step()
        self.finish()

    def finish(self):
        self._rebuild_basis()
        self._snap()
        # exact integers for coordinates resting on integral bounds
        q = self.q
        self.X = np.clip(self.X, q.lower, q.upper)
        self._refresh_values()
        self.audit(chain=True)


def random_direction(walk: RoundingWalk) -> np.ndarray:
    return walk.direction()


def truncate(walk: RoundingWalk, x, y):
    return walk.truncate(x, y)


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

def restart_streams(seed: int | None, restarts: int) -> list[np.random.Generator]:
    """Restart ``r`` draws from child ``r`` of ``SeedSequence(seed)`` through Philox."""
    children = np.random.SeedSequence(seed).spawn(restarts)
    return [np.random.Generator(np.random.Philox(c)) for c in children]


def fractional_mask(y, tol: ToleranceModel = DEFAULT_TOL) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return (y > tol.eps_feas) & (y < 1 - tol.eps_feas)


def success_threshold(n_frac: int) -> int:
    return max(1, math.ceil(n_frac / 40))


def restrict_problem(y, side, structure, base, tol: ToleranceModel = DEFAULT_TOL):
    """Drop integral coordinates: returns (active index, y_active, side_active, structure_active)."""
    y = np.asarray(y, dtype=float)
    frac = fractional_mask(y, tol)
    active = np.flatnonzero(frac)
    ones = np.flatnonzero(~frac & (y > 0.5))
    zeros = np.flatnonzero(~frac & (y <= 0.5))
    side_r = [SideConstraint(sc.coeffs[active], sc.lam, sc.target) for sc in (side or [])]
    struct_r = None
    if isinstance(structure, Matroid):
        struct_r, labels = minor(structure, ones, zeros)
        assert list(labels) == list(active)
    elif isinstance(structure, LaminarFamily):
        fixed = np.where(y > 0.5, 1.0, 0.0)
        struct_r = structure.restrict(active, fixed)
    elif structure is not None:
        raise TypeError(f"unsupported structure {type(structure).__name__}")
    return active, y[active], side_r, struct_r


def partial_round(y, side=None, structure=None, cfg: WalkConfig | None = None, seed: int | None = 0,
                  tol: ToleranceModel = DEFAULT_TOL, base: bool = False, check_lambda: bool = True):
    """One partial-rounding invocation with restarts.

    Returns ``(y_new, report)``; ``report.success`` is False when no restart
    reached the integrality target, in which case ``y_new`` is the attempt
    with the most newly integral coordinates.
    """
    cfg = cfg or WalkConfig()
    y = np.asarray(y, dtype=float)
    if np.any((y < -tol.eps_feas) | (y > 1 + tol.eps_feas)):
        raise PreconditionError("point outside [0,1]^n")
    y = np.clip(y, 0.0, 1.0)
    side = _side_list(side, y.shape[0])
    active, y_act, side_act, struct_act = restrict_problem(y, side, structure, base, tol)
    y_act = np.clip(y_act, 0.0, 1.0)
    n_frac = active.size

    if n_frac == 0:
        rep = WalkReport(True, y.shape[0], 0, 0, 0, 0, 0, 0, 0, 0, 0, seed, 0.0, 0.0, 0.0, 0.0)
        return np.round(y), rep

    live_lams = [sc.lam for sc in side_act if np.any(sc.coeffs != 0)]
    f = n_frac if cfg.lambda_scope == "active" else y.shape[0]
    if check_lambda and not check_lambda_condition(live_lams, f, cfg.k0):
        raise PreconditionError(f"lambda condition fails for f={f}")

    q = build_polytope(y_act, side_act, struct_act, cfg, tol, base=base)
    need = success_threshold(n_frac)
    best = None
    attempts = []
    for r, rng in enumerate(restart_streams(seed, cfg.restarts)):
        walk = RoundingWalk(q, cfg, rng, tol)
        walk.run()
        got = walk.integral_count()
        attempts.append({"restart": r, "newly_integral": got, "steps": walk.t,
                         "truncations": walk.truncations})
        if best is None or got > best[1]:
            best = (walk, got, r)
        if got >= need:
            break
        log.info("restart %d reached %d/%d integral coordinates", r, got, need)
    walk, got, r = best
    out = y.copy()
    out[active] = walk.X
    drift = float(np.max(np.abs(q.class_rows @ walk.X - q.class_rhs), initial=0.0))
    bounded = np.isfinite(q.side_width)
    excess = 0.0
    if bounded.any():
        dev = np.abs(q.side_rows[bounded] @ walk.X - q.side_center[bounded])
        excess = float(np.max(dev - q.side_width[bounded]))
    rep = WalkReport(
        success=got >= need, n=y.shape[0], n_frac=n_frac, newly_integral=got,
        c_var=walk.c_var, c_side=walk.c_side, c_rank=walk.rank_registered,
        steps=walk.t, truncations=walk.truncations, dim_final=walk.dim,
        restarts_used=len(attempts), seed=seed,
        potential_start=potential(y_act, q.classes), potential_end=potential(walk.X, q.classes),
        max_class_drift=drift, max_side_excess=excess,
        audits=walk.audits, attempts=attempts,
    )
    return out, rep


def one_shot(y, side, structure, cfg, seed, tol=DEFAULT_TOL, base=False) -> RoundingWalk:
    """Single walk (no restarts) on the full vector; exposes the final state for inspection."""
    q = build_polytope(np.asarray(y, dtype=float), side, structure, cfg, tol, base=base)
    walk = RoundingWalk(q, cfg, restart_streams(seed, 1)[0], tol)
    walk.run()
    return walk
