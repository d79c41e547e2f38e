"""Tolerance-disciplined linear algebra used by the rounding walk.

Everything here works in double precision. Exactness of the combinatorial
side (tight faces, class sums) is maintained by the tolerances in
:class:`ToleranceModel` together with :func:`snap_to_feasible`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ToleranceModel:
    """Numerical tolerances.

    eps_rank  : singular-value / orthogonality cutoff
    eps_tight : relative tolerance for declaring a constraint tight
    eps_feas  : largest violation accepted (and repaired) in membership checks
    """

    eps_rank: float = 1e-10
    eps_tight: float = 1e-9
    eps_feas: float = 1e-8

    def __post_init__(self):
        if not (0 < self.eps_rank <= self.eps_tight <= self.eps_feas < 1e-3):
            raise ValueError(
                "tolerances must satisfy 0 < eps_rank <= eps_tight <= eps_feas < 1e-3, "
                f"got {self.eps_rank}, {self.eps_tight}, {self.eps_feas}"
            )


DEFAULT_TOL = ToleranceModel()


def as_rows(rows, n: int | None = None) -> np.ndarray:
    """Stack ``rows`` into a float matrix of shape (k, n).

    Raises ``ValueError`` when the rows disagree in length (or with ``n``)
    or contain non-finite entries.
    """
    if isinstance(rows, np.ndarray) and rows.ndim == 2:
        mat = np.asarray(rows, dtype=float)
    else:
        rows = [np.asarray(r, dtype=float).ravel() for r in rows]
        if not rows:
            if n is None:
                raise ValueError("cannot infer dimension from an empty row list")
            return np.zeros((0, n))
        lengths = {r.shape[0] for r in rows}
        if len(lengths) != 1:
            raise ValueError(f"dimension mismatch among rows: lengths {sorted(lengths)}")
        mat = np.vstack(rows)
    if n is not None and mat.shape[1] != n:
        raise ValueError(f"dimension mismatch: rows have length {mat.shape[1]}, expected {n}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("rows contain non-finite entries")
    return mat


def _rank_cutoff(mat: np.ndarray, tol: ToleranceModel) -> float:
    scale = float(np.max(np.abs(mat))) if mat.size else 0.0
    return tol.eps_rank * max(scale, 1.0)


def numerical_rank(rows, tol: ToleranceModel = DEFAULT_TOL, n: int | None = None) -> int:
    mat = as_rows(rows, n)
    if mat.shape[0] == 0:
        return 0
    sv = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(sv > _rank_cutoff(mat, tol)))


def orthonormal_nullspace_basis(rows, tol: ToleranceModel = DEFAULT_TOL, n: int | None = None) -> np.ndarray:
    """Orthonormal basis of ``{x : rows @ x = 0}``, returned as the rows of a (k, n) array.

    ``n`` is required when ``rows`` is empty.
    """
    mat = as_rows(rows, n)
    dim = mat.shape[1]
    if dim < 1:
        raise ValueError("dimension must be at least 1")
    if mat.shape[0] == 0:
        return np.eye(dim)
    _, sv, vt = np.linalg.svd(mat, full_matrices=True)
    rank = int(np.sum(sv > _rank_cutoff(mat, tol)))
    return vt[rank:].copy()


def _qr_orthonormalize(vectors: np.ndarray, tol: ToleranceModel) -> np.ndarray:
    # two QR sweeps ("twice is enough"); columns in, columns out
    q, r = np.linalg.qr(vectors)
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() <= tol.eps_rank * max(diag.max(), 1.0):
        raise ValueError("basis vectors are linearly dependent")
    q2, _ = np.linalg.qr(q)
    # fix signs so the result does not depend on the sweep
    signs = np.sign(np.sum(q2 * q, axis=0))
    signs[signs == 0] = 1.0
    return q2 * signs


def scale_and_orthonormalize(basis, diag, tol: ToleranceModel = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (rows) of ``{D v : v in span(basis)}`` for ``D = diag(diag)``."""
    d = np.asarray(diag, dtype=float).ravel()
    if np.any(~np.isfinite(d)) or np.any(d <= 0):
        raise ValueError("scaling must have strictly positive diagonal entries")
    mat = as_rows(basis, d.shape[0])
    if mat.shape[0] == 0:
        return mat.copy()
    scaled = (mat * d).T
    return _qr_orthonormalize(scaled, tol).T


def project_out(basis_cols: np.ndarray, row: np.ndarray, tol: ToleranceModel = DEFAULT_TOL):
    """Restrict an orthonormal column basis to the hyperplane ``row . w = 0``.

    Returns ``(new_basis, reduced)`` where ``reduced`` tells whether the
    dimension dropped. A Householder reflection in coefficient space keeps
    the result orthonormal to working precision.
    """
    k = basis_cols.shape[1]
    if k == 0:
        return basis_cols, False
    u = basis_cols.T @ row
    unorm = float(np.linalg.norm(u))
    if unorm <= tol.eps_rank * max(float(np.linalg.norm(row)), 1e-300):
        return basis_cols, False
    v = u.copy()
    v[0] += np.copysign(unorm, u[0])
    vv = float(v @ v)
    reflected = basis_cols - np.outer(basis_cols @ v, v) * (2.0 / vv)
    return np.ascontiguousarray(reflected[:, 1:]), True


@dataclass
class LinearDescription:
    """``lower <= x <= upper``, ``eq_rows x = eq_rhs``, ``ineq_rows x <= ineq_rhs``."""

    lower: np.ndarray
    upper: np.ndarray
    eq_rows: np.ndarray = field(default=None)
    eq_rhs: np.ndarray = field(default=None)
    ineq_rows: np.ndarray = field(default=None)
    ineq_rhs: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.lower.shape[0]
        if self.eq_rows is None:
            self.eq_rows, self.eq_rhs = np.zeros((0, n)), np.zeros(0)
        if self.ineq_rows is None:
            self.ineq_rows, self.ineq_rhs = np.zeros((0, n)), np.zeros(0)

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        worst = max(0.0, float(np.max(self.lower - x, initial=0.0)), float(np.max(x - self.upper, initial=0.0)))
        if self.eq_rows.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.eq_rows @ x - self.eq_rhs))))
        if self.ineq_rows.shape[0]:
            worst = max(worst, float(np.max(self.ineq_rows @ x - self.ineq_rhs, initial=0.0)))
        return worst


class InfeasiblePointError(ValueError):
    """A point violates its constraint description by more than eps_feas."""


def snap_to_feasible(x, q: LinearDescription, tol: ToleranceModel = DEFAULT_TOL, pinned=None) -> np.ndarray:
    """Repair round-off: clamp to the box and re-project active equalities.

    ``pinned`` optionally marks coordinates that must not move (already at a
    registered bound). Inequalities that are violated or within eps_tight of
    their bound are treated as equalities for the projection.
    """
    x = np.array(x, dtype=float)
    if q.violation(x) > tol.eps_feas:
        raise InfeasiblePointError(f"violation {q.violation(x):.3e} exceeds eps_feas={tol.eps_feas:g}")
    x = np.clip(x, q.lower, q.upper)
    pinned = np.zeros(x.shape[0], dtype=bool) if pinned is None else np.array(pinned, dtype=bool)
    for _ in range(4):
        at_bound = pinned | (x <= q.lower) | (x >= q.upper)
        rows, rhs = [q.eq_rows], [q.eq_rhs]
        if q.ineq_rows.shape[0]:
            lhs = q.ineq_rows @ x
            near = lhs >= q.ineq_rhs - tol.eps_tight * np.maximum(1.0, np.abs(q.ineq_rhs))
            rows.append(q.ineq_rows[near])
            rhs.append(q.ineq_rhs[near])
        a = np.vstack(rows)
        b = np.concatenate(rhs)
        if a.shape[0] == 0:
            break
        resid = a @ x - b
        if np.max(np.abs(resid)) <= tol.eps_rank * 1e-3:
            break
        free = ~at_bound
        if not free.any():
            break
        delta, *_ = np.linalg.lstsq(a[:, free], resid, rcond=None)
        x[free] -= delta
        x = np.clip(x, q.lower, q.upper)
    return x
