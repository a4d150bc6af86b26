"""Dense two-phase primal simplex with Bland's rule.

Solves min c.x subject to A x = b, x >= 0 for small row counts (here
m = n + 1 <= 4) and many columns. Bland's least-index pivoting is slow
but deterministic and cycle-free, which is what the envelope oracle
needs: identical inputs must yield the identical optimal basis.

The tableau T = B^-1 [A | b] is kept dense and refactorized from the
basis every few dozen pivots; apparent optimality is confirmed on a
fresh factorization before returning. Pivot elements must clear a
tolerance relative to their column, since dividing by a ~1e-11 entry
after a long degenerate run is how tableaus go singular.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_REFACTOR_EVERY = 40


@dataclass
class SimplexResult:
    status: str
    value: float = np.nan
    basis: np.ndarray = None
    weights: np.ndarray = None  # basic-variable values, aligned with basis
    iterations: int = 0


def _refactor(A, b, basis):
    """Fresh tableau B^-1 [A | b] from the current basis."""
    B = A[:, basis]
    rhs = np.concatenate([A, b[:, None]], axis=1)
    return np.linalg.solve(B, rhs)


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    other = T[:, col].copy()
    other[row] = 0.0
    T -= np.outer(other, T[row])
    basis[row] = col


def _bland_loop(T, basis, A_full, b_full, c, eps, max_iter):
    """Run Bland's rule to optimality on tableau T with costs c.

    Entering: smallest column index with reduced cost < -eps.
    Leaving: minimum ratio among rows whose column entry clears a
    relative pivot tolerance, ties broken on the smallest basic variable.
    Optimality is re-confirmed on a refactorized tableau.
    """
    n_cols = T.shape[1] - 1
    it = 0
    confirmed = False
    while True:
        z = c - c[basis] @ T[:, :n_cols]
        candidates = np.flatnonzero(z < -eps)
        if candidates.size == 0:
            if confirmed:
                return T, OPTIMAL, it
            T = _refactor(A_full, b_full, basis) if A_full.shape[1] == n_cols else T
            confirmed = True
            continue
        confirmed = False
        j = int(candidates[0])
        col = T[:, j]
        piv_tol = max(1e-11, 1e-9 * float(col.max(initial=0.0)))
        pos = np.flatnonzero(col > piv_tol)
        if pos.size == 0:
            return T, UNBOUNDED, it
        ratios = np.maximum(T[pos, n_cols], 0.0) / col[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + 1e-12 * (1.0 + abs(rmin))]
        row = int(ties[np.argmin(basis[ties])])
        _pivot(T, basis, row, j)
        it += 1
        if it % _REFACTOR_EVERY == 0 and A_full.shape[1] == n_cols:
            T = _refactor(A_full, b_full, basis)
        if it > max_iter:
            raise RuntimeError(f"simplex exceeded {max_iter} iterations (n={n_cols})")


def dense_simplex(A, b, c, initial_basis=None, eps=None):
    """Solve min c.x, A x = b, x >= 0.

    ``initial_basis``: optional column indices forming a feasible basis
    (skips phase 1); otherwise artificial variables bootstrap one.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    scale = max(1.0, float(np.abs(b).max()))
    if eps is None:
        eps = 1e-10 * max(1.0, float(np.abs(c).max()))
    max_iter = 200 * (n + m) + 1000

    T = None
    basis = None
    if initial_basis is not None:
        basis = np.asarray(initial_basis, dtype=int).copy()
        try:
            T = _refactor(A, b, basis)
        except np.linalg.LinAlgError:
            T = None
        if T is not None and not np.all(T[:, -1] >= -1e-9 * scale):
            T = None
        if T is not None:
            T[:, -1] = np.maximum(T[:, -1], 0.0)

    if T is None:
        # phase 1: identity artificial basis on sign-adjusted rows
        flip = np.where(b < 0, -1.0, 1.0)
        T = np.empty((m, n + m + 1))
        T[:, :n] = A * flip[:, None]
        T[:, n : n + m] = np.eye(m)
        T[:, -1] = b * flip
        basis = np.arange(n, n + m)
        c1 = np.concatenate([np.zeros(n), np.ones(m)])
        A1 = T[:, : n + m].copy()
        b1 = T[:, -1].copy()
        T, status, _ = _bland_loop(T, basis, A1, b1, c1, 1e-11, max_iter)
        if status != OPTIMAL or float(c1[basis] @ T[:, -1]) > 1e-8 * scale:
            return SimplexResult(INFEASIBLE)
        # drive leftover artificials out of the basis
        drop_rows = []
        for r in range(m):
            if basis[r] >= n:
                nz = np.flatnonzero(np.abs(T[r, :n]) > 1e-9)
                if nz.size:
                    _pivot(T, basis, r, int(nz[0]))
                else:
                    drop_rows.append(r)  # redundant constraint row
        if drop_rows:
            keep = [r for r in range(m) if r not in drop_rows]
            A = A[keep]
            b = b[keep]
            basis = basis[keep]
            m = len(keep)
        T = _refactor(A, b, basis)
        T[:, -1] = np.maximum(T[:, -1], 0.0)

    T, status, it = _bland_loop(T, basis, A, b, c, eps, max_iter)
    if status != OPTIMAL:
        return SimplexResult(status, iterations=it)
    weights = np.maximum(T[:, -1].copy(), 0.0)
    value = float(c[basis] @ weights)
    return SimplexResult(OPTIMAL, value, basis.copy(), weights, it)
