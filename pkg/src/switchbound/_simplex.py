"""Dense two-phase simplex for the small equality-form LPs in this package.

Solves max c.x subject to A x = b, x >= 0, with Bland's anti-cycling rule
(lowest eligible index enters; ratio ties broken by lowest basic index).
Problem sizes here are tiny (tens of variables), so a plain dense tableau
is adequate and keeps the package free of external solver dependencies.
"""
from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-9


class SimplexError(RuntimeError):
    pass


class InfeasibleError(SimplexError):
    pass


class UnboundedError(SimplexError):
    pass


def _pivot(T: np.ndarray, basis: list, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and abs(T[r, col]) > 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _bland_iterate(T: np.ndarray, basis: list, ncols: int, max_iter: int) -> None:
    """Run simplex iterations on tableau T (objective in last row, to be
    maximized; reduced costs stored negated as in the standard tableau)."""
    m = T.shape[0] - 1
    for _ in range(max_iter):
        obj = T[-1, :ncols]
        entering = -1
        for j in range(ncols):
            if obj[j] < -PIVOT_TOL:
                entering = j
                break
        if entering < 0:
            return
        leaving = -1
        best_ratio = np.inf
        for r in range(m):
            a = T[r, entering]
            if a > PIVOT_TOL:
                ratio = T[r, -1] / a
                if ratio < best_ratio - PIVOT_TOL or (
                    abs(ratio - best_ratio) <= PIVOT_TOL
                    and (leaving < 0 or basis[r] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = r
        if leaving < 0:
            raise UnboundedError("objective unbounded above")
        _pivot(T, basis, leaving, entering)
    raise SimplexError("iteration limit reached")


def solve_lp_max(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> tuple:
    """Maximize c.x subject to A x = b, x >= 0.  Returns (value, x)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel().copy()
    c = np.asarray(c, dtype=float).ravel()
    m, n = A.shape
    if b.shape[0] != m or c.shape[0] != n:
        raise ValueError("inconsistent LP dimensions")
    A = A.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: artificial variables, minimize their sum.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n, n + m))
    # Objective row for max(-sum of artificials), expressed in nonbasic terms.
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    max_iter = 200 * (m + n + 10)
    _bland_iterate(T, basis, n + m, max_iter)
    if T[-1, -1] < -1e-7:
        raise InfeasibleError(f"phase 1 residual {-T[-1, -1]:.3e}")

    # Drive leftover artificial variables out of the basis where possible.
    keep_rows = []
    for r in range(m):
        if basis[r] >= n:
            piv = -1
            for j in range(n):
                if abs(T[r, j]) > PIVOT_TOL:
                    piv = j
                    break
            if piv >= 0:
                _pivot(T, basis, r, piv)
                keep_rows.append(r)
            # else: redundant row, drop it below
        else:
            keep_rows.append(r)
    rows = keep_rows + [m]
    T2 = np.zeros((len(keep_rows) + 1, n + 1))
    T2[:-1, :n] = T[keep_rows][:, :n]
    T2[:-1, -1] = T[keep_rows][:, -1]
    basis2 = [basis[r] for r in keep_rows]

    # Phase 2 objective row: z - c.x, restored to basic form.
    T2[-1, :n] = -c
    for r, bv in enumerate(basis2):
        if abs(T2[-1, bv]) > 0.0:
            T2[-1] -= T2[-1, bv] * T2[r]
    _bland_iterate(T2, basis2, n, max_iter)

    x = np.zeros(n)
    for r, bv in enumerate(basis2):
        x[bv] = T2[r, -1]
    return float(T2[-1, -1]), x
