"""Two-phase revised simplex with Bland's rule.

Solves  min c.x  s.t.  A x = b,  x >= 0  for small dense problems.  Bland's
smallest-index rule makes the pivot sequence deterministic and rules out
cycling on the highly degenerate supermap programs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded"
    x: np.ndarray | None
    objective: float | None
    duals: np.ndarray | None
    certificate: np.ndarray | None  # Farkas vector y: A^T y <= 0, b.y > 0
    iterations: int


def _pivot_loop(A, b, c, basis, tol, max_iter):
    m, n = A.shape
    it = 0
    while True:
        it += 1
        if it > max_iter:
            raise SolverError(f"simplex exceeded {max_iter} iterations")
        B = A[:, basis]
        xb = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        red = c - A.T @ y
        in_basis = np.zeros(n, dtype=bool)
        in_basis[basis] = True
        enter = -1
        for j in range(n):
            if not in_basis[j] and red[j] < -tol:
                enter = j
                break
        if enter < 0:
            return "optimal", basis, xb, y, it
        d = np.linalg.solve(B, A[:, enter])
        best, leave = None, -1
        for r in range(m):
            if d[r] > tol:
                ratio = xb[r] / d[r]
                if best is None or ratio < best - tol or (abs(ratio - best) <= tol and basis[r] < basis[leave]):
                    best, leave = ratio, r
        if leave < 0:
            return "unbounded", basis, xb, y, it
        basis = list(basis)
        basis[leave] = enter


def linprog_bland(c, A_eq, b_eq, tol: float = 1e-10, max_iter: int = 20000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A_eq, dtype=float)
    b = np.asarray(b_eq, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A1 = A * sign[:, None]
    b1 = b * sign
    # phase I: artificials n..n+m-1
    Aa = np.hstack([A1, np.eye(m)])
    ca = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    status, basis, xb, y, it1 = _pivot_loop(Aa, b1, ca, basis, tol, max_iter)
    phase1 = float(ca[basis] @ xb)
    if phase1 > 1e-9:
        cert = y * sign
        cert = cert / max(1.0, float(np.abs(cert).max()))
        return LPResult("infeasible", None, None, None, cert, it1)
    # drive zero-level artificials out of the basis; drop redundant rows
    rows = list(range(m))
    basis = list(basis)
    r = 0
    while r < len(basis):
        if basis[r] >= n:
            B = Aa[np.ix_(rows, basis)]
            binv_row = np.linalg.solve(B.T, np.eye(len(rows))[r])
            cand = [j for j in range(n) if j not in basis and abs(binv_row @ A1[rows, j]) > 1e-9]
            if cand:
                basis[r] = cand[0]
                r += 1
            else:
                del rows[r]
                del basis[r]
        else:
            r += 1
    A2 = A1[rows]
    b2 = b1[rows]
    if not basis:
        x = np.zeros(n)
        return LPResult("optimal", x, 0.0, np.zeros(m), None, it1)
    status, basis, xb, y, it2 = _pivot_loop(A2, b2, c, basis, tol, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, None, None, None, it1 + it2)
    x = np.zeros(n)
    x[basis] = xb
    x[np.abs(x) < 1e-14] = 0.0
    duals = np.zeros(m)
    duals[rows] = y * sign[rows]
    return LPResult("optimal", x, float(c @ x), duals, None, it1 + it2)
