"""Two-phase tableau simplex with Bland's rule.

Slow and simple on purpose: it serves as an independent oracle for
:func:`l1codec.lp.solve_lp` on small problems.
"""
import numpy as np

from .lp import LpStatus


def _pivot(T, row, col):
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]


def _run(T, basis, n_cols, eps, max_iter):
    """Minimize the objective held in the last row of T over columns < n_cols."""
    for _ in range(max_iter):
        reduced = T[-1, :n_cols]
        candidates = np.nonzero(reduced < -eps)[0]
        if candidates.size == 0:
            return LpStatus.OPTIMAL
        col = candidates[0]
        column = T[:-1, col]
        pos = column > eps
        if not np.any(pos):
            return LpStatus.UNBOUNDED
        ratios = np.full(column.shape, np.inf)
        ratios[pos] = T[:-1, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + eps * max(1.0, abs(best)))[0]
        row = min(ties, key=lambda r: basis[r])
        _pivot(T, row, col)
        basis[row] = col
    return LpStatus.ITER_LIMIT


def simplex_standard(c, A, b, eps=1e-10, max_iter=50000):
    """Solve min c@u s.t. A@u == b, u >= 0. Returns (status, u, objective)."""
    c = np.asarray(c, dtype=float)
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    # Phase 1: artificial columns n..n+m-1.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status = _run(T, basis, n + m, eps, max_iter)
    if status is LpStatus.ITER_LIMIT:
        return status, None, np.nan
    if -T[-1, -1] > 1e-7 * max(1.0, np.abs(b).max(initial=0.0)):
        return LpStatus.INFEASIBLE, None, np.nan
    # Drive remaining artificials out of the basis where possible.
    for r in range(m):
        if basis[r] >= n:
            nz = np.nonzero(np.abs(T[r, :n]) > eps)[0]
            if nz.size:
                _pivot(T, r, nz[0])
                basis[r] = nz[0]
    keep = [r for r in range(m) if basis[r] < n]
    T = np.vstack([T[keep], np.zeros((1, T.shape[1]))])
    basis = [basis[r] for r in keep]
    T = np.delete(T, np.s_[n:n + m], axis=1)

    # Phase 2
    T[-1, :n] = c
    T[-1, -1] = 0.0
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    status = _run(T, basis, n, eps, max_iter)
    if status is not LpStatus.OPTIMAL:
        return status, None, np.nan
    u = np.zeros(n)
    for r, j in enumerate(basis):
        u[j] = T[r, -1]
    return status, u, float(c @ u)


def simplex_solve(lp, eps=1e-10):
    """Solve a :class:`~l1codec.lp.LinearProgram` (free x) via standard form.

    Variables are split as ``x = xp - xm`` and each inequality gets a slack.
    Returns (status, x, objective).
    """
    n = lp.n_vars
    k, p = lp.G.shape[0], lp.E.shape[0]
    A = np.zeros((k + p, 2 * n + k))
    A[:k, :n] = lp.G
    A[:k, n:2 * n] = -lp.G
    A[:k, 2 * n:] = np.eye(k)
    A[k:, :n] = lp.E
    A[k:, n:2 * n] = -lp.E
    b = np.concatenate([lp.h, lp.b])
    c = np.concatenate([lp.c, -lp.c, np.zeros(k)])
    status, u, obj = simplex_standard(c, A, b, eps=eps)
    if u is None:
        return status, None, obj
    return status, u[:n] - u[n:2 * n], obj
