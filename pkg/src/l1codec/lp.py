"""Dense primal-dual interior-point solver for linear programs.

Problems are taken in the form::

    minimize    c @ x
    subject to  G @ x <= h
                E @ x == b

with ``x`` free. The method is Mehrotra's predictor-corrector applied to the
slack formulation ``G x + s = h, s >= 0`` with inequality multipliers
``z >= 0`` and equality multipliers ``y``. Newton systems are reduced to the
normal-equations form ``[[G' D G, E'], [E, 0]]`` with ``D = z / s``; callers
with structured ``G`` can pass their own factorization through ``kkt``.
"""
import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionError


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITER_LIMIT = "IterLimit"


@dataclass(frozen=True)
class ToleranceSettings:
    feasibility: float = 1e-8
    gap: float = 1e-8
    max_iter: int = 200


DEFAULT_TOL = ToleranceSettings()


def _block(mat, vec, n, name):
    if mat is None:
        if vec is not None and np.size(vec):
            raise DimensionError(f"{name}: right-hand side given without a matrix")
        return np.zeros((0, n)), np.zeros(0)
    mat = np.atleast_2d(np.asarray(mat, dtype=np.float64))
    vec = np.asarray(vec, dtype=np.float64).reshape(-1)
    if mat.shape[1] != n or mat.shape[0] != vec.size:
        raise DimensionError(
            f"{name}: matrix {mat.shape} inconsistent with {n} variables / rhs {vec.size}")
    return mat, vec


@dataclass
class LinearProgram:
    """min c@x s.t. G@x <= h, E@x == b; either block may be omitted."""

    c: np.ndarray
    G: np.ndarray = None
    h: np.ndarray = None
    E: np.ndarray = None
    b: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64).reshape(-1)
        n = self.c.size
        if n == 0:
            raise DimensionError("LP has no variables")
        self.G, self.h = _block(self.G, self.h, n, "inequality block")
        self.E, self.b = _block(self.E, self.b, n, "equality block")
        if self.G.shape[0] == 0 and self.E.shape[0] == 0:
            raise DimensionError("LP has no constraints")
        for arr in (self.c, self.G, self.h, self.E, self.b):
            if not np.all(np.isfinite(arr)):
                raise DimensionError("LP data must be finite")

    @property
    def n_vars(self):
        return self.c.size


@dataclass
class LpSolution:
    x: np.ndarray
    objective_value: float
    duality_gap: float
    status: LpStatus
    iterations: int
    primal_residual: float
    dual_residual: float
    s: np.ndarray = field(repr=False, default=None)
    z: np.ndarray = field(repr=False, default=None)
    y: np.ndarray = field(repr=False, default=None)


def dense_kkt(lp):
    """Default factorization of ``[[G' D G, E'], [E, 0]]``.

    Returns ``factor(d) -> solve(r1, r2) -> (dx, dy)``. A diagonal ``G``
    (e.g. plain nonnegativity bounds) keeps the (1,1) block diagonal.
    """
    G, E = lp.G, lp.E
    n, p = lp.n_vars, E.shape[0]
    g_diag = None
    if G.shape[0] == n and np.count_nonzero(G - np.diag(np.diag(G))) == 0:
        g_diag = np.diag(G).copy()

    def factor(d):
        if g_diag is not None:
            hd = d * g_diag**2
            if np.all(hd > 0):
                return _diag_solver(hd, E)
            H = np.diag(hd)
        else:
            H = G.T @ (d[:, None] * G)
        try:
            cho = scipy.linalg.cho_factor(H)
            if p == 0:
                return lambda r1, r2: (scipy.linalg.cho_solve(cho, r1), np.zeros(0))
            HinvEt = scipy.linalg.cho_solve(cho, E.T)
            cho_s = scipy.linalg.cho_factor(E @ HinvEt)
        except (np.linalg.LinAlgError, ValueError):
            return _full_solver(H, E)

        def solve(r1, r2):
            hr = scipy.linalg.cho_solve(cho, r1)
            dy = scipy.linalg.cho_solve(cho_s, E @ hr - r2)
            return hr - HinvEt @ dy, dy

        return solve

    return factor


def _diag_solver(hd, E):
    if E.shape[0] == 0:
        return lambda r1, r2: (r1 / hd, np.zeros(0))
    EH = E / hd
    cho_s = scipy.linalg.cho_factor(EH @ E.T)

    def solve(r1, r2):
        dy = scipy.linalg.cho_solve(cho_s, EH @ r1 - r2)
        return (r1 - E.T @ dy) / hd, dy

    return solve


def _full_solver(H, E):
    n, p = H.shape[0], E.shape[0]
    scale = max(1.0, np.abs(H).max())
    K = np.zeros((n + p, n + p))
    K[:n, :n] = H + 1e-13 * scale * np.eye(n)
    K[:n, n:] = E.T
    K[n:, :n] = E
    K[n:, n:] = -1e-13 * np.eye(p)
    lu = scipy.linalg.lu_factor(K, check_finite=False)

    def solve(r1, r2):
        sol = scipy.linalg.lu_solve(lu, np.concatenate([r1, r2]))
        return sol[:n], sol[n:]

    return solve


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _equality_only(lp, tol):
    E, b, c = lp.E, lp.b, lp.c
    x, *_ = np.linalg.lstsq(E, b, rcond=None)
    y, *_ = np.linalg.lstsq(E.T, -c, rcond=None)
    pres = np.linalg.norm(E @ x - b, np.inf) / (1 + np.linalg.norm(b, np.inf))
    dres = np.linalg.norm(c + E.T @ y, np.inf) / (1 + np.linalg.norm(c, np.inf))
    if pres > tol.feasibility:
        status = LpStatus.INFEASIBLE
    elif dres > tol.feasibility:
        status = LpStatus.UNBOUNDED
    else:
        status = LpStatus.OPTIMAL
    return LpSolution(x, float(c @ x), 0.0, status, 0, float(pres), float(dres),
                      s=np.zeros(0), z=np.zeros(0), y=y)


def _reduce_equalities(lp, tol):
    """Drop redundant equality rows; None if the equalities are inconsistent.

    Returns (lp, lift) where ``lift`` maps reduced multipliers back to the
    original rows. Full-row-rank blocks are returned untouched.
    """
    E, b = lp.E, lp.b
    if E.shape[0] == 0:
        return lp, None
    U, sv, Vt = np.linalg.svd(E, full_matrices=False)
    r = int(np.sum(sv > sv[0] * max(E.shape) * np.finfo(float).eps)) if sv[0] > 0 else 0
    if r == E.shape[0]:
        return lp, None
    # b must lie in range(E); U[:, r:] spans the left null space
    if np.linalg.norm(U[:, r:].T @ b, np.inf) > tol.feasibility * (1 + np.linalg.norm(b, np.inf)):
        return None, None
    U_r = U[:, :r]
    reduced = LinearProgram(lp.c, lp.G if lp.G.shape[0] else None, lp.h if lp.G.shape[0] else None,
                            (sv[:r, None] * Vt[:r]) if r else None, (U_r.T @ b) if r else None)
    return reduced, U_r


def solve_lp(lp, tol=DEFAULT_TOL, kkt=None):
    """Solve ``lp`` by Mehrotra predictor-corrector.

    Parameters
    ----------
    lp : LinearProgram
    tol : ToleranceSettings
        ``feasibility`` bounds the scaled primal/dual residuals,
        ``gap`` bounds the complementarity ``s @ z`` (absolute).
    kkt : callable, optional
        ``kkt(lp)`` returning ``factor(d) -> solve(r1, r2)``; defaults to
        :func:`dense_kkt`.

    Returns
    -------
    LpSolution
        Status is Infeasible / Unbounded only when an approximate Farkas
        certificate is found from the current iterates; IterLimit when
        neither convergence nor a certificate is reached.
    """
    reduced, lift = _reduce_equalities(lp, tol)
    if reduced is None:
        n = lp.n_vars
        k, p = lp.G.shape[0], lp.E.shape[0]
        return LpSolution(np.zeros(n), 0.0, 0.0, LpStatus.INFEASIBLE, 0, np.inf, np.inf,
                          s=np.zeros(k), z=np.zeros(k), y=np.zeros(p))
    if lift is not None:
        sol = solve_lp(reduced, tol, kkt)
        sol.y = lift @ sol.y if sol.y is not None and sol.y.size else np.zeros(lp.E.shape[0])
        return sol
    c, G, h, E, b = lp.c, lp.G, lp.h, lp.E, lp.b
    k = G.shape[0]
    if k == 0:
        return _equality_only(lp, tol)
    factor = (kkt or dense_kkt)(lp)

    # Starting point: least-norm slacks and multipliers, then shifted positive.
    solve0 = factor(np.ones(k))
    x, _ = solve0(G.T @ h, b)
    s = h - G @ x
    v, y = solve0(-c, np.zeros(E.shape[0]))
    z = G @ v
    for vec in (s, z):
        lo = vec.min()
        if lo <= 0:
            vec += 1.0 - lo
    sz = s @ z
    s += 0.5 * sz / z.sum()
    z += 0.5 * sz / s.sum()

    h_scale = 1.0 + np.linalg.norm(h, np.inf)
    b_scale = 1.0 + (np.linalg.norm(b, np.inf) if b.size else 0.0)
    c_scale = 1.0 + np.linalg.norm(c, np.inf)
    status = LpStatus.ITER_LIMIT
    it = 0
    pres = dres = np.inf
    for it in range(tol.max_iter + 1):
        rd = c + G.T @ z + E.T @ y
        rp = G @ x + s - h
        re = E @ x - b
        gap = float(s @ z)
        pres = max(np.linalg.norm(rp, np.inf) / h_scale,
                   (np.linalg.norm(re, np.inf) / b_scale) if re.size else 0.0)
        dres = np.linalg.norm(rd, np.inf) / c_scale
        if pres <= tol.feasibility and dres <= tol.feasibility and gap <= tol.gap:
            status = LpStatus.OPTIMAL
            break
        # Approximate Farkas certificates from the (diverging) iterates.
        dual_ray = -(h @ z + b @ y)
        if dual_ray > 0 and np.linalg.norm(rd - c, np.inf) <= tol.feasibility * dual_ray:
            status = LpStatus.INFEASIBLE
            break
        primal_ray = -(c @ x)
        if primal_ray > 0 and (
                np.linalg.norm(G @ x + s, np.inf) <= tol.feasibility * primal_ray
                and (not re.size or np.linalg.norm(E @ x, np.inf) <= tol.feasibility * primal_ray)):
            status = LpStatus.UNBOUNDED
            break
        if it == tol.max_iter:
            break

        mu = gap / k
        d = z / s
        try:
            solve = factor(d)
        except (np.linalg.LinAlgError, ValueError):
            break

        def newton(rc):
            r1 = -rd - G.T @ (d * rp - rc / s)
            dx, dy = solve(r1, -re)
            gdx = G @ dx
            dz = d * (gdx + rp) - rc / s
            ds = -rp - gdx
            return dx, ds, dz, dy

        # Predictor
        dx, ds, dz, dy = newton(s * z)
        a_p = min(1.0, _max_step(s, ds))
        a_d = min(1.0, _max_step(z, dz))
        mu_aff = (s + a_p * ds) @ (z + a_d * dz) / k
        sigma = min(1.0, (mu_aff / mu) ** 3)
        # Corrector
        dx, ds, dz, dy = newton(s * z + ds * dz - sigma * mu)
        a_p = min(1.0, 0.99 * _max_step(s, ds))
        a_d = min(1.0, 0.99 * _max_step(z, dz))
        if not np.all(np.isfinite(dx)) or max(a_p, a_d) < 1e-14:
            break
        x = x + a_p * dx
        s = s + a_p * ds
        z = z + a_d * dz
        y = y + a_d * dy

    return LpSolution(
        x=x,
        objective_value=float(c @ x),
        duality_gap=float(max(s @ z, 0.0)),
        status=status,
        iterations=it,
        primal_residual=float(pres),
        dual_residual=float(dres),
        s=s, z=z, y=y,
    )
