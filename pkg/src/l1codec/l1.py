"""l1 decoding and basis pursuit as linear programs."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, SolverError
from .linalg import annihilator, as_matrix, as_vector
from .lp import DEFAULT_TOL, LinearProgram, LpStatus, _full_solver, dense_kkt, solve_lp

# Relative threshold below which a residual / coefficient is treated as zero
# when guessing whether an optimum is unique.
_ZERO = 1e-7


@dataclass
class DecodeResult:
    f_hat: np.ndarray
    e_hat: np.ndarray
    objective: float
    status: LpStatus
    # u = sgn(residual) where the residual is nonzero, |u| <= 1, A.T @ u = 0
    subgradient: np.ndarray
    unique_hint: bool
    iterations: int = 0


def _decode_kkt(a):
    """Newton-system solver for the LP over (g, t) with G = [[A, -I], [-A, -I]].

    Eliminating t leaves the n x n system A' diag(4 d1 d2 / (d1 + d2)) A.
    """
    m = a.shape[0]

    def kkt(lp):
        def factor(d):
            d1, d2 = d[:m], d[m:]
            lam = d1 + d2
            diff = d2 - d1
            w = 4.0 * d1 * d2 / lam
            M = a.T @ (w[:, None] * a)
            cho = scipy.linalg.cho_factor(M)

            def solve(r1, r2):
                rg, rt = r1[:-m], r1[-m:]
                u = scipy.linalg.cho_solve(cho, rg - a.T @ (diff / lam * rt))
                v = (rt - diff * (a @ u)) / lam
                return np.concatenate([u, v]), np.zeros(0)

            return solve

        return factor

    return kkt


def decode_lp(a, y):
    """The LP  min 1't  s.t.  -t <= y - A g <= t  over x = (g, t)."""
    m, n = a.shape
    eye = np.eye(m)
    G = np.block([[a, -eye], [-a, -eye]])
    h = np.concatenate([y, -y])
    c = np.concatenate([np.zeros(n), np.ones(m)])
    return LinearProgram(c, G, h)


def _decode_unique(a, residual, u):
    scale = max(1.0, np.abs(residual).max())
    zero_rows = np.abs(residual) <= _ZERO * scale
    if zero_rows.sum() < a.shape[1]:
        return False
    if np.any(np.abs(u[zero_rows]) >= 1 - 1e-6):
        return False
    return np.linalg.matrix_rank(a[zero_rows]) == a.shape[1]


def decode_l1(a, y, tol=DEFAULT_TOL):
    """Recover the plaintext from ``y = A f + e`` by minimizing ||y - A g||_1."""
    a = as_matrix(a)
    m, n = a.shape
    y = as_vector(y, m)
    if m <= n:
        raise DimensionError("coding matrix must have more rows than columns")
    sol = solve_lp(decode_lp(a, y), tol, kkt=_decode_kkt(a))
    f_hat = sol.x[:n].copy()
    e_hat = y - a @ f_hat
    u = sol.z[m:] - sol.z[:m]
    unique = sol.status is LpStatus.OPTIMAL and _decode_unique(a, e_hat, u)
    return DecodeResult(f_hat, e_hat, float(np.abs(e_hat).sum()), sol.status, u,
                        unique, sol.iterations)


@dataclass
class BasisPursuitResult:
    d: np.ndarray
    objective: float
    status: LpStatus
    # Fᵀ lam lies in [-1, 1] and equals sgn(d) on the support
    certificate: np.ndarray
    unique_hint: bool


def _bp_kkt(lp):
    factor = dense_kkt(lp)

    def safe_factor(d):
        try:
            return factor(d)
        except np.linalg.LinAlgError:
            return _full_solver(np.diag(d), lp.E)

    return safe_factor


def basis_pursuit_full(f, y_tilde, tol=DEFAULT_TOL):
    """min ||d||_1 s.t. F d = y_tilde via the split d = d_plus - d_minus >= 0."""
    f = as_matrix(f)
    p, m = f.shape
    y_tilde = as_vector(y_tilde, p)
    lp = LinearProgram(
        c=np.ones(2 * m),
        G=-np.eye(2 * m),
        h=np.zeros(2 * m),
        E=np.hstack([f, -f]),
        b=y_tilde,
    )
    sol = solve_lp(lp, tol, kkt=_bp_kkt)
    d = sol.x[:m] - sol.x[m:]
    cert = -(f.T @ sol.y)
    unique = False
    if sol.status is LpStatus.OPTIMAL:
        support = np.abs(d) > _ZERO * max(1.0, np.abs(d).max())
        off = ~support
        unique = bool(
            (not np.any(off) or np.abs(cert[off]).max() < 1 - 1e-6)
            and (not np.any(support) or np.linalg.matrix_rank(f[:, support]) == support.sum()))
    return BasisPursuitResult(d, float(np.abs(d).sum()), sol.status, cert, unique)


def basis_pursuit(f, y_tilde, tol=DEFAULT_TOL):
    """Minimizer of ||d||_1 subject to F d = y_tilde.

    Raises SolverError (carrying the LP status) unless the solve is optimal.
    """
    res = basis_pursuit_full(f, y_tilde, tol)
    if res.status is not LpStatus.OPTIMAL:
        raise SolverError(f"basis pursuit finished with status {res.status.value}",
                          res.status)
    return res.d


def decode_equivalence_check(a, f, e, tol=DEFAULT_TOL, atol=1e-6):
    """Check that residual decoding and basis pursuit on F y agree.

    Minimizers are compared elementwise when both programs report a unique
    optimum; otherwise only the optimal l1 values are compared.
    """
    a = as_matrix(a)
    y = a @ as_vector(f, a.shape[1]) + as_vector(e, a.shape[0])
    dec = decode_l1(a, y, tol)
    F = annihilator(a)
    bp = basis_pursuit_full(F, F @ y, tol)
    if dec.status is not LpStatus.OPTIMAL or bp.status is not LpStatus.OPTIMAL:
        return False
    if dec.unique_hint and bp.unique_hint:
        return bool(np.max(np.abs(dec.e_hat - bp.d)) <= atol)
    return abs(dec.objective - bp.objective) <= atol * max(1.0, dec.objective)
