"""Closed-form recovery bounds for Gaussian coding matrices.

All logarithms are natural. ``gamma`` / ``p_over_m`` is the aspect ratio of
the p x m measurement matrix, ``r = S / m`` the sparsity ratio.
"""
import math

from .errors import BracketError

R_BRACKET = (1e-12, 1.0 / 3.0 - 1e-12)


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


def entropy(q):
    _require(0 < q < 1, f"entropy needs 0 < q < 1, got {q}")
    return -q * math.log(q) - (1 - q) * math.log1p(-q)


def f_of_r(r, m_over_p):
    """sqrt(m/p) * (sqrt(r) + sqrt(2 H(r)))."""
    _require(0 < r < 1, f"r must lie in (0, 1), got {r}")
    _require(m_over_p >= 1, f"m/p must be >= 1, got {m_over_p}")
    return math.sqrt(m_over_p) * (math.sqrt(r) + math.sqrt(2 * entropy(r)))


def eta_p(p, gamma):
    """Explicit o(1) term of the singular-value concentration bound."""
    _require(p >= 1, "p must be >= 1")
    _require(0 < gamma <= 1, f"gamma must lie in (0, 1], got {gamma}")
    return gamma ** (1 / 6) * (1 + math.sqrt(gamma)) ** (2 / 3) / (2 * p ** (1 / 3))


def rho(r, p_over_m, epsilon=0.0, p=None):
    """Upper bound on delta_S + delta_2S + delta_3S at sparsity ratio r.

    With ``epsilon = 0`` and ``p = None`` this is the large-sample bound.
    Passing ``epsilon`` inflates each f(jr) by (1 + epsilon); passing ``p``
    adds eta_p at aspect ratio jS/p. Increasing in r up to r ~ 0.27, where
    the falling entropy H(3r) takes over.
    """
    _require(0 < 3 * r < 1, f"need 0 < 3r < 1, got r={r}")
    _require(0 < p_over_m <= 1, f"p/m must lie in (0, 1], got {p_over_m}")
    total = 0.0
    for j in (1, 2, 3):
        dev = (1 + epsilon) * f_of_r(j * r, 1 / p_over_m)
        if p is not None:
            dev += eta_p(p, min(1.0, j * r / p_over_m))
        total += (1 + dev) ** 2 - 1
    return total


def r_star(p_over_m, tol=1e-8, epsilon=0.0, p=None, rho_tol=1e-9):
    """Root of rho(r) = 1 on (0, 1/3) by bisection.

    Stops once the bracket is narrower than ``tol`` and |rho - 1| <= rho_tol
    (rho is steep near its root, so a 1e-8 bracket alone leaves ~1e-5 in rho),
    or when the bracket cannot shrink further in floating point.
    """
    lo, hi = R_BRACKET
    g = lambda r: rho(r, p_over_m, epsilon, p) - 1.0
    g_lo, g_hi = g(lo), g(hi)
    if g_lo >= 0 or g_hi <= 0:
        raise BracketError(f"rho - 1 has no sign change on {R_BRACKET} for p/m={p_over_m}")
    while True:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if (hi - lo <= tol and abs(g_mid) <= rho_tol) or not lo < mid < hi:
            return mid
        if g_mid < 0:
            lo = mid
        else:
            hi = mid


def singular_deviation_tail(p, T_size, t, gamma=None):
    """Tail bound exp(-p t^2 / 2) for the extreme singular values of F_T.

    Returns (upper_prob, lower_prob, upper_threshold, lower_threshold); the
    thresholds are 1 +/- (sqrt(|T|/p) + eta_p + t).
    """
    _require(t > 0, "t must be positive")
    _require(p >= 1 and T_size >= 1, "p and |T| must be positive")
    gamma = min(1.0, T_size / p) if gamma is None else gamma
    bound = math.exp(-p * t * t / 2)
    shift = math.sqrt(T_size / p) + eta_p(p, gamma) + t
    return bound, bound, 1 + shift, 1 - shift


def delta_tail_bound(m, p, S, epsilon):
    """(2 exp(-m H(S/m) epsilon / 2), [1 + (1 + epsilon) f(S/m)]^2 - 1).

    The probability bounds the event that delta_S exceeds the threshold.
    """
    _require(0 < S < m, "need 0 < S < m")
    _require(epsilon > 0, "epsilon must be positive")
    _require(1 <= p <= m, "need 1 <= p <= m")
    r = S / m
    prob = 2 * math.exp(-m * entropy(r) * epsilon / 2)
    threshold = (1 + (1 + epsilon) * f_of_r(r, m / p)) ** 2 - 1
    return prob, threshold


def j_limit(r):
    """2 sqrt(r) + r + (2 + sqrt 2) sqrt(r(1-r)) + sqrt(r(1-2r)) on (0, 1/2)."""
    _require(0 < r < 0.5, f"r must lie in (0, 1/2), got {r}")
    return (2 * math.sqrt(r) + r + (2 + math.sqrt(2)) * math.sqrt(r * (1 - r))
            + math.sqrt(r * (1 - 2 * r)))


def j_limit_root(tol=1e-12):
    """r in (0, 1/2) where j_limit crosses 1 (J is increasing there)."""
    lo, hi = 1e-15, 0.1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if j_limit(mid) < 1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
