"""Shared test utilities."""
import numpy as np

from l1codec.linalg import sample_gaussian_matrix


def incoherent_frame(p, m, rng, max_ip=0.25):
    """Random rotation of [I_p | flat +-1/sqrt(p) columns], columns shuffled.

    The flat columns are kept only if pairwise |<u, v>| <= max_ip, so the
    frame has unit columns and small coherence; at p = 8..10 these satisfy
    delta_1 + theta_{1,1} + theta_{1,2} < 1, which Gaussian draws of the
    same size essentially never do.
    """
    cols = []
    while len(cols) < m - p:
        v = rng.rademacher(p) / np.sqrt(p)
        if all(abs(v @ w) <= max_ip + 1e-12 for w in cols):
            cols.append(v)
    B = np.hstack([np.eye(p), np.array(cols).T])
    Q, R = np.linalg.qr(sample_gaussian_matrix(p, p, 1.0, rng))
    Q = Q * np.sign(np.diag(R))
    return (Q @ B)[:, rng.permutation(m)]


def duplicated_column_matrix(p, m, rng, i=0, j=1):
    F = sample_gaussian_matrix(p, m, 1.0, rng)
    F /= np.linalg.norm(F, axis=0)
    F[:, j] = F[:, i]
    return F


def orthonormal_columns(p, m, rng):
    Q, _ = np.linalg.qr(sample_gaussian_matrix(p, m, 1.0, rng))
    return Q


def random_feasible_lp(rng, n=None, k=None, p=None):
    """Dense LP min c x, Gx <= h, Ex = b that is feasible and bounded by construction.

    Feasibility: h = G x0 + positive slack, b = E x0. Boundedness: c is built
    from a strictly positive dual point, c = -G' z0 - E' y0.
    """
    from l1codec.lp import LinearProgram

    n = n or 2 + rng.integer(7)
    k = k or n + 1 + rng.integer(2 * n)
    p = rng.integer(n) if p is None else p
    G = sample_gaussian_matrix(k, n, 1.0, rng)
    x0 = rng.normal(n)
    h = G @ x0 + rng.uniform(k) + 0.1
    E = sample_gaussian_matrix(p, n, 1.0, rng) if p else None
    b = E @ x0 if p else None
    z0 = rng.uniform(k) + 0.1
    c = -G.T @ z0
    if p:
        c -= E.T @ rng.normal(p)
    return LinearProgram(c, G, h, E, b)
