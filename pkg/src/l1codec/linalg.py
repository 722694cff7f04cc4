"""Dense real linear algebra used throughout the package.

Matrices are plain 2-D ``float64`` numpy arrays; column subsets are passed
as sorted integer sequences.
"""
import numpy as np
import scipy.linalg

from .errors import DimensionError, RankError, SingularityError


def as_matrix(a):
    """Validate and return ``a`` as a finite 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a nonempty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DimensionError("matrix has non-finite entries")
    return m


def as_vector(v, length=None):
    x = np.asarray(v, dtype=np.float64).reshape(-1)
    if length is not None and x.size != length:
        raise DimensionError(f"expected a vector of length {length}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DimensionError("vector has non-finite entries")
    return x


def column_index_set(indices, universe):
    """Sorted, duplicate-free column indices, each in ``[0, universe)``."""
    idx = sorted(int(i) for i in indices)
    if len(set(idx)) != len(idx):
        raise IndexError("duplicate column index")
    if idx and (idx[0] < 0 or idx[-1] >= universe):
        raise IndexError(f"column index out of range [0, {universe})")
    return np.array(idx, dtype=np.intp)


def sample_gaussian_matrix(rows, cols, variance, rng):
    """rows x cols matrix of i.i.d. N(0, variance) entries drawn from ``rng``.

    Entries are drawn in column-major order.
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"invalid dimensions {rows}x{cols}")
    if not variance > 0:
        raise ValueError("variance must be positive")
    z = rng.normal(rows * cols) * np.sqrt(variance)
    return z.reshape(cols, rows).T.copy()


def annihilator(a, rtol=1e-10):
    """Orthonormal-row matrix F of shape (m-n, m) with F @ a = 0.

    The rows span the orthogonal complement of range(a).
    """
    a = as_matrix(a)
    m, n = a.shape
    if m <= n:
        raise DimensionError(f"need more rows than columns, got {m}x{n}")
    q, r = np.linalg.qr(a, mode="complete")
    diag = np.abs(np.diag(r))
    if diag.min() <= rtol * max(diag.max(), 1.0):
        raise RankError("matrix does not have full column rank")
    return q[:, n:].T.copy()


def submatrix_columns(f, cols):
    f = np.asarray(f)
    cols = np.asarray(cols, dtype=np.intp)
    if cols.size and (cols.min() < 0 or cols.max() >= f.shape[1]):
        raise IndexError(f"column index out of range [0, {f.shape[1]})")
    return f[:, cols]


def extremal_eigs_gram(m):
    """(lambda_min, lambda_max) of m.T @ m, from the singular values of m."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise DimensionError(f"need rows >= cols, got shape {m.shape}")
    sv = np.linalg.svd(m, compute_uv=False)
    return float(sv[-1] ** 2), float(sv[0] ** 2)


def solve_gram_system(f_t, c):
    """Solve (f_t.T @ f_t) x = c.

    Uses a QR factorization of ``f_t`` so the Gram matrix is never formed.
    Raises SingularityError if f_t is (numerically) rank deficient.
    """
    f_t = np.asarray(f_t, dtype=np.float64)
    c = as_vector(c, f_t.shape[1])
    if f_t.shape[0] < f_t.shape[1]:
        raise SingularityError("Gram matrix of a wide matrix is singular")
    r = np.linalg.qr(f_t, mode="r")
    d = np.abs(np.diag(r))
    if d.size == 0 or d.min() <= 1e-13 * max(d.max(), 1e-300):
        raise SingularityError("Gram matrix is singular (delta >= 1 on this support)")
    z = scipy.linalg.solve_triangular(r, c, trans="T")
    return scipy.linalg.solve_triangular(r, z)
