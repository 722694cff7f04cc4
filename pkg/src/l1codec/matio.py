"""Plain-text matrix files: a "rows cols" header then one row per line."""
import numpy as np

from .linalg import as_matrix


def format_real(x):
    return format(float(x), ".17g")


def read_matrix(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: missing 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} entries, found {len(values)}")
    return as_matrix(np.array([float(v) for v in values]).reshape(rows, cols))


def read_vector(path):
    """Vector stored as an (n, 1) or (1, n) matrix file."""
    m = read_matrix(path)
    if min(m.shape) != 1:
        raise ValueError(f"{path}: expected a vector, got shape {m.shape}")
    return m.reshape(-1)


def write_matrix(path, m):
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines += [" ".join(format_real(v) for v in row) for row in m]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_vector(path, v):
    write_matrix(path, np.asarray(v, dtype=np.float64).reshape(-1, 1))
