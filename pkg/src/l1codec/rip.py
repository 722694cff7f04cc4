"""Restricted isometry / orthogonality constants and dual certificates.

Exact constants are maxima over full subset enumeration, which is only
feasible for small matrices; past the enumeration cap the sampled
variants give lower bounds.
"""
import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EnumerationCapError, NoSolutionError, SingularityError
from .linalg import as_matrix, as_vector, column_index_set, solve_gram_system
from .rng import SeededRng

ENUMERATION_CAP = 2_000_000
L0_CAP = 1_000_000
N_SAMPLES = 100_000
_CHUNK = 20_000


class RipMode(str, enum.Enum):
    EXACT = "exact"
    SAMPLED = "sampled"


def _combination_chunks(n, k, chunk=_CHUNK):
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.intp).reshape(len(block), k)


def _gram(F):
    return F.T @ F


def _eig_deviation(gram, subsets):
    """max(lambda_max - 1, 1 - lambda_min) for each subset's Gram block."""
    if subsets.shape[1] == 1:
        d = gram[subsets[:, 0], subsets[:, 0]]
        return np.abs(d - 1.0)
    blocks = gram[subsets[:, :, None], subsets[:, None, :]]
    w = np.linalg.eigvalsh(blocks)
    return np.maximum(w[:, -1] - 1.0, 1.0 - w[:, 0])


def _block_norms(gram, left, right):
    blocks = gram[left[:, :, None], right[:, None, :]]
    if min(left.shape[1], right.shape[1]) == 1:
        return np.sqrt((blocks**2).sum(axis=(1, 2)))
    return np.linalg.norm(blocks, 2, axis=(1, 2))


def _check_cap(count, cap):
    if count > cap:
        raise EnumerationCapError(
            f"{count} subsets exceed the enumeration cap {cap}; use the sampled variant")


def delta_exact(F, S, cap=ENUMERATION_CAP):
    """Restricted isometry constant delta_S by enumerating all |T| = S."""
    F = as_matrix(F)
    n = F.shape[1]
    if not 1 <= S <= n:
        raise ValueError(f"S must lie in [1, {n}]")
    _check_cap(math.comb(n, S), cap)
    gram = _gram(F)
    return float(max(_eig_deviation(gram, sub).max() for sub in _combination_chunks(n, S)))


def delta_one(F):
    F = as_matrix(F)
    return float(np.abs((F**2).sum(axis=0) - 1.0).max())


def delta_sampled(F, S, rng=None, n_samples=N_SAMPLES):
    """Lower bound on delta_S from random supports of size S."""
    F = as_matrix(F)
    rng = rng or SeededRng(0)
    n = F.shape[1]
    gram = _gram(F)
    best = 0.0
    for start in range(0, n_samples, _CHUNK):
        size = min(_CHUNK, n_samples - start)
        sub = np.array([sorted(rng.sample_without_replacement(n, S)) for _ in range(size)],
                       dtype=np.intp)
        best = max(best, float(_eig_deviation(gram, sub).max()))
    return best


def theta_exact(F, S, S_prime, cap=ENUMERATION_CAP):
    """Restricted orthogonality constant theta_{S,S'}: largest spectral norm
    of F_T' F_T' over disjoint |T| = S, |T'| = S'."""
    F = as_matrix(F)
    n = F.shape[1]
    if S < 1 or S_prime < 1 or S + S_prime > n:
        raise ValueError(f"need S, S' >= 1 and S + S' <= {n}")
    if S > S_prime:
        S, S_prime = S_prime, S
    _check_cap(math.comb(n, S) * math.comb(n - S, S_prime), cap)
    gram = _gram(F)
    inner = np.array(list(itertools.combinations(range(n - S), S_prime)), dtype=np.intp)
    inner = inner.reshape(-1, S_prime)
    best = 0.0
    mask = np.ones(n, dtype=bool)
    for T in itertools.combinations(range(n), S):
        mask[:] = True
        mask[list(T)] = False
        rest = np.nonzero(mask)[0]
        right = rest[inner]
        left = np.broadcast_to(np.array(T, dtype=np.intp), (right.shape[0], S))
        best = max(best, float(_block_norms(gram, left, right).max()))
    return best


def theta_sampled(F, S, S_prime, rng=None, n_samples=N_SAMPLES):
    F = as_matrix(F)
    rng = rng or SeededRng(0)
    n = F.shape[1]
    gram = _gram(F)
    best = 0.0
    for start in range(0, n_samples, _CHUNK):
        size = min(_CHUNK, n_samples - start)
        draws = np.array([rng.sample_without_replacement(n, S + S_prime) for _ in range(size)],
                         dtype=np.intp).reshape(size, S + S_prime)
        best = max(best, float(_block_norms(gram, draws[:, :S], draws[:, S:]).max()))
    return best


def check_theta_delta(F, S, S_prime, slack=1e-9, cap=ENUMERATION_CAP):
    """Evaluate theta_{S,S'} <= delta_{S+S'} <= theta_{S,S'} + max(delta_S, delta_S')."""
    theta = theta_exact(F, S, S_prime, cap)
    d_sum = delta_exact(F, S + S_prime, cap)
    d_max = max(delta_exact(F, S, cap), delta_exact(F, S_prime, cap))
    return theta <= d_sum + slack, d_sum <= theta + d_max + slack


def recovery_condition(F, S, cap=ENUMERATION_CAP):
    """(delta_S + theta_{S,S} + theta_{S,2S}, value < 1)."""
    value = delta_exact(F, S, cap) + theta_exact(F, S, S, cap) + theta_exact(F, S, 2 * S, cap)
    return value, value < 1.0


@dataclass
class RipReport:
    S: int
    delta: dict
    theta: dict
    mode: RipMode
    condition_recover_better: float = None
    condition_theorem51: float = None
    # per-quantity mode, keyed like delta / theta
    entry_modes: dict = field(default_factory=dict)

    def rows(self):
        """(quantity, S, S', value, mode) tuples in a stable order."""
        out = []
        for s, v in sorted(self.delta.items()):
            out.append(("delta", s, "", v, self.entry_modes[("delta", s)].value))
        for (s1, s2), v in sorted(self.theta.items()):
            out.append(("theta", s1, s2, v, self.entry_modes[("theta", s1, s2)].value))
        return out


def rip_report(F, S, mode=RipMode.EXACT, thetas=(), rng=None, cap=ENUMERATION_CAP,
               n_samples=N_SAMPLES):
    """Constants needed by the recovery conditions at sparsity S.

    delta_s for s = 1..3S (where s <= number of columns), theta_{S,S},
    theta_{S,2S} and any extra (S1, S2) pairs. In exact mode an entry over
    the cap falls back to sampling and the report becomes a lower bound.
    """
    F = as_matrix(F)
    mode = RipMode(mode)
    rng = rng or SeededRng(0)
    n = F.shape[1]
    entry_modes = {}

    def compute(key, exact, sampled):
        if mode is RipMode.EXACT:
            try:
                value = exact()
                entry_modes[key] = RipMode.EXACT
                return value
            except EnumerationCapError:
                pass
        entry_modes[key] = RipMode.SAMPLED
        return sampled()

    delta = {}
    for s in range(1, min(3 * S, n) + 1):
        delta[s] = compute(("delta", s), lambda s=s: delta_exact(F, s, cap),
                           lambda s=s: delta_sampled(F, s, rng, n_samples))
    theta = {}
    for s1, s2 in [(S, S), (S, 2 * S), *[tuple(p) for p in thetas]]:
        if (s1, s2) in theta or s1 + s2 > n:
            continue
        theta[(s1, s2)] = compute(("theta", s1, s2),
                                  lambda a=s1, b=s2: theta_exact(F, a, b, cap),
                                  lambda a=s1, b=s2: theta_sampled(F, a, b, rng, n_samples))
    overall = (RipMode.EXACT if all(v is RipMode.EXACT for v in entry_modes.values())
               else RipMode.SAMPLED)
    report = RipReport(S, delta, theta, overall, entry_modes=entry_modes)
    if S in delta and (S, S) in theta and (S, 2 * S) in theta:
        d, t1, t2 = delta[S], theta[(S, S)], theta[(S, 2 * S)]
        report.condition_recover_better = d + t1 + t2
        report.condition_theorem51 = d + 2 * t1 + t2
    return report


def l0_decode_bruteforce(F, y_tilde, S_max, atol=1e-8, cap=L0_CAP):
    """Sparsest d with F d = y_tilde by exhaustive support search.

    Supports are tried by increasing size; the first size admitting a
    least-squares fit with residual <= atol wins. Returns (d, unique), with
    unique False when another support of the same size also fits.
    """
    F = as_matrix(F)
    p, n = F.shape
    y = as_vector(y_tilde, p)
    _check_cap(sum(math.comb(n, k) for k in range(1, S_max + 1)), cap)
    if np.linalg.norm(y) <= atol:
        return np.zeros(n), True
    for k in range(1, S_max + 1):
        found = None
        count = 0
        for sub in _combination_chunks(n, k):
            cols = np.transpose(F[:, sub], (1, 0, 2))  # (B, p, k)
            coef = np.linalg.pinv(cols) @ y
            resid = np.linalg.norm(np.einsum("bpk,bk->bp", cols, coef) - y, axis=1)
            hits = np.nonzero(resid <= atol)[0]
            if hits.size and found is None:
                found = (sub[hits[0]], coef[hits[0]])
            count += hits.size
            if count > 1:
                break
        if found is not None:
            d = np.zeros(n)
            d[found[0]] = found[1]
            return d, count == 1
    raise NoSolutionError(f"no support of size <= {S_max} reproduces the data")


def support_constants(F, S, cap=ENUMERATION_CAP):
    """Exact (delta_S, theta_{S,S}, theta_{S,2S}), or None past the cap.

    theta_{S,2S} is taken as theta_{S,n-S} when 3S exceeds the column count n.
    """
    n = F.shape[1]
    s2 = min(2 * S, n - S)
    try:
        return delta_exact(F, S, cap), (theta_exact(F, S, S, cap) if 2 * S <= n else 0.0), (
            theta_exact(F, S, s2, cap) if s2 >= 1 else 0.0)
    except EnumerationCapError:
        return None


def dual_certificate_l2(F, T, c_T, constants=None, cap=ENUMERATION_CAP):
    """w = F_T (F_T' F_T)^{-1} c_T, which interpolates c_T on T.

    Also returns theta_{S,S} * ||c|| / (1 - delta_S) with S = |T| (nan if the
    constants are unavailable or delta_S >= 1).
    """
    F = as_matrix(F)
    T = column_index_set(T, F.shape[1])
    c_T = as_vector(c_T, T.size)
    F_T = F[:, T]
    w = F_T @ solve_gram_system(F_T, c_T)
    if constants is None:
        constants = support_constants(F, T.size, cap)
    bound = float("nan")
    if constants is not None and constants[0] < 1:
        bound = constants[1] * np.linalg.norm(c_T) / (1 - constants[0])
    return w, bound


@dataclass
class DualCertificate:
    w: np.ndarray
    support: np.ndarray
    on_support_values: np.ndarray
    off_support_max: float
    iterations: int
    converged: bool
    # l2 mass of each iterate on its exceptional set
    exceptional_mass: list = field(default_factory=list)
    exceptional_sizes: list = field(default_factory=list)


def verify_certificate(F, T, signs, w, atol=1e-6, margin=1e-9):
    """<w, v_j> = signs_j on T and |<w, v_j>| < 1 off T."""
    F = as_matrix(F)
    T = column_index_set(T, F.shape[1])
    signs = as_vector(signs, T.size)
    corr = F.T @ as_vector(w, F.shape[0])
    off = np.ones(F.shape[1], dtype=bool)
    off[T] = False
    on_ok = T.size == 0 or np.abs(corr[T] - signs).max() <= atol
    off_ok = not off.any() or np.abs(corr[off]).max() <= 1 - margin
    return bool(on_ok and off_ok)


def dual_certificate_linf(F, T, signs, max_iter=1000, tol=1e-10, constants=None,
                          cap=ENUMERATION_CAP):
    """Certificate with sup-norm control off T, built by iterating away
    exceptional sets.

    w_1 interpolates ``signs`` on T. Each later w_{n+1} reproduces the values
    of w_n on its exceptional set T_n and vanishes on T; the result is the
    alternating sum w_1 - w_2 + w_3 - ...  T_n collects the indices outside
    T and T_{n-1} where |<w_n, v_j>| exceeds
    theta_{S,2S} ||c_n|| / ((1 - delta_S) sqrt(2S)), keeping at most the 2S
    largest. Iteration stops once the l2 mass on T_n is <= tol.
    """
    F = as_matrix(F)
    n = F.shape[1]
    T = column_index_set(T, n)
    signs = as_vector(signs, T.size)
    S = T.size
    s_prime = 2 * S
    if constants is None:
        constants = support_constants(F, S, cap)
    factor = 0.0
    if constants is not None and constants[0] < 1:
        factor = constants[2] / ((1 - constants[0]) * math.sqrt(s_prime))

    in_T = np.zeros(n, dtype=bool)
    in_T[T] = True
    masses, sizes = [], []

    def interpolate(cols, values):
        F_U = F[:, cols]
        return F_U @ solve_gram_system(F_U, values)

    try:
        w_n = interpolate(T, signs)
    except SingularityError:
        w = np.zeros(F.shape[0])
        corr = F.T @ w
        return DualCertificate(w, T, corr[T], float(np.abs(corr[~in_T]).max(initial=0.0)),
                               0, False)
    w = w_n.copy()
    data_norm = np.linalg.norm(signs)
    previous = np.zeros(0, dtype=np.intp)
    stopped = False
    it = 1
    for it in range(1, max_iter + 1):
        a = F.T @ w_n
        candidate = ~in_T
        candidate[previous] = False
        idx = np.nonzero(candidate & (np.abs(a) > factor * data_norm))[0]
        if idx.size > s_prime:
            idx = idx[np.argsort(-np.abs(a[idx]), kind="stable")[:s_prime]]
            idx.sort()
        mass = float(np.linalg.norm(a[idx]))
        masses.append(mass)
        sizes.append(int(idx.size))
        if idx.size == 0 or mass <= tol:
            stopped = True
            break
        cols = np.concatenate([T, idx])
        values = np.concatenate([np.zeros(S), a[idx]])
        try:
            w_n = interpolate(cols, values)
        except SingularityError:
            break
        w += (-1) ** it * w_n
        data_norm = mass
        previous = idx

    corr = F.T @ w
    off_max = float(np.abs(corr[~in_T]).max(initial=0.0))
    converged = stopped and verify_certificate(F, T, signs, w, atol=1e-8)
    return DualCertificate(w, T, corr[T], off_max, it, converged, masses, sizes)
