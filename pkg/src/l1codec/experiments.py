"""Monte Carlo recovery experiments.

Every trial draws from its own generator, seeded from the master seed and
the trial's coordinates, so results do not depend on execution order or
on the number of worker threads.
"""
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import L1CodecError
from .l1 import basis_pursuit_full, decode_l1
from .linalg import sample_gaussian_matrix
from .lp import DEFAULT_TOL, LpStatus
from .matio import format_real
from .rng import SeededRng, derive_seed

ERROR_DISTS = ("gauss", "rademacher", "cauchy")
_STREAM_A, _STREAM_TRIAL, _STREAM_A_PER_TRIAL = 0, 1, 2


def worker_count():
    """Thread count from L1CODEC_THREADS (0 or unset = one per CPU)."""
    raw = os.environ.get("L1CODEC_THREADS", "0").strip() or "0"
    n = int(raw)
    return n if n > 0 else (os.cpu_count() or 1)


def _map(fn, items, workers=None):
    workers = workers or worker_count()
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def parse_grid(spec):
    """"start:step:stop" (inclusive) or a comma list -> tuple of floats."""
    if ":" in spec:
        start, step, stop = (float(v) for v in spec.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    return tuple(float(v) for v in spec.split(",") if v.strip())


def _fraction_key(fraction):
    return int(round(fraction * 1e9))


@dataclass(frozen=True)
class ExperimentConfig:
    m: int
    oversample: float
    corruption_fractions: tuple
    trials_per_point: int = 100
    master_seed: int = 42
    success_tolerance: float = 1e-4
    resample_A: bool = False
    error_dist: str = "gauss"

    def __post_init__(self):
        object.__setattr__(self, "corruption_fractions", tuple(self.corruption_fractions))
        if self.oversample < 1:
            raise ValueError("oversample must be >= 1")
        n = self.m / self.oversample
        if abs(n - round(n)) > 1e-9 or round(n) < 1 or round(n) >= self.m:
            raise ValueError(f"m={self.m} / oversample={self.oversample} must be an integer < m")
        grid = self.corruption_fractions
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("corruption fractions must be strictly increasing")
        if any(not 0 <= f < 0.5 for f in grid):
            raise ValueError("corruption fractions must lie in [0, 1/2)")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be positive")
        if self.error_dist not in ERROR_DISTS:
            raise ValueError(f"error_dist must be one of {ERROR_DISTS}")

    @property
    def n(self):
        return int(round(self.m / self.oversample))


@dataclass
class TrialRecord:
    fraction: float
    trial_index: int
    recovered: bool
    max_abs_error: float
    solver_status: LpStatus
    wall_time: float = field(compare=False, default=0.0)


@dataclass
class CurvePoint:
    fraction: float
    success_rate: float
    trials: int


@dataclass
class SuccessCurve:
    points: list
    breakpoint: float = None
    records: list = field(default_factory=list, repr=False)
    config: ExperimentConfig = None


def corruption_count(fraction, m):
    """round(fraction * m), halves rounded up."""
    return int(math.floor(fraction * m + 0.5))


def _draw_errors(rng, k, dist):
    if dist == "gauss":
        return rng.normal(k)
    if dist == "rademacher":
        return rng.rademacher(k)
    return rng.cauchy(k)


def run_decoding_trial(a, fraction, rng, trial_index=0, success_tolerance=1e-4,
                       error_dist="gauss", tol=DEFAULT_TOL):
    """Corrupt round(fraction*m) random entries of A x and try to decode.

    Draw order: support, error values on the support, plaintext x.
    """
    if not 0 <= fraction < 0.5:
        raise ValueError("fraction must lie in [0, 1/2)")
    m, n = a.shape
    start = time.perf_counter()
    k = corruption_count(fraction, m)
    support = rng.sample_without_replacement(m, k)
    e = np.zeros(m)
    e[support] = _draw_errors(rng, k, error_dist)
    x = rng.normal(n)
    try:
        res = decode_l1(a, a @ x + e, tol)
        status = res.status
        err = float(np.abs(res.f_hat - x).max())
    except (L1CodecError, np.linalg.LinAlgError):
        status, err = LpStatus.ITER_LIMIT, math.inf
    recovered = (status is LpStatus.OPTIMAL
                 and err <= success_tolerance * max(1.0, float(np.abs(x).max())))
    return TrialRecord(fraction, trial_index, recovered, err, status,
                       time.perf_counter() - start)


def coding_matrix(config):
    rng = SeededRng(derive_seed(config.master_seed, _STREAM_A))
    return sample_gaussian_matrix(config.m, config.n, 1.0, rng)


def run_success_curve(config, workers=None, progress=None):
    """Success rate of l1 decoding at each corruption fraction of the grid.

    One coding matrix is drawn per curve unless ``config.resample_A``.
    ``progress``, if given, is called with each finished CurvePoint.
    """
    a = None if config.resample_A else coding_matrix(config)

    def trial(job):
        fraction, idx = job
        key = _fraction_key(fraction)
        a_t = a
        if a_t is None:
            a_rng = SeededRng(derive_seed(config.master_seed, _STREAM_A_PER_TRIAL, key, idx))
            a_t = sample_gaussian_matrix(config.m, config.n, 1.0, a_rng)
        rng = SeededRng(derive_seed(config.master_seed, _STREAM_TRIAL, key, idx))
        return run_decoding_trial(a_t, fraction, rng, idx, config.success_tolerance,
                                  config.error_dist)

    points, records = [], []
    for fraction in config.corruption_fractions:
        jobs = [(fraction, i) for i in range(config.trials_per_point)]
        recs = sorted(_map(trial, jobs, workers), key=lambda r: r.trial_index)
        records.extend(recs)
        ok = sum(r.recovered for r in recs)
        point = CurvePoint(fraction, ok / len(recs), len(recs))
        points.append(point)
        if progress:
            progress(point)
    return SuccessCurve(points, breakpoint_of(points), records, config)


def breakpoint_of(points):
    """Largest fraction whose success rate is exactly 1 (None if none)."""
    full = [p.fraction for p in points if p.success_rate == 1.0]
    return max(full) if full else None


def half_corruption_instance(b, f, f_prime, rng):
    """Two plaintexts explaining the same received word equally well.

    The coding matrix stacks ``b`` twice (rows shuffled); the received word
    agrees with ``A f`` on one copy and with ``A f_prime`` on the other, so
    ||y - A f||_1 = ||y - A f_prime||_1 = ||b (f - f_prime)||_1 and both
    corruption vectors touch at most half the entries.
    Returns (A, y, e, e_prime).
    """
    n = b.shape[0]
    perm = rng.permutation(2 * n)
    a = np.vstack([b, b])[perm]
    y = np.concatenate([b @ f, b @ f_prime])[perm]
    return a, y, y - a @ f, y - a @ f_prime


@dataclass(frozen=True)
class CompressibleConfig:
    m: int
    s: float
    B: float
    K_grid: tuple
    trials: int = 20
    seed: int = 7

    def __post_init__(self):
        object.__setattr__(self, "K_grid", tuple(int(k) for k in self.K_grid))
        if self.s < 1:
            raise ValueError("decay exponent s must be >= 1")
        if self.B <= 0:
            raise ValueError("B must be positive")
        if any(not 1 <= k <= self.m for k in self.K_grid):
            raise ValueError("every K must lie in [1, m]")
        if self.trials < 1:
            raise ValueError("trials must be positive")


@dataclass
class CompressibleRow:
    K: int
    bp_error: float
    oracle_error: float
    failures: int = 0


def generate_compressible(m, s, B, rng):
    """Signal whose k-th largest magnitude is exactly B k^-s.

    Positions are a random permutation; signs are random.
    """
    if s < 1 or B <= 0:
        raise ValueError("need s >= 1 and B > 0")
    mags = B * np.arange(1, m + 1, dtype=np.float64) ** (-s)
    perm = rng.permutation(m)
    signs = rng.rademacher(m)
    alpha = np.empty(m)
    alpha[perm] = mags * signs
    return alpha


def best_k_term_error(alpha, K):
    mags = np.sort(np.abs(alpha))[::-1]
    return float(np.sqrt((mags[K:] ** 2).sum()))


def run_compressible_experiment(config, workers=None):
    """Mean l2 error of basis pursuit from K Gaussian measurements vs the
    best K-term approximation, for each K in the grid."""

    def trial(job):
        K, idx = job
        rng = SeededRng(derive_seed(config.seed, K, idx))
        alpha = generate_compressible(config.m, config.s, config.B, rng)
        F = sample_gaussian_matrix(K, config.m, 1.0 / K, rng)
        res = basis_pursuit_full(F, F @ alpha)
        if res.status is not LpStatus.OPTIMAL:
            return None, best_k_term_error(alpha, K)
        return float(np.linalg.norm(alpha - res.d)), best_k_term_error(alpha, K)

    rows = []
    for K in config.K_grid:
        out = _map(trial, [(K, i) for i in range(config.trials)], workers)
        errs = [e for e, _ in out if e is not None]
        rows.append(CompressibleRow(
            K,
            float(np.mean(errs)) if errs else math.nan,
            float(np.mean([o for _, o in out])),
            sum(e is None for e, _ in out),
        ))
    return rows


def loglog_slope(xs, ys):
    """Least-squares slope of log(ys) against log(xs)."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def emit_results(result, path, fmt="csv"):
    """Write a SuccessCurve or a list of CompressibleRow.

    ``csv`` writes a header plus one line per point. ``gnuplot`` prefixes
    '#' comment lines echoing the configuration and separates by spaces.
    """
    if isinstance(result, SuccessCurve):
        header = ["fraction", "success_rate", "trials"]
        rows = [(p.fraction, p.success_rate, p.trials) for p in result.points]
        config = result.config
    else:
        header = ["K", "bp_error", "oracle_error"]
        rows = [(r.K, r.bp_error, r.oracle_error) for r in result]
        config = None

    def fmt_cell(v):
        return str(v) if isinstance(v, (int, np.integer)) else format_real(v)

    if fmt == "csv":
        lines = [",".join(header)] + [",".join(fmt_cell(v) for v in row) for row in rows]
    elif fmt == "gnuplot":
        lines = []
        if config is not None:
            lines += [f"# {k} = {v}" for k, v in asdict(config).items()]
        if isinstance(result, SuccessCurve):
            lines.append(f"# breakpoint = {result.breakpoint}")
        lines.append("# " + " ".join(header))
        lines += [" ".join(fmt_cell(v) for v in row) for row in rows]
    else:
        raise ValueError(f"unknown format {fmt!r}")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror}") from exc
