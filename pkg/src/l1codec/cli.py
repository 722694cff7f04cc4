"""Command-line entry point: decode, ric, bounds, certificate, experiment.

Exit codes: 0 success, 1 usage error, 2 solver or numeric failure,
3 input/output failure.
"""
import argparse
import csv
import sys

import numpy as np

from . import bounds
from .errors import L1CodecError
from .experiments import (ERROR_DISTS, CompressibleConfig, ExperimentConfig, emit_results,
                          parse_grid, run_compressible_experiment, run_success_curve)
from .l1 import decode_l1
from .lp import LpStatus
from .matio import format_real, read_matrix, read_vector, write_vector
from .rip import (ENUMERATION_CAP, RipMode, support_constants, dual_certificate_linf,
                  rip_report, verify_certificate)
from .rng import SeededRng

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _load(reader, path):
    try:
        return reader(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise InputError(f"malformed input {path}: {exc}") from exc


def _num(x):
    return format_real(x)


def _index_list(spec):
    try:
        return [int(v) for v in spec.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad index list {spec!r}") from exc


def _sign_list(spec):
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if tok in ("+", "+1", "1"):
            out.append(1.0)
        elif tok in ("-", "-1"):
            out.append(-1.0)
        else:
            raise UsageError(f"bad sign {tok!r}; use + or -")
    return out


def cmd_decode(args, out):
    a = _load(read_matrix, args.matrix)
    y = _load(read_vector, args.received)
    if y.size != a.shape[0]:
        raise UsageError(f"received word has length {y.size}, matrix has {a.shape[0]} rows")
    res = decode_l1(a, y)
    print(f"status     {res.status.value}", file=out)
    print(f"objective  {_num(res.objective)}", file=out)
    print(f"iterations {res.iterations}", file=out)
    print(f"unique     {res.unique_hint}", file=out)
    if args.out:
        try:
            write_vector(args.out, res.f_hat)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from exc
    else:
        print("f_hat", file=out)
        for v in res.f_hat:
            print(_num(v), file=out)
    if res.status is not LpStatus.OPTIMAL:
        print(f"error: solver finished with status {res.status.value}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_ric(args, out):
    F = _load(read_matrix, args.matrix)
    if not 1 <= args.S <= F.shape[1]:
        raise UsageError(f"--S must lie in [1, {F.shape[1]}]")
    thetas = [tuple(args.theta)] if args.theta else []
    report = rip_report(F, args.S, RipMode(args.mode), thetas, SeededRng(args.seed),
                        cap=args.cap)
    rows = report.rows()
    print(f"{'quantity':<10}{'S':>4}{'Sprime':>8}  {'value':<24}mode", file=out)
    for q, s, sp, v, mode in rows:
        print(f"{q:<10}{s:>4}{sp!s:>8}  {_num(v):<24}{mode}", file=out)
    if report.condition_recover_better is not None:
        v = report.condition_recover_better
        print(f"delta_S + theta_S,S + theta_S,2S   = {_num(v)}  ({'< 1' if v < 1 else '>= 1'})",
              file=out)
        v = report.condition_theorem51
        print(f"delta_S + 2 theta_S,S + theta_S,2S = {_num(v)}  ({'< 1' if v < 1 else '>= 1'})",
              file=out)
    print(f"mode {report.mode.value}", file=out)
    if args.csv:
        try:
            with open(args.csv, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["quantity", "S", "Sprime", "value", "mode"])
                for q, s, sp, v, mode in rows:
                    w.writerow([q, s, sp, _num(v), mode])
        except OSError as exc:
            raise InputError(f"cannot write {args.csv}: {exc.strerror}") from exc
    return EXIT_OK


def cmd_bounds(args, out):
    g = args.ratio
    if not 0 < g <= 1:
        raise UsageError("--ratio (p/m) must lie in (0, 1]")
    if args.r is not None:
        print(f"rho({_num(args.r)}) = {_num(bounds.rho(args.r, g))}", file=out)
    if args.rstar:
        print(f"r_star = {_num(bounds.r_star(g))}", file=out)
    if args.curve:
        rmin, rmax, npts = args.curve
        npts = int(npts)
        if npts < 2 or not 0 < rmin < rmax < 1 / 3:
            raise UsageError("--curve needs 0 < rmin < rmax < 1/3 and npts >= 2")
        lines = ["r,rho"] + [f"{_num(r)},{_num(bounds.rho(r, g))}"
                             for r in np.linspace(rmin, rmax, npts)]
        if args.csv:
            try:
                with open(args.csv, "w") as fh:
                    fh.write("\n".join(lines) + "\n")
            except OSError as exc:
                raise InputError(f"cannot write {args.csv}: {exc.strerror}") from exc
        else:
            print("\n".join(lines), file=out)
    return EXIT_OK


def cmd_certificate(args, out):
    F = _load(read_matrix, args.matrix)
    T = _index_list(args.support)
    signs = _sign_list(args.signs)
    if len(T) != len(signs):
        raise UsageError("--support and --signs must have the same length")
    if any(not 0 <= j < F.shape[1] for j in T) or len(set(T)) != len(T):
        raise UsageError(f"support indices must be distinct and in [0, {F.shape[1]})")
    order = np.argsort(T)
    T = [T[i] for i in order]
    signs = [signs[i] for i in order]
    constants = support_constants(F, len(T), ENUMERATION_CAP)
    cert = dual_certificate_linf(F, T, signs, max_iter=args.max_iter, tol=args.tol,
                                 constants=constants)
    verified = verify_certificate(F, T, signs, cert.w)
    print(f"converged        {cert.converged}", file=out)
    print(f"verified         {verified}", file=out)
    print(f"iterations       {cert.iterations}", file=out)
    for j, v in zip(T, cert.on_support_values):
        print(f"on-support  {j:>5}  {_num(v)}", file=out)
    print(f"off-support max  {_num(cert.off_support_max)}", file=out)
    if constants is not None:
        d, t1, t2 = constants
        if d + t2 < 1:
            bound = t1 / (1 - d - t2)
            ok = cert.off_support_max <= bound + 1e-9
            print(f"sup bound        {_num(bound)}  ({'respected' if ok else 'VIOLATED'})",
                  file=out)
        else:
            print("sup bound        unavailable (delta_S + theta_S,2S >= 1)", file=out)
    if not cert.converged:
        trace = ", ".join(f"{m:.3g}" for m in cert.exceptional_mass[:10])
        print(f"error: certificate did not converge; exceptional-set masses: {trace}",
              file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_curve(args, out):
    config = ExperimentConfig(
        m=args.m, oversample=args.oversample,
        corruption_fractions=parse_grid(args.fractions),
        trials_per_point=args.trials, master_seed=args.seed,
        success_tolerance=args.tolerance, resample_A=args.resample_A,
        error_dist=args.error_dist)

    def progress(p):
        print(f"fraction {_num(p.fraction)}  success {_num(p.success_rate)}  trials {p.trials}",
              file=out, flush=True)

    curve = run_success_curve(config, progress=progress)
    print(f"breakpoint {curve.breakpoint if curve.breakpoint is None else _num(curve.breakpoint)}",
          file=out)
    if args.csv:
        emit_results(curve, args.csv, args.format)
    return EXIT_OK


def cmd_compress(args, out):
    config = CompressibleConfig(m=args.m, s=args.s, B=args.B,
                                K_grid=_index_list(args.K), trials=args.trials, seed=args.seed)
    rows = run_compressible_experiment(config)
    print("K,bp_error,oracle_error", file=out)
    for r in rows:
        print(f"{r.K},{_num(r.bp_error)},{_num(r.oracle_error)}", file=out)
    if args.csv:
        emit_results(rows, args.csv, args.format)
    return EXIT_OK if all(r.failures == 0 for r in rows) else EXIT_NUMERIC


def build_parser():
    p = _Parser(prog="l1codec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decode", help="recover a plaintext by l1 residual minimization")
    d.add_argument("--matrix", required=True, help="coding matrix A (text format)")
    d.add_argument("--received", required=True, help="received word y (vector file)")
    d.add_argument("--out", help="write the recovered plaintext here")
    d.set_defaults(func=cmd_decode)

    r = sub.add_parser("ric", help="restricted isometry / orthogonality constants")
    r.add_argument("--matrix", required=True)
    r.add_argument("--S", type=int, required=True, help="sparsity level")
    r.add_argument("--theta", type=int, nargs=2, metavar=("S1", "S2"),
                   help="also report theta_{S1,S2}")
    r.add_argument("--mode", choices=[m.value for m in RipMode], default="exact")
    r.add_argument("--csv", help="write quantity,S,Sprime,value,mode rows here")
    r.add_argument("--seed", type=int, default=0, help="seed for sampled mode")
    r.add_argument("--cap", type=int, default=ENUMERATION_CAP,
                   help="largest subset count enumerated exactly")
    r.set_defaults(func=cmd_ric)

    b = sub.add_parser("bounds", help="Gaussian recovery bounds rho_{p/m}(r)")
    b.add_argument("--ratio", type=float, required=True, help="p/m")
    b.add_argument("--r", type=float, help="evaluate rho at this S/m")
    b.add_argument("--rstar", action="store_true", help="print the root of rho = 1")
    b.add_argument("--curve", type=float, nargs=3, metavar=("RMIN", "RMAX", "NPTS"))
    b.add_argument("--csv", help="write the curve as r,rho")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("certificate", help="build and check a dual certificate")
    c.add_argument("--matrix", required=True)
    c.add_argument("--support", required=True, help="comma list of column indices")
    c.add_argument("--signs", required=True, help="comma list of + / -")
    c.add_argument("--max-iter", type=int, default=1000)
    c.add_argument("--tol", type=float, default=1e-10)
    c.set_defaults(func=cmd_certificate)

    e = sub.add_parser("experiment", help="Monte Carlo experiments")
    esub = e.add_subparsers(dest="experiment", required=True)
    cu = esub.add_parser("curve", help="success rate vs corruption fraction")
    cu.add_argument("--m", type=int, default=512)
    cu.add_argument("--oversample", type=float, default=2)
    cu.add_argument("--fractions", default="0.05:0.01:0.30", help="start:step:stop or a,b,c")
    cu.add_argument("--trials", type=int, default=100)
    cu.add_argument("--seed", type=int, default=42)
    cu.add_argument("--tolerance", type=float, default=1e-4)
    cu.add_argument("--resample-A", action="store_true", help="new coding matrix per trial")
    cu.add_argument("--error-dist", choices=ERROR_DISTS, default="gauss")
    cu.add_argument("--csv", help="output file")
    cu.add_argument("--format", choices=["csv", "gnuplot"], default="csv")
    cu.set_defaults(func=cmd_curve)
    co = esub.add_parser("compress", help="compressible signal recovery vs K")
    co.add_argument("--m", type=int, default=256)
    co.add_argument("--s", type=float, default=1.5)
    co.add_argument("--B", type=float, default=1.0)
    co.add_argument("--K", default="16,32,64,128", help="comma list of measurement counts")
    co.add_argument("--trials", type=int, default=20)
    co.add_argument("--seed", type=int, default=7)
    co.add_argument("--csv", help="output file")
    co.add_argument("--format", choices=["csv", "gnuplot"], default="csv")
    co.set_defaults(func=cmd_compress)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (L1CodecError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
