"""Command-line entry point: ``dkwlocal {kl,omega,band,simulate}``.

Exit codes: 0 ok, 2 invalid arguments, 3 I/O failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

from ._config import DEFAULT_TOL, NumericalError
from .bands import (
    EmpiricalCdf,
    band_global,
    band_lower_confidence,
    constant_band,
    interval_margin,
    local_threshold,
    plugin_range,
)
from .bounds import eps_rate
from .kl import kl_bernoulli, omega
from .verify import SimConfig, coverage_sim, martingale_mean_check, n1_exact_check

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

BAND_METHODS = {
    "massart": "massart",
    "cor2": "cor2",
    "theorem1": "theorem1_local",
    "cor1": "cor1_interval",
    "cor3": "cor3_adaptive",
}


class UsageError(ValueError):
    pass


def _fmt(x):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".15g")


def read_samples(path):
    """One number per line; an optional non-numeric header; blank lines skipped."""
    values = []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    first = True
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            if first:
                first = False
                continue
            raise UsageError(f"{path}:{lineno}: not a number: {line!r}") from None
        first = False
        if not math.isfinite(v):
            raise UsageError(f"{path}:{lineno}: value must be finite")
        values.append(v)
    if not values:
        raise UsageError(f"{path}: no data")
    return values


def _emit(text, output):
    if output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def cmd_kl(args):
    print(_fmt(kl_bernoulli(_prob(args.a, "a"), _prob(args.b, "b"))))


def _prob(x, name):
    if not (0.0 <= x <= 1.0):
        raise UsageError(f"{name} must lie in [0, 1], got {x}")
    return x


def cmd_omega(args):
    p = _prob(args.p, "p")
    if args.eps is not None:
        if args.n is not None or args.delta is not None:
            raise UsageError("give either eps or --n/--delta, not both")
        eps = args.eps
    else:
        if args.n is None or args.delta is None:
            raise UsageError("need eps or both --n and --delta")
        eps = eps_rate(args.n, args.delta)
    tol = dataclasses.replace(DEFAULT_TOL, omega_tol=args.tol) if args.tol else DEFAULT_TOL
    print(_fmt(omega(p, eps, tol)))


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--method {args.method} needs {', '.join(missing)}")


def cmd_band(args):
    method = BAND_METHODS[args.method]
    tol = dataclasses.replace(DEFAULT_TOL, omega_tol=args.tol) if args.tol else DEFAULT_TOL
    _require(args, "delta")
    if args.beta is not None and method != "cor3_adaptive":
        raise UsageError("--beta applies to --method cor3 only")
    local = method in ("theorem1_local", "cor1_interval")
    if not local and (args.pmin is not None or args.pmax is not None or args.plugin):
        raise UsageError("--pmin/--pmax/--plugin apply to theorem1 and cor1 only")

    ecdf = None
    if args.data is not None:
        ecdf = EmpiricalCdf(read_samples(args.data))
        if args.n is not None and args.n != ecdf.n:
            raise UsageError(f"--n {args.n} disagrees with {ecdf.n} samples in {args.data}")
        n = ecdf.n
    else:
        _require(args, "n")
        n = args.n

    extra = {}
    if local:
        if args.plugin is not None:
            if ecdf is None:
                raise UsageError("--plugin needs a data file")
            if args.pmin is not None or args.pmax is not None:
                raise UsageError("--plugin replaces --pmin/--pmax")
            p_min, p_max = plugin_range(ecdf, *args.plugin)
            extra = {"plugin": True, "interval": list(args.plugin)}
        else:
            _require(args, "pmin", "pmax")
            p_min, p_max = args.pmin, args.pmax
        extra.update(pmin=p_min, pmax=p_max)
        if method == "theorem1_local":
            margin = local_threshold(p_min, p_max, n, args.delta, tol)
        else:
            margin = interval_margin(p_min, p_max, n, args.delta)
    elif method == "cor3_adaptive":
        _require(args, "beta")
        margin = None
    else:
        margin = band_global(n, args.delta, method, tol)

    if method == "cor3_adaptive":
        band = band_lower_confidence(n, args.delta, args.beta)
    elif ecdf is None:
        out = {"method": method, "n": n, "delta": args.delta, **extra, "margin": margin}
        _emit(_dump(out, args.format, ["margin"]), args.output)
        return
    else:
        band = constant_band(n, margin, method, args.delta, extra)

    if args.format == "csv":
        _emit(band.to_csv(), args.output)
        return
    t = None
    if ecdf is not None:
        # knot k is reached at the k-th order statistic
        t = [None] + [float(v) for v in ecdf.samples]
    _emit(band.to_json(t=t, verbose=args.verbose), args.output)


def _dump(obj, fmt, keys):
    if fmt == "csv":
        return "\n".join(f"{k},{obj[k]!r}" for k in keys)
    return json.dumps(obj)


def cmd_simulate(args):
    if args.seed is None and args.check != "n1":
        raise UsageError("--seed is required for randomized runs")
    if args.check == "martingale":
        _require(args, "n", "lam", "t", "reps")
        est = martingale_mean_check(args.n, args.lam, args.t, args.reps, args.seed, args.workers)
        out = {
            "check": "martingale",
            "n": args.n,
            "lambda": args.lam,
            "reps": args.reps,
            "seed": args.seed,
            "estimates": [dataclasses.asdict(e) for e in est],
        }
    elif args.check == "n1":
        _require(args, "method", "delta")
        rec = n1_exact_check(BAND_METHODS[args.method], args.delta)
        out = {**dataclasses.asdict(rec), "ok": rec.ok}
    else:
        _require(args, "method", "n", "delta", "reps")
        method = BAND_METHODS[args.method]
        p_range = None
        if method in ("theorem1_local", "cor1_interval"):
            if (args.pmin is None) != (args.pmax is None):
                raise UsageError("give both --pmin and --pmax")
            if args.pmin is not None:
                p_range = (args.pmin, args.pmax)
        cfg = SimConfig(method, args.n, args.delta, args.reps, args.seed,
                        beta=args.beta, p_range=p_range)
        out = coverage_sim(cfg, workers=args.workers).to_dict(timing=args.timing)
    _emit(json.dumps(out), args.output)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dkwlocal",
        description="Local and global one-sided confidence bounds for empirical CDFs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kl", help="Bernoulli KL divergence kl(a || b)")
    p.add_argument("a", type=float)
    p.add_argument("b", type=float)
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("omega", help="deviation modulus omega(p, eps)")
    p.add_argument("p", type=float)
    p.add_argument("eps", type=float, nargs="?")
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--tol", type=float, help="bisection tolerance (default 1e-12)")
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("band", help="lower confidence band or margin")
    p.add_argument("data", nargs="?", help="CSV with one value per line")
    p.add_argument("--method", required=True, choices=sorted(BAND_METHODS))
    p.add_argument("--n", type=int, help="sample size when no data file is given")
    p.add_argument("--delta", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--pmin", type=float, help="inf of F over the interval")
    p.add_argument("--pmax", type=float, help="sup of F over the interval")
    p.add_argument("--plugin", type=float, nargs=2, metavar=("LO", "HI"),
                   help="estimate the range of F on [LO, HI] from the data (heuristic)")
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--verbose", action="store_true", help="include unclamped knots")
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("simulate", help="Monte Carlo and exact coverage checks")
    p.add_argument("--check", choices=("coverage", "martingale", "n1"), default="coverage")
    p.add_argument("--method", choices=sorted(BAND_METHODS))
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--pmin", type=float)
    p.add_argument("--pmax", type=float)
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--t", type=float, action="append", help="F(t) value; repeatable")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="add wall_time to the report")
    p.add_argument("--output")
    p.add_argument("--format", choices=("json",), default="json")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"dkwlocal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"dkwlocal: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"dkwlocal: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
