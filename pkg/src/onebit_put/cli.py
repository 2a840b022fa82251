"""Command-line front end: PUT tables, scheme dumps, simulations and the check suite.

Exit codes: 0 success, 1 verification or simulation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction

from .bounds import put, put_ldp, put_ml, zeta
from .errors import ConstructionError, DesignError, DomainError, ResourceError
from .export import export_scheme, scheme_descriptor
from .mechanisms import PrivacyConstraint
from .schemes import build_optimal_sr_scheme, select_case
from .sim import SimConfig, mc_mse
from .verify import GRIDS, run_checks

GRID_TOL = 1e-12
DIGITS = 12
TABLE_HEADER = ("v", "eps", "delta", "gamma", "zeta", "put")


class UsageError(Exception):
    pass


def parse_number(token: str) -> float:
    """A float, ``p/q``, or ``logX`` meaning the natural log of ``X`` (``log2`` = log 2)."""
    token = token.strip()
    if token.lower().startswith("log"):
        arg = token[3:].strip("()")
        try:
            return math.log(float(Fraction(arg)))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"cannot parse {token!r}") from None
    try:
        return float(Fraction(token))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse number {token!r}") from None


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (``stop`` included up to 1e-12) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (parse_number(p) for p in parts)
        if not step > 0 or stop < start:
            raise UsageError(f"grid {text!r} needs step > 0 and stop >= start")
        # index arithmetic avoids accumulating rounding error in the sweep
        count = math.floor((stop - start) / step + GRID_TOL) + 1
        values = [start + i * step for i in range(count)]
        return [x for x in values if x <= stop + GRID_TOL]
    values = [parse_number(tok) for tok in text.split(",") if tok.strip()]
    if not values:
        raise UsageError("empty value list")
    return values


def parse_ints(text: str) -> list[int]:
    out = []
    for x in parse_grid(text):
        if x != int(x) or x < 2:
            raise UsageError(f"v must be an integer >= 2, got {x:g}")
        out.append(int(x))
    return out


def fmt(x) -> str:
    return "" if x is None else f"{float(x):.{DIGITS}g}"


def _add_constraint_flags(p: argparse.ArgumentParser, grids: bool) -> None:
    kind = p.add_mutually_exclusive_group(required=True)
    kind.add_argument("--ldp", action="store_true", help="(eps, delta)-local differential privacy")
    kind.add_argument("--ml", action="store_true", help="gamma maximal leakage")
    many = " (list a,b,c or grid start:stop:step)" if grids else ""
    p.add_argument("--v", required=True, help="alphabet size" + many)
    p.add_argument("--eps", help="LDP epsilon" + many)
    p.add_argument("--delta", default=None, help="LDP delta in [0, 1]" + many + "; default 0")
    p.add_argument("--gamma", help="ML gamma in (0, log 2]; accepts log2" + many)


def _check_constraint_flags(args) -> None:
    if args.ldp:
        if args.eps is None:
            raise UsageError("--ldp needs --eps")
        if args.gamma is not None:
            raise UsageError("--gamma conflicts with --ldp")
    else:
        if args.gamma is None:
            raise UsageError("--ml needs --gamma")
        if args.eps is not None or args.delta is not None:
            raise UsageError("--eps/--delta conflict with --ml")


def _single_constraint(args) -> tuple[int, PrivacyConstraint]:
    _check_constraint_flags(args)
    vs = parse_ints(args.v)
    if len(vs) != 1:
        raise UsageError("--v takes a single value here")
    try:
        if args.ldp:
            c = PrivacyConstraint.ldp(parse_number(args.eps), Fraction(parse_number(args.delta or "0")))
        else:
            c = PrivacyConstraint.ml(parse_number(args.gamma))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    return vs[0], c


def cmd_table(args, out) -> int:
    _check_constraint_flags(args)
    vs = parse_ints(args.v)
    w = csv.writer(out, lineterminator="\n")
    rows = []
    try:
        if args.ldp:
            eps_list = parse_grid(args.eps)
            delta_list = parse_grid(args.delta or "0")
            for v in vs:
                for eps in eps_list:
                    for delta in delta_list:
                        rows.append((v, fmt(eps), fmt(delta), "", fmt(zeta(v, delta)), fmt(put_ldp(v, eps, delta))))
        else:
            gammas = parse_grid(args.gamma)
            for v in vs:
                for gamma in gammas:
                    rows.append((v, "", "", fmt(gamma), "", fmt(put_ml(v, gamma))))
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    w.writerow(TABLE_HEADER)
    w.writerows(rows)
    return 0


def parse_theta(text: str, v: int) -> tuple[float, ...]:
    """``uniform``, ``vertex:x`` (1-based) or an explicit comma-separated probability vector."""
    if text == "uniform":
        return tuple([1.0 / v] * v)
    if text.startswith("vertex:"):
        try:
            x = int(text.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad vertex value {text!r}") from None
        if not 1 <= x <= v:
            raise UsageError(f"vertex must lie in 1..{v}")
        return tuple(float(i == x - 1) for i in range(v))
    try:
        vals = [Fraction(tok.strip()) for tok in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse theta {text!r}") from None
    if len(vals) != v or any(q < 0 for q in vals) or abs(sum(vals) - 1) > 1e-12:
        raise UsageError(f"theta must be {v} non-negative numbers summing to 1")
    return tuple(float(q) for q in vals)


def _build(v, c, max_edges):
    try:
        return build_optimal_sr_scheme(c, v, max_edges=max_edges)
    except (ConstructionError, DesignError, ResourceError, DomainError) as exc:
        case = select_case(c, v)
        print(f"error: building the {case} scheme for v={v}, {c} failed: {exc}", file=sys.stderr)
        return None


def cmd_simulate(args, out) -> int:
    v, c = _single_constraint(args)
    theta = parse_theta(args.theta, v)
    s = _build(v, c, args.max_edges)
    if s is None:
        return 1
    if args.trials < 2:
        raise UsageError("--trials must be at least 2 for a standard error")
    if args.mode == "plain" and args.n <= s.u_count:
        raise UsageError(f"n must exceed C for the plain scheme: n={args.n}, C={s.u_count}")
    try:
        cfg = SimConfig(
            s, theta, args.n, args.trials, args.seed, args.mode,
            keep_trials=bool(args.per_trial_csv), project=args.project_simplex,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    threads = args.threads or os.cpu_count() or 1
    rep = mc_mse(cfg, threads=threads)
    ref = put(v, c)
    rep.extra = {"put_reference": ref, "ratio": rep.mean_n_mse / ref}

    if args.per_trial_csv:
        with open(args.per_trial_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("trial", "mse", "n_mse"))
            for i, m in enumerate(rep.per_trial):
                w.writerow((i, fmt(m), fmt(m * cfg.n)))
        rep.per_trial = None

    text = rep.to_json() + "\n"
    summary = (
        f"mean n*MSE {rep.mean_n_mse:.6g} +- {rep.stderr_n_mse:.3g} (stderr); "
        f"PUT {ref:.6g}; ratio {rep.mean_n_mse / ref:.6g} +- {rep.stderr_n_mse / ref:.3g}"
    )
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        print(summary, file=out)
    else:
        out.write(text)
        print(summary, file=sys.stderr)
    return 0


def cmd_scheme(args, out) -> int:
    v, c = _single_constraint(args)
    s = _build(v, c, args.max_edges)
    if s is None:
        return 1
    if args.action == "export":
        if not args.dir:
            raise UsageError("scheme export needs --dir")
        for p in export_scheme(s, args.dir):
            print(p, file=out)
    else:
        out.write(json.dumps(scheme_descriptor(s), indent=2) + "\n")
    return 0


def cmd_verify(args, out) -> int:
    def show(check):
        print(check.line(), file=out, flush=True)

    results = run_checks(
        args.grid, example1=args.example1, mc=args.mc, threads=args.threads, progress=show
    )
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed", file=out)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit-put",
        description="Privacy-utility trade-off of one-bit distribution estimation under LDP or maximal leakage.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table", help="CSV of the PUT over a parameter grid")
    _add_constraint_flags(p, grids=True)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("simulate", help="Monte Carlo n*MSE of the optimal scheme")
    _add_constraint_flags(p, grids=False)
    p.add_argument("--n", type=int, required=True, help="clients per trial")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--mode", choices=("sr", "plain"), default="sr")
    p.add_argument("--theta", default="uniform", help="uniform, vertex:x (1-based) or p1,p2,...")
    p.add_argument("--output", help="write the JSON report here instead of standard output")
    p.add_argument("--per-trial-csv", help="write trial,mse,n_mse rows here")
    p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
    p.add_argument("--project-simplex", action="store_true", help="project estimates onto the simplex")
    p.add_argument("--max-edges", type=int, default=200_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scheme", help="show or export the optimal scheme")
    p.add_argument("action", choices=("show", "export"))
    _add_constraint_flags(p, grids=False)
    p.add_argument("--dir", help="output directory for export")
    p.add_argument("--max-edges", type=int, default=200_000)
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("verify", help="run the invariant checks")
    p.add_argument("--grid", choices=tuple(GRIDS), default="small")
    p.add_argument("--example1", action="store_true", help="also rebuild the (4,2) design example")
    p.add_argument("--mc", action="store_true", help="also run Monte Carlo agreement checks")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2


def main_exit() -> None:
    sys.exit(main())
