"""Command-line front end.

Subcommands: primes, rho, xi, alpha, psi, compare, oscillate.  Scalar
queries print a single value; row-producing commands emit CSV (default)
or JSON.  JSON output is one object {"meta": {...}, "rows": [...]} where
meta echoes the resolved configuration.  Identical invocations produce
byte-identical output: no randomness, no timestamps, repr-stable floats.

Exit codes: 0 success, 2 usage, 3 domain/range error, 4 resource cap.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from decimal import Decimal, InvalidOperation

from . import __version__
from .dickman import default_grid, export_grid_csv, rho, xi
from .errors import DomainError, ResourceError
from .prime_tables import save_prime_cache, sieve_primes
from .psi_exact import psi_buchstab, psi_enumerate, psi_sieve
from .saddle import solve_alpha
from .theorem import (
    largest_feasible_log_x,
    oscillation_scan,
    regime_record,
    write_oscillation_csv,
    write_regime_csv,
)


def _parse_x(text: str) -> int:
    """x as a decimal integer or scientific literal (1e18), exactly."""
    try:
        d = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    n = int(d)
    if n != d or n < 1:
        raise argparse.ArgumentTypeError(f"x must be a positive integer, got {text!r}")
    return n


def _x_form(text: str) -> str:
    return "scientific" if "e" in text.lower() else "decimal"


def _clean(v):
    # JSON has no NaN/inf; emit null and let readers treat it as absent
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _emit_json(meta: dict, rows: list, fh) -> None:
    doc = {"meta": {"version": __version__, "config": meta},
           "rows": [{k: _clean(v) for k, v in row.items()} for row in rows]}
    json.dump(doc, fh, indent=2)
    fh.write("\n")


def _emit_rows(args, meta: dict, rows: list, csv_writer, fh) -> None:
    if args.format == "json":
        _emit_json(meta, rows, fh)
    else:
        csv_writer(fh)


def _open_out(args):
    if args.output:
        return open(args.output, "w")
    return None


def _table_for(y: float, max_sieve: float):
    limit = max(int(math.ceil(y)), 3)
    if limit > max_sieve:
        raise ResourceError(
            f"prime table to {limit} exceeds --max-sieve {max_sieve:.3g}")
    return sieve_primes(limit)


# --- subcommand bodies --------------------------------------------------------------


def _run_primes(args, fh) -> None:
    table = _table_for(float(args.limit), args.max_sieve)
    if args.cache is not None:
        save_prime_cache(table, args.cache)
    meta = {"subcommand": "primes", "limit": args.limit, "format": args.format}
    if args.format == "plain":
        fh.write(f"{len(table.primes)}\n")
        return
    rows = [{"p": int(p), "log_p": float(lp)}
            for p, lp in zip(table.primes, table.log_primes)]

    def as_csv(out):
        out.write("p,log_p\n")
        for r in rows:
            out.write(f"{r['p']},{r['log_p']:.17g}\n")

    _emit_rows(args, meta, rows, as_csv, fh)


def _run_rho(args, fh) -> None:
    if args.export_grid is not None:
        grid = default_grid()
        if args.export_grid == "-":
            export_grid_csv(grid, fh)
        else:
            with open(args.export_grid, "w") as out:
                export_grid_csv(grid, out)
        return
    if args.u is None:
        raise DomainError("rho needs --u or --export-grid")
    lr = rho(args.u)
    value = lr if args.log else math.exp(lr)
    meta = {"subcommand": "rho", "u": args.u, "log": args.log, "format": args.format}
    rows = [{"u": args.u, "log_rho": lr, "rho": math.exp(lr)}]

    def as_csv(out):
        out.write("u,log_rho,rho\n")
        out.write(f"{args.u:.17g},{lr:.17g},{math.exp(lr):.17g}\n")

    if args.format == "plain":
        fh.write(f"{value!r}\n")
    else:
        _emit_rows(args, meta, rows, as_csv, fh)


def _run_xi(args, fh) -> None:
    xv = xi(args.u)
    meta = {"subcommand": "xi", "u": args.u, "format": args.format}
    rows = [asdict(xv)]

    def as_csv(out):
        out.write("u,xi,residual\n")
        out.write(f"{xv.u:.17g},{xv.xi:.17g},{xv.residual:.17g}\n")

    if args.format == "plain":
        fh.write(f"{xv.xi!r}\n")
    else:
        _emit_rows(args, meta, rows, as_csv, fh)


def _resolve_x(args) -> tuple:
    # returns (log_x, x_exact or None, form)
    if args.log_x is not None and args.x is not None:
        raise DomainError("give either --x or --log-x, not both")
    if args.log_x is not None:
        return args.log_x, None, "log"
    if args.x is None:
        raise DomainError("an x is required: --x or --log-x")
    return math.log(args.x), args.x, _x_form(args.x_raw)


def _run_alpha(args, fh) -> None:
    log_x, _, form = _resolve_x(args)
    table = _table_for(args.y, args.max_sieve)
    state = solve_alpha(log_x, table, args.y)
    meta = {"subcommand": "alpha", "x_form": form, "log_x": log_x,
            "y": args.y, "format": args.format}
    rows = [asdict(state)]

    def as_csv(out):
        out.write("log_x,y,u,c,alpha,beta,solver_residual\n")
        out.write(f"{state.log_x:.17g},{state.y:.17g},{state.u:.17g},{state.c:.17g},"
                  f"{state.alpha:.17g},{state.beta:.17g},{state.solver_residual:.17g}\n")

    if args.format == "plain":
        fh.write(f"{state.alpha!r}\n")
    else:
        _emit_rows(args, meta, rows, as_csv, fh)


def _run_psi(args, fh) -> None:
    log_x, x_exact, form = _resolve_x(args)
    if args.y < 2.0:
        raise DomainError(f"psi needs y >= 2, got y={args.y}")
    # primes above x never enter a factorization of n <= x, so the table
    # (and the y handed to the methods) can stop at x
    y_eff = min(args.y, math.floor(math.exp(log_x)) + 1.0)
    table = None
    if args.method in ("enum", "buchstab", "all"):
        table = _table_for(y_eff, args.max_sieve)

    results = []
    if args.method in ("enum", "all"):
        results.append(psi_enumerate(log_x, table, y_eff, x_exact=x_exact,
                                     max_count=args.max_count))
    if args.method in ("sieve", "all"):
        if x_exact is None:
            raise DomainError("method sieve needs an exact --x, not --log-x")
        results.append(psi_sieve(x_exact, y_eff, max_x=args.max_sieve))
    if args.method in ("buchstab", "all"):
        if x_exact is None:
            raise DomainError("method buchstab needs an exact --x, not --log-x")
        results.append(psi_buchstab(x_exact, table, y_eff))
    counts = {r.count for r in results}
    if len(counts) != 1:
        raise AssertionError(f"methods disagree: { {r.method: r.count for r in results} }")

    meta = {"subcommand": "psi", "x_form": form, "log_x": log_x, "y": args.y,
            "method": args.method, "max_count": args.max_count,
            "max_sieve": args.max_sieve, "format": args.format}
    rows = [asdict(r) for r in results]

    def as_csv(out):
        out.write("log_x,y,count,method,boundary_ambiguous\n")
        for r in results:
            out.write(f"{r.log_x:.17g},{r.y:.17g},{r.count},{r.method},"
                      f"{r.boundary_ambiguous}\n")

    if args.format == "plain":
        fh.write(f"{counts.pop()}\n")
    else:
        _emit_rows(args, meta, rows, as_csv, fh)


def _run_compare(args, fh) -> None:
    log_xs = [(math.log(n), n, form) for n, form in args.x_parsed]
    log_xs += [(lx, None, "log") for lx in (args.log_x or [])]
    max_y = max((lx ** args.c for lx, _, _ in log_xs), default=0.0)

    if not log_xs:
        # no x given: take the largest one the caps admit at this c
        probe = sieve_primes(10**6)
        lx = largest_feasible_log_x(args.c, probe, max_count=args.max_count)
        log_xs = [(lx, None, "auto")]
        max_y = lx ** args.c

    table = _table_for(max(max_y, 3.0), args.max_sieve)
    records = [regime_record(lx, args.c, table, x_exact=n, max_count=args.max_count)
               for lx, n, _ in log_xs]
    meta = {"subcommand": "compare", "c": args.c,
            "x_forms": [form for _, _, form in log_xs],
            "log_x": [lx for lx, _, _ in log_xs],
            "max_count": args.max_count, "format": args.format}
    rows = [asdict(r) for r in records]
    _emit_rows(args, meta, rows, lambda out: write_regime_csv(records, out), fh)


def _run_oscillate(args, fh) -> None:
    if args.y_steps < 1:
        raise DomainError(f"need at least one step, got {args.y_steps}")
    if args.y_max < args.y_min:
        raise DomainError(f"y-max {args.y_max} below y-min {args.y_min}")
    if args.y_steps == 1:
        ys = [args.y_min]
    else:
        # geometric grid; endpoint pinned so float drift cannot push past y_max
        ratio = (args.y_max / args.y_min) ** (1.0 / (args.y_steps - 1))
        ys = [min(args.y_min * ratio ** i, args.y_max)
              for i in range(args.y_steps - 1)]
        ys.append(args.y_max)
    table = _table_for(args.y_max, args.max_sieve)
    records = oscillation_scan(args.c, ys, table, jobs=args.jobs)
    meta = {"subcommand": "oscillate", "c": args.c, "y_min": args.y_min,
            "y_max": args.y_max, "y_steps": args.y_steps, "jobs": args.jobs,
            "format": args.format}
    rows = [asdict(r) for r in records]
    _emit_rows(args, meta, rows, lambda out: write_oscillation_csv(records, out), fh)


# --- parser and dispatch ------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="friabilis",
                                description="Friable-integer counts and their asymptotics.")
    p.add_argument("--version", action="version", version=f"friabilis {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp, default_format="plain"):
        sp.add_argument("--format", choices=("plain", "csv", "json"),
                        default=default_format)
        sp.add_argument("--output", default=None, metavar="PATH")
        sp.add_argument("--max-sieve", type=float, default=1e8,
                        help="largest prime table / sieve bound (default 1e8)")

    def x_args(sp):
        sp.add_argument("--x", type=str, default=None,
                        help="x as decimal or scientific (1e18)")
        sp.add_argument("--log-x", type=float, default=None,
                        help="log x, for x too large to write out")

    sp = sub.add_parser("primes", help="prime table up to a limit")
    sp.add_argument("--limit", type=int, required=True)
    sp.add_argument("--cache", default=None, metavar="PATH",
                    help="also write the binary prime cache here")
    common(sp)

    sp = sub.add_parser("rho", help="Dickman rho at u")
    sp.add_argument("--u", type=float, default=None)
    sp.add_argument("--log", action="store_true", help="print log rho instead")
    sp.add_argument("--export-grid", default=None, metavar="PATH",
                    help="write the rho grid as CSV (- for stdout)")
    common(sp)

    sp = sub.add_parser("xi", help="xi(u): the nonzero root of e^xi = 1 + u xi")
    sp.add_argument("--u", type=float, required=True)
    common(sp)

    sp = sub.add_parser("alpha", help="saddle point alpha(x, y)")
    x_args(sp)
    sp.add_argument("--y", type=float, required=True)
    common(sp)

    sp = sub.add_parser("psi", help="exact count of y-friable n <= x")
    x_args(sp)
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--method", choices=("enum", "sieve", "buchstab", "all"),
                    default="enum")
    sp.add_argument("--max-count", type=float, default=1e8)
    common(sp)

    sp = sub.add_parser("compare", help="regime records: measured vs predicted gap")
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--x", type=str, action="append",
                    help="x value, repeatable; omit to auto-select the largest feasible")
    sp.add_argument("--log-x", type=float, action="append")
    sp.add_argument("--max-count", type=float, default=1e8)
    common(sp, default_format="csv")

    sp = sub.add_parser("oscillate", help="oscillation scan over a y grid")
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--y-min", type=float, required=True)
    sp.add_argument("--y-max", type=float, required=True)
    sp.add_argument("--y-steps", type=int, required=True)
    sp.add_argument("--jobs", type=int, default=1)
    common(sp, default_format="csv")

    return p


_BODIES = {
    "primes": _run_primes,
    "rho": _run_rho,
    "xi": _run_xi,
    "alpha": _run_alpha,
    "psi": _run_psi,
    "compare": _run_compare,
    "oscillate": _run_oscillate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand in ("psi", "alpha") and args.x is not None:
            args.x_raw = args.x
            args.x = _parse_x(args.x)
        elif args.subcommand == "compare":
            args.x_parsed = [(_parse_x(t), _x_form(t)) for t in (args.x or [])]
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))  # exits 2, matching argparse usage errors

    out = None
    try:
        out = _open_out(args)
        _BODIES[args.subcommand](args, out or sys.stdout)
        return 0
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 4
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not our error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    finally:
        if out is not None:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
