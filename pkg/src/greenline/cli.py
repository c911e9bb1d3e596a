"""Command-line entry point: ``greenline <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from .archimedean import BudgetExceeded, preimage_measure
from .berkdyn import DescentFailure, InexactBranch, detect_reduction, map_point
from .berkovich import format_point, parse_point
from .fields import make_field
from .harness import (
    dumps_report,
    emit_green_grid,
    load_config,
    run_characterize,
    run_optimal_counterexample,
)
from .lifts import RationalMap, RootFindingError, green_offset, res_f


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _exact_map(text: str, prime: int | None):
    """Parse with exact rational scalars when possible.

    Any prime works for exact arithmetic; ``prime`` only decides which
    absolute value gets reported.
    """
    try:
        return RationalMap.parse(text, make_field(prime or 2))
    except (TypeError, ValueError):
        return None


def cmd_resultant(args) -> int:
    exact = _exact_map(args.map, args.p)
    report = {"map": None, "degree": None}
    if exact is not None:
        F = exact.lift
        report.update(map=exact.describe(), degree=exact.d, resultant=res_f(F),
                      lift={"F0": [str(c) for c in F.F0.coeffs], "F1": [str(c) for c in F.F1.coeffs]})
        if args.p:
            report["valuation"] = str(-exact.field.abs(res_f(F)).log_p())
            if exact.d > 1:
                report["V_gF_log_p"] = green_offset(F)
    if not args.p:
        f = RationalMap.parse(args.map, make_field("complex"))
        report.update(map=f.describe(), degree=f.d)
        R = complex(res_f(f.lift))
        report["abs_resultant"] = abs(R)
        if exact is None:
            report["resultant"] = R
        if f.d > 1:
            report["V_gF"] = green_offset(f.lift)
    _emit(dumps_report(report), None)
    return 0


def _parse_window(vals):
    return tuple(float(v) for v in vals)


def cmd_green(args) -> int:
    f = RationalMap.parse(args.map, make_field("complex"))
    grid = emit_green_grid(f, _parse_window(args.grid), args.res, args.out, eps=args.eps)
    print(f"wrote {args.out}.csv and {args.out}.pgm ({grid.shape[0]}x{grid.shape[1]}, "
          f"min {grid.min():.6g}, max {grid.max():.6g})")
    return 0


def cmd_measure(args) -> int:
    f = RationalMap.parse(args.map, make_field("complex"))
    seed = complex(args.seed_point) if args.seed_point is not None else None
    mu = preimage_measure(f, seed, args.depth, max_atoms=args.max_atoms, rng_seed=args.seed)
    if args.out:
        np.savetxt(args.out, np.column_stack([mu.points.real, mu.points.imag, mu.masses]),
                   header="re,im,mass", delimiter=",", fmt="%.17g")
    fin = np.isfinite(mu.points.real)
    summary = {
        "map": f.describe(),
        "depth": args.depth,
        "atoms": len(mu),
        "mass_at_infinity": float(mu.masses[~fin].sum()),
        "max_modulus": float(np.abs(mu.points[fin]).max()) if fin.any() else None,
        "barycenter": complex(mu.points[fin] @ mu.masses[fin]) if fin.any() else None,
    }
    _emit(dumps_report(summary), None)
    return 0


def cmd_berk_image(args) -> int:
    field_ = make_field(args.p)
    f = RationalMap.parse(args.map, field_)
    S = parse_point(args.point, args.p)
    mp = map_point(f, S, search_depth=args.depth)
    out = {"map": f.describe(), "point": format_point(S), "image": format_point(mp.image),
           "local_degree": mp.local_degree, "method": mp.method}
    _emit(dumps_report(out), None)
    return 0


def cmd_berk_reduce(args) -> int:
    f = RationalMap.parse(args.map, make_field(args.p))
    verdict = detect_reduction(f, search_depth=args.depth)
    _emit(dumps_report({"map": f.describe(), "p": args.p, **verdict.as_dict()}), None)
    return 0


def cmd_characterize(args) -> int:
    cfg = load_config(args.config)
    _emit(dumps_report(run_characterize(cfg)), args.out)
    return 0


def cmd_counterexample(args) -> int:
    report = run_optimal_counterexample(args.p, args.d, Fraction(args.c), Fraction(args.z0),
                                        search_depth=args.depth)
    _emit(dumps_report(report), args.out)
    return 0 if report.get("verdict") == "all-checks-pass" else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="greenline",
                                 description="Dynamical Green functions, equilibrium measures and "
                                             "Berkovich-line dynamics of rational maps.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("resultant", help="homogeneous resultant and energy offset of a map")
    sp.add_argument("map")
    sp.add_argument("-p", type=int, default=None, help="report the p-adic absolute value")
    sp.set_defaults(func=cmd_resultant)

    sp = sub.add_parser("green", help="Green function grid as CSV and PGM")
    sp.add_argument("map")
    sp.add_argument("--grid", nargs=4, metavar=("X0", "X1", "Y0", "Y1"), default=("-2", "2", "-2", "2"))
    sp.add_argument("--res", type=int, default=64)
    sp.add_argument("--eps", type=float, default=1e-12)
    sp.add_argument("--out", default="green", help="output prefix")
    sp.set_defaults(func=cmd_green)

    sp = sub.add_parser("measure", help="iterated preimage measure")
    sp.add_argument("map")
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--max-atoms", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0, help="PRNG seed for subsampling")
    sp.add_argument("--seed-point", default=None, help="starting point (default: a repelling preimage)")
    sp.add_argument("--out", default=None, help="write atoms as CSV")
    sp.set_defaults(func=cmd_measure)

    sp = sub.add_parser("berk", help="Berkovich-line dynamics over Q_p")
    bsub = sp.add_subparsers(dest="berk_command", required=True)
    bp = bsub.add_parser("image", help="image of a Berkovich point")
    bp.add_argument("map")
    bp.add_argument("point", help="inf, gauss, a rational, or zeta(a, r)")
    bp.add_argument("-p", type=int, required=True)
    bp.add_argument("--depth", type=int, default=64, help="descent budget")
    bp.set_defaults(func=cmd_berk_image)
    bp = bsub.add_parser("reduce", help="search for (potentially) good reduction")
    bp.add_argument("map")
    bp.add_argument("-p", type=int, required=True)
    bp.add_argument("--depth", type=int, default=10)
    bp.set_defaults(func=cmd_berk_reduce)

    sp = sub.add_parser("characterize", help="run a characterization experiment from a config file")
    sp.add_argument("config")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_characterize)

    sp = sub.add_parser("counterexample", help="conjugated z^d + c counterexample with exact checks")
    sp.add_argument("-p", type=int, required=True)
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-c", required=True, help="rational constant, e.g. 1/3")
    sp.add_argument("--z0", required=True, help="rational conjugation point")
    sp.add_argument("--depth", type=int, default=10)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_counterexample)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ZeroDivisionError, BudgetExceeded, RootFindingError,
            DescentFailure, InexactBranch, OSError) as exc:
        print(f"greenline: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
