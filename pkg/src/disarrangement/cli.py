"""Command line front end: ``disarrangement-kit <subcommand> ...``.

Results go to stdout (or ``--output``) as JSON or CSV; diagnostics go to
stderr. Exit codes: 0 ok, 1 internal or ``--check`` failure, 2 unreadable
input, 3 symmetry or trace violation, 4 dimension mismatch, 5 unsupported
dimension, 6 inconsistent jump declaration, 7 geometry outside the grid.
"""

import argparse
import csv
import sys
from io import StringIO

import numpy as np

from . import io
from .burgers import burgers_report
from .densities import (
    directional_bulk_integral,
    disarrangement_report,
    relaxed_bulk,
    relaxed_bulk_directional,
    rowmax_bulk_integral,
)
from .errors import ConvergenceError, DisarrangementError, ParseError
from .frames import isotropic_frame, minimizing_rotation
from .oracle import infimum_probe, rotation_grid_search_2d, rotation_random_search
from .tilted import convergence_study

CSV_HEADER = "# disarrangement-kit v1"
TILT_COLUMNS = ("n", "m", "energy", "target", "boundary_bound", "interior_excess_bound", "frame_bound")
IDENTITY_TOL = 1e-12


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("list entries must be positive")
    return vals


def _flat_rows(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flat_rows(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        for i, v in enumerate(obj):
            yield from _flat_rows(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _csv(rows, columns):
    buf = StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def _render(result, fmt, table=None):
    if fmt == "json":
        return io.dumps(result) + "\n"
    if table is not None:
        return _csv(*table)
    return _csv([(k, v) for k, v in _flat_rows(io._plain(result))], ("key", "value"))


# ---------------------------------------------------------------- commands


def cmd_frame(args):
    M = io.load_matrix(args.matrix)
    if args.minimizing:
        rot = minimizing_rotation(M)
        Mh = 0.5 * (M + M.T)
        shifted = Mh - np.trace(Mh) / len(M) * np.eye(len(M))
        V = rot.R
        residuals = np.einsum("ji,jk,ki->i", V, shifted, V)
        out = {"vectors": V.T, "residuals": residuals, "per_term": rot.per_term, "objective": rot.objective}
    else:
        frame = isotropic_frame(M)
        V = frame.vectors
        out = {"vectors": V.T, "residuals": frame.residuals, "per_term": frame.residuals}
    out["orthogonality_error"] = float(np.max(np.abs(V.T @ V - np.eye(len(V)))))
    return out, None


def cmd_relax(args):
    A = io.load_matrix(args.A)
    B = io.load_matrix(args.B)
    if args.direction is not None:
        a = io.parse_vector(args.direction)
        return {"directional": relaxed_bulk_directional(A, B, a)}, None
    variants = ("abs", "plus", "minus") if args.variant == "all" else (args.variant,)
    return {v: relaxed_bulk(A, B, v) for v in variants}, None


def cmd_tilt(args):
    M = io.load_matrix(args.matrix)
    a = io.parse_vector(args.direction) if args.direction is not None else None
    if args.mode == "directional" and a is None:
        raise ParseError("--mode directional needs --direction")
    rows = convergence_study(M, args.n, args.m, mode=args.mode, a=a, C=args.cn)
    if args.check:
        bad = [r for r in rows if not r.sandwich_holds()]
        for r in bad:
            print(f"sandwich violated at n={r.n}, m={r.m}: excess {r.excess:.6e} "
                  f"not in [0, {r.total_bound:.6e}]", file=sys.stderr)
        args.check_failed = bool(bad)
    table = ([[getattr(r, c) for c in TILT_COLUMNS] for r in rows], TILT_COLUMNS)
    result = [
        {c: getattr(r, c) for c in TILT_COLUMNS}
        | {"interior_volume": r.interior_volume, "excess": r.excess, "sandwich_holds": r.sandwich_holds()}
        for r in rows
    ]
    return result, table


def cmd_sweep(args):
    mesh = io.parse_mesh(io.load_json(args.mesh))
    region = None if args.region is None else [int(x) for x in args.region.split(",")]
    rep = disarrangement_report(mesh, region)
    res = rep.identity_residuals()
    out = {
        "bulk_abs": rep.bulk_abs,
        "bulk_plus": rep.bulk_plus,
        "bulk_minus": rep.bulk_minus,
        "interfacial_abs": rep.interfacial_abs,
        "interfacial_plus": rep.interfacial_plus,
        "interfacial_minus": rep.interfacial_minus,
        "V_abs": rep.V_abs,
        "V_plus": rep.V_plus,
        "V_minus": rep.V_minus,
        "trace_bulk": rep.trace_bulk,
        "trace_interfacial": rep.trace_interfacial,
        "trace_total": rep.trace_total,
        "rowmax_bulk": rowmax_bulk_integral(mesh, region),
        "identity_residuals": res,
        "identities_hold": all(v <= IDENTITY_TOL for v in res.values()),
    }
    if args.variant != "all":
        out["volume_swept"] = {"abs": rep.V_abs, "plus": rep.V_plus, "minus": rep.V_minus}[args.variant]
    if args.direction is not None:
        out["directional_bulk"] = directional_bulk_integral(mesh, io.parse_vector(args.direction), region)
    if args.check and not out["identities_hold"]:
        print(f"report identities fail: {res}", file=sys.stderr)
        args.check_failed = True
    return out, None


def cmd_burgers(args):
    field, loops, surfaces = io.parse_field(io.load_json(args.field))
    loop = io.pick(loops, args.loop, "loop")
    surface = io.pick(surfaces, args.loop if args.surface is None else args.surface, "surface")
    out = burgers_report(field, loop, surface, flip=args.flip)
    if args.check and out["residual"] > args.tolerance:
        print(f"Stokes residual {out['residual']:.3e} exceeds {args.tolerance:g}", file=sys.stderr)
        args.check_failed = True
    return out, None


def cmd_oracle(args):
    M = io.load_matrix(args.matrix)
    if args.method == "grid":
        rep = rotation_grid_search_2d(M, args.resolution, refine=not args.no_refine)
    elif args.method == "random":
        rep = rotation_random_search(M, args.trials, seed=args.seed, refine=not args.no_refine)
    else:
        rep = infimum_probe(M, args.n, args.m, C=args.cn)
    out = rep.to_dict() | {"target": abs(float(np.trace(M)))}
    return out, None


# ------------------------------------------------------------------ parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--check", action="store_true", help="exit 1 if the result fails its self-checks")
    common.add_argument("--cn", type=_positive_float, default=1.0, help="frame constant C(N)")

    p = argparse.ArgumentParser(prog="disarrangement-kit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("frame", parents=[common], help="isotropic frame of a traceless symmetric matrix")
    s.add_argument("matrix")
    s.add_argument("--minimizing", action="store_true", help="minimizing rotation of a general matrix instead")
    s.set_defaults(func=cmd_frame)

    s = sub.add_parser("relax", parents=[common], help="relaxed bulk density of (A, B)")
    s.add_argument("A")
    s.add_argument("B")
    s.add_argument("--variant", choices=("abs", "plus", "minus", "all"), default="all")
    s.add_argument("--direction", help="comma-separated a for |(B - A)^T a|")
    s.set_defaults(func=cmd_relax)

    s = sub.add_parser("tilt", parents=[common], help="tilted-cube convergence table")
    s.add_argument("matrix")
    s.add_argument("--n", type=_int_list, required=True, help="comma-separated n values")
    s.add_argument("--m", type=_int_list, required=True, help="comma-separated m values")
    s.add_argument("--mode", choices=("normal", "directional"), default="normal")
    s.add_argument("--direction", help="comma-separated a for directional mode")
    s.set_defaults(func=cmd_tilt, default_format="csv")

    s = sub.add_parser("sweep", parents=[common], help="volumes swept out over a mesh region")
    s.add_argument("mesh")
    s.add_argument("--region", help="comma-separated cell ids (default: all cells)")
    s.add_argument("--variant", choices=("abs", "plus", "minus", "all"), default="all")
    s.add_argument("--direction", help="also report the directional bulk integral for this a")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("burgers", parents=[common], help="Burgers vector and Stokes residual")
    s.add_argument("field")
    s.add_argument("--loop", type=int, default=0)
    s.add_argument("--surface", type=int, default=None, help="surface index (default: same as --loop)")
    s.add_argument("--flip", action="store_true", help="reverse loop and surface orientation")
    s.add_argument("--tolerance", type=_positive_float, default=1e-10, help="residual limit for --check")
    s.set_defaults(func=cmd_burgers)

    s = sub.add_parser("oracle", parents=[common], help="brute-force rotation or infimum search")
    s.add_argument("matrix")
    s.add_argument("--method", choices=("grid", "random", "probe"), default="grid")
    s.add_argument("--resolution", type=_positive_int, default=10_000)
    s.add_argument("--trials", type=_positive_int, default=100_000)
    s.add_argument("--no-refine", action="store_true")
    s.add_argument("--n", type=_positive_int, default=50)
    s.add_argument("--m", type=_positive_int, default=64)
    s.set_defaults(func=cmd_oracle)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.check_failed = False
    fmt = args.format or getattr(args, "default_format", "json")
    try:
        result, table = args.func(args)
        text = _render(result, fmt, table)
    except (DisarrangementError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ParseError.exit_code
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if args.check_failed else 0


if __name__ == "__main__":
    sys.exit(main())
