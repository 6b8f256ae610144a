"""Command-line front end: ``hodisc <command> ...``.

Exit codes: 0 success, 2 usage or input error, 3 guard ceiling exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .discrepancy import (
    DEFAULT_MAX_CELLS,
    GuardCeilingError,
    HaarIndex,
    decay_profile,
    haar_coefficient,
    l2_exact,
    lp_cellwise,
    parseval_l2,
    star_discrepancy,
)
from .genmat import GenMatrixSet, dump_matrices, order2_matrices, read_matrices, tezuka_matrices
from .netverify import check_equidistribution, t_value
from .scan import (
    KINDS,
    ScanConfig,
    boundedness_proxy,
    p_label,
    parse_p,
    rows_to_csv,
    rows_to_json,
    run_scan,
)
from .sequence import (
    SequenceSpec,
    format_points,
    prefix,
    random_shift,
    read_points,
    symmetrized_vdc,
    van_der_corput,
)

EXIT_USAGE = 2
EXIT_GUARD = 3


class UsageError(ValueError):
    pass


def _global_flags(defaults: bool) -> argparse.ArgumentParser:
    # the same flags are accepted before and after the subcommand; only the
    # top-level copy carries defaults so a later copy never overwrites a value
    sup = None if defaults else argparse.SUPPRESS
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--out", default=sup, help="write output here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"), default="json" if defaults else sup)
    g.add_argument("--threads", type=int, default=1 if defaults else sup)
    g.add_argument("--seed", type=int, default=sup, help="seed of a random digital shift")
    return g


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hodisc",
        description="Order-2 digital sequences, net certificates and L_p discrepancy.",
        parents=[_global_flags(True)],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    g = [_global_flags(False)]

    p = sub.add_parser("gen", parents=g, help="generate a point file")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--d", type=int, help="dimension (digital kinds)")
    p.add_argument("--n", type=int, help="log2 of the point count; matrices get n columns")
    p.add_argument("--N", type=int, help="number of points (default 2^n)")
    p.add_argument("--q", type=int, help="output precision in binary digits")
    p.add_argument("--matrices", help="read generating matrices from this file instead")

    p = sub.add_parser("matrices", parents=g, help="write generating matrices")
    p.add_argument("--kind", choices=("tezuka-order1", "interlaced-order2"), required=True)
    p.add_argument("--d", type=int, required=True, help="number of coordinates")
    p.add_argument("--n", type=int, required=True, help="number of columns")
    p.add_argument("--q", type=int, help="rows of order-1 matrices (default n)")

    p = sub.add_parser("tvalue", parents=g, help="exact t of a matrix file")
    p.add_argument("matrix_file")
    p.add_argument("--alpha", type=int, help="net order (default: the file's order)")
    p.add_argument("--n", type=int, help="truncate to n columns first")

    p = sub.add_parser("equi", parents=g, help="count points in dyadic boxes")
    p.add_argument("point_file")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--alpha", type=int, default=1)

    p = sub.add_parser("disc", parents=g, help="discrepancy of a point file")
    p.add_argument("point_file")
    p.add_argument("--p", default="2", help="real p >= 1, or 'star'")
    p.add_argument("--method", choices=("auto", "closed-form", "quadrature"), default="auto")
    p.add_argument("--nodes", type=int, default=8, help="Gauss-Legendre nodes per axis")
    p.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)

    p = sub.add_parser("haar", parents=g, help="Haar coefficients of the discrepancy function")
    p.add_argument("point_file")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--index", nargs=2, metavar=("J", "M"), help="comma lists, e.g. --index 2,-1 1,0")
    mode.add_argument("--profile", action="store_true", help="decay profile per level")
    mode.add_argument("--parseval", type=int, metavar="CAP", help="partial Parseval sum up to CAP")
    p.add_argument("--t", type=int, help="net parameter for --profile")

    p = sub.add_parser("scan", parents=g, help="normalized discrepancy along prefixes")
    p.add_argument("--kind", choices=KINDS, default="interlaced-order2")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--p", action="append", help="repeatable; real p >= 1 or 'star' (default 2)")
    p.add_argument("--log-power", type=float, help="exponent of log N (default d/2)")
    p.add_argument("--max-cells", type=int, default=ScanConfig.max_cells)
    p.add_argument("--allow-large", action="store_true", help="lift the n_max guard")
    return parser


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record(args: argparse.Namespace, record: dict) -> str:
    if args.format == "json":
        return json.dumps(record, sort_keys=True, indent=2) + "\n"
    keys = list(record)
    return ",".join(keys) + "\n" + ",".join(_csv_cell(record[k]) for k in keys) + "\n"


def _csv_cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return '"' + " ".join(str(x) for x in v) + '"'
    return "" if v is None else str(v)


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _matrices_for(kind: str, d: int | None, n: int | None, q: int | None = None) -> GenMatrixSet:
    if d is None:
        raise UsageError(f"--d is required for --kind {kind}")
    if n is None:
        raise UsageError(f"--n is required for --kind {kind}")
    if kind == "tezuka-order1":
        return tezuka_matrices(d, q if q is not None else n, n)
    return order2_matrices(d, n)


def cmd_gen(args: argparse.Namespace) -> int:
    if args.kind in ("vdc", "vdc-sym"):
        if args.matrices:
            raise UsageError("--matrices applies to digital kinds only")
        if args.d not in (None, 1):
            raise UsageError(f"{args.kind} is one-dimensional")
        if args.N is None and args.n is None:
            raise UsageError("give --N or --n")
        N = args.N if args.N is not None else 1 << args.n
        if args.kind == "vdc":
            pts = van_der_corput(N, args.q)
        else:
            pts = symmetrized_vdc(N, args.q if args.q is not None else 32)
        print(f"# {args.kind} N={N} q={pts.precision_q} clamped={pts.clamped}", file=sys.stderr)
        _emit(args, format_points(pts))
        return 0
    if args.matrices:
        ms = read_matrices(args.matrices)
    else:
        ms = _matrices_for(args.kind, args.d, args.n)
    shift = None
    q = args.q if args.q is not None else min(ms.q_rows, ms.order * ms.n_cols)
    if args.seed is not None:
        shift = random_shift(ms.s, q, args.seed)
    spec = SequenceSpec(ms, precision_q=q, shift=shift)
    N = args.N if args.N is not None else 1 << ms.n_cols
    print(
        f"# {args.kind} s={ms.s} order={ms.order} rows={ms.q_rows} n={ms.n_cols}"
        f" t_upper={ms.t_upper} q={q} shift={'none' if shift is None else ','.join(map(str, shift))}",
        file=sys.stderr,
    )
    _emit(args, format_points(prefix(spec, N)))
    return 0


def cmd_matrices(args: argparse.Namespace) -> int:
    _emit(args, dump_matrices(_matrices_for(args.kind, args.d, args.n, args.q)))
    return 0


def cmd_tvalue(args: argparse.Namespace) -> int:
    ms = read_matrices(args.matrix_file)
    rep = t_value(ms, args.alpha, args.n)
    record = rep.to_json()
    # wall time would make the output differ between runs
    print(f"# elapsed {record.pop('elapsed'):.3f}s", file=sys.stderr)
    _emit(args, _record(args, record))
    return 0


def cmd_equi(args: argparse.Namespace) -> int:
    rep = check_equidistribution(read_points(args.point_file), args.t, args.alpha)
    _emit(args, _record(args, rep.to_json()))
    return 0


def cmd_disc(args: argparse.Namespace) -> int:
    pts = read_points(args.point_file)
    p = parse_p(args.p)
    if math.isinf(p):
        rep = star_discrepancy(pts, max_cells=args.max_cells)
    elif args.method == "closed-form" or (args.method == "auto" and p == 2):
        if p != 2:
            raise UsageError("the closed form exists for p = 2 only")
        rep = l2_exact(pts)
    else:
        rep = lp_cellwise(pts, p, nodes_per_axis=args.nodes, max_cells=args.max_cells)
    record = rep.to_json()
    record["p"] = p_label(p)
    _emit(args, _record(args, record))
    return 0


def cmd_haar(args: argparse.Namespace) -> int:
    pts = read_points(args.point_file)
    if args.index:
        idx = HaarIndex(_ints(args.index[0]), _ints(args.index[1]))
        c = haar_coefficient(pts, idx)
        record = {"j": list(idx.j), "m": list(idx.m), "coefficient": str(c), "value": float(c)}
        _emit(args, _record(args, record))
        return 0
    if args.parseval is not None:
        _emit(args, _record(args, parseval_l2(pts, args.parseval).to_json()))
        return 0
    if args.t is None:
        raise UsageError("--profile needs --t")
    rows = decay_profile(pts, args.t)
    if args.format == "json":
        text = json.dumps(
            [
                {
                    "level": r.level,
                    "observed": r.observed,
                    "argmax_j": list(r.argmax_j),
                    "reference": r.reference,
                    "ratio": r.ratio,
                }
                for r in rows
            ],
            indent=2,
        ) + "\n"
    else:
        text = "level,observed,argmax_j,reference,ratio\n" + "".join(
            f"{r.level},{r.observed!r},\"{' '.join(map(str, r.argmax_j))}\",{r.reference!r},{r.ratio!r}\n"
            for r in rows
        )
    _emit(args, text)
    return 0


def cmd_scan(args: argparse.Namespace) -> int:
    cfg = ScanConfig(
        d=args.d,
        n_max=args.n_max,
        p_values=tuple(args.p or ["2"]),
        kind=args.kind,
        seed=args.seed,
        out=args.out,
        log_power=args.log_power,
        max_cells=args.max_cells,
        allow_large=args.allow_large,
        threads=args.threads,
    )
    rows = run_scan(cfg)
    for p in cfg.p_values:
        pr = boundedness_proxy(rows, p, cfg.n_max)
        print(
            f"# p={p_label(p)} bottom_max={pr.bottom_max:.6g} top_max={pr.top_max:.6g}"
            f" ratio={pr.ratio:.4f} bounded={pr.bounded}",
            file=sys.stderr,
        )
    if args.format == "json":
        _emit(args, json.dumps(rows_to_json(rows), indent=2) + "\n")
    else:
        _emit(args, rows_to_csv(rows))
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "matrices": cmd_matrices,
    "tvalue": cmd_tvalue,
    "equi": cmd_equi,
    "disc": cmd_disc,
    "haar": cmd_haar,
    "scan": cmd_scan,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be positive")
    try:
        return COMMANDS[args.command](args)
    except GuardCeilingError as exc:
        print(f"hodisc: guard ceiling exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (ValueError, OSError) as exc:
        print(f"hodisc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
