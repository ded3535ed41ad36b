"""Command line front end: every computation as a subcommand with CSV/JSON/TSV output."""

from __future__ import annotations

import argparse
import math
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bessel_sum as bs
from . import moments as mo
from . import sieve as sv
from .numerics import QuadratureSpec, theta_direct, theta_dual
from .reports import format_rows

CACHE_ENV = "TWOSQUARES_CACHE_DIR"

_TABLE_GRANULE = 1 << 20

# identity tolerances: periodized Gaussian, Bessel-sum routes, Weber integral
TOL_THETA = 1e-12
TOL_SUM = 1e-8
TOL_WEBER = 1e-6

THETA_WIDTHS = (0.25, 0.5, 1.0, 2.0, 4.0, 10.0)
SUM_POINTS = (0.0, 0.5, 1.0, 2.5, 10.0, 100.0, 1000.0)
SUM_SCALES = (0.5, 1.0, 4.0, 16.0)


@dataclass
class RunConfig:
    x_max: int = 0
    cache_dir: str | None = None
    output_format: str = "csv"
    threads: int = 1
    tolerance: float | None = None

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.output_format not in ("csv", "json", "tsv"):
            raise ValueError("format must be csv, json or tsv")


def _config(args) -> RunConfig:
    cache_dir = args.cache_dir if args.cache_dir is not None else os.environ.get(CACHE_ENV)
    return RunConfig(x_max=getattr(args, "x_max", 0) or 0,
                     cache_dir=cache_dir,
                     output_format=args.format,
                     threads=args.threads,
                     tolerance=args.tolerance)


def _table_for(cfg: RunConfig, needed: int) -> sv.TwoSquareTable:
    """Sieve table covering `needed`, rounded up so cache files get reused."""
    eff = max(1 << 17, math.ceil((needed + 1) / _TABLE_GRANULE) * _TABLE_GRANULE)
    return sv.load_or_build(eff, cfg.cache_dir)


def _scan_margin(x: float) -> int:
    # room for the bracketing member above x, from the quarter-power bound
    return int(4.0 * max(x, 1.0) ** 0.25) + 64


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _emit(rows, cfg: RunConfig, tsv_fields=None) -> None:
    sys.stdout.write(format_rows(rows, cfg.output_format, tsv_fields))


# ----------------------------------------------------------------------------
# Subcommand handlers
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class _CountRow:
    x_max: int
    members: int


def _cmd_sieve(args) -> int:
    cfg = _config(args)
    if args.x_max is None:
        raise ValueError("sieve requires --x-max")
    table = _table_for(cfg, args.x_max)
    members = int(np.searchsorted(table.elements, args.x_max, side="right"))
    _emit([_CountRow(x_max=args.x_max, members=members)], cfg)
    return 0


@dataclass(frozen=True)
class _GapRow:
    s_lo: int
    s_hi: int
    gap: int


def _cmd_gaps(args) -> int:
    cfg = _config(args)
    if args.x_max is None:
        raise ValueError("gaps requires --x-max")
    table = _table_for(cfg, args.x_max)
    rows = [_GapRow(r.s_lo, r.s_hi, r.gap) for r in sv.record_gaps(table)
            if r.s_hi <= args.x_max]
    _emit(rows, cfg)
    return 0


@dataclass(frozen=True)
class _ScanRow:
    s_lo: int
    s_hi: int
    gap: int
    real_sup: float
    integer_max: int


def _cmd_r_scan(args) -> int:
    """Record gaps with the supremum of the distance function in both conventions."""
    cfg = _config(args)
    x = args.x if args.x is not None else args.x_max
    if x is None:
        raise ValueError("r-scan requires --x or --x-max")
    table = _table_for(cfg, x + _scan_margin(x))
    rows = [_ScanRow(r.s_lo, r.s_hi, r.gap, r.gap / 2.0, r.gap // 2)
            for r in sv.record_gaps(table) if r.s_lo <= x]
    _emit(rows, cfg)
    return 0


@dataclass(frozen=True)
class _DistanceCheckRow:
    n_from: int
    n_to: int
    checked: int
    violations: int
    min_slack: float


def _cmd_d_check(args) -> int:
    cfg = _config(args)
    if args.x_max is None:
        raise ValueError("d-check requires --x-max")
    hi = int(args.x_max)
    table = _table_for(cfg, hi + _scan_margin(hi))
    ns = np.arange(3, hi + 1, dtype=np.int64)
    elements = table.elements
    pos = np.searchsorted(elements, ns)
    left = elements[pos - 1]
    right = elements[pos]
    dist = np.minimum(ns - left, right - ns).astype(float)  # integer distance R(n)
    roots = np.sqrt(ns.astype(float))
    d_circle = np.minimum(roots - np.sqrt(left.astype(float)),
                          np.sqrt(right.astype(float)) - roots)
    slack = d_circle - 2.0 * dist / (5.0 * roots)
    rows = [_DistanceCheckRow(3, hi, len(ns), int(np.sum(slack < 0)), float(slack.min()))]
    _emit(rows, cfg)
    return 0 if rows[0].violations == 0 else 1


def _sum_reports(point, scale, r2_table, tail_tol=1e-12):
    params = bs.SumParams(point=point, scale=scale, tail_tol=tail_tol)
    direct = bs.bessel_sum_direct(params, r2_table)
    avg = scale * bs.theta_circle_average(point, scale)
    dual = bs.bessel_sum_dual(params, r2_table)
    return [bs.IdentityReport(f"sum n={point:g} m={scale:g}", ("direct", "circle-average"), direct, avg),
            bs.IdentityReport(f"sum n={point:g} m={scale:g}", ("direct", "dual"), direct, dual)]


def _r2_for_grid(points, scales, tail_tol=1e-12) -> sv.R2Table:
    need = 1
    for p in points:
        for m in scales:
            need = max(need, bs.truncation_index(m, tail_tol))
            w = bs._dual_window(p, m, tail_tol)
            need = max(need, math.ceil((math.sqrt(p) + w) ** 2))
    return sv.build_r2_table(need)


def _cmd_bessel_sum(args) -> int:
    cfg = _config(args)
    r2 = _r2_for_grid([args.N], [args.M])
    _emit(_sum_reports(args.N, args.M, r2), cfg)
    return 0


def _cmd_weber(args) -> int:
    cfg = _config(args)
    _emit([bs.weber_integral_check(args.alpha, args.beta, args.gamma)], cfg)
    return 0


def _cmd_verify_identities(args) -> int:
    cfg = _config(args)
    tol_theta = cfg.tolerance or TOL_THETA
    tol_sum = cfg.tolerance or TOL_SUM
    tol_weber = cfg.tolerance or TOL_WEBER
    rows = []
    ok = True

    # periodized Gaussian: worst point of 64 for each width
    def theta_worst(m):
        xs = np.arange(64) / 64.0
        lhs = theta_direct(m, xs)
        rhs = theta_dual(m, xs)
        i = int(np.argmax(np.abs(lhs - rhs) / np.maximum(1.0, np.abs(lhs))))
        return bs.IdentityReport(f"theta m={m:g} worst-of-64 x={xs[i]:g}",
                                 ("direct", "dual"), float(lhs[i]), float(rhs[i]))

    for rep in _map_ordered(theta_worst, THETA_WIDTHS, cfg.threads):
        rows.append(rep)
        ok &= rep.rel_err <= tol_theta

    r2 = _r2_for_grid(SUM_POINTS, SUM_SCALES)
    grid = [(p, m) for p in SUM_POINTS for m in SUM_SCALES]
    for reps in _map_ordered(lambda pm: _sum_reports(pm[0], pm[1], r2), grid, cfg.threads):
        for rep in reps:
            rows.append(rep)
            ok &= rep.rel_err <= tol_sum

    rng = np.random.default_rng(20240817)
    for _ in range(10):
        alpha = float(rng.uniform(0.5, 3.0))
        beta = float(rng.uniform(0.0, 2.0))
        gamma = float(rng.uniform(0.0, 2.0))
        rep = bs.weber_integral_check(alpha, beta, gamma)
        rows.append(rep)
        ok &= rep.rel_err <= tol_weber

    _emit(rows, cfg)
    return 0 if ok else 1


@dataclass(frozen=True)
class _L2Row:
    point: float
    scale: float
    l2: float
    l2_weighted: float
    weighted_bound: float
    bound_holds: bool


def _cmd_j_functional(args) -> int:
    cfg = _config(args)
    need = max(bs.truncation_index(args.M, 1e-12),
               math.ceil(args.M * (math.log(1e12) + 30.0) / math.pi))
    r2 = sv.build_r2_table(need)
    j = bs.l2_deviation(args.N, args.M, r2)
    jw = bs.l2_deviation_weighted(args.N, args.M, r2)
    bound = math.exp(math.pi) * jw
    _emit([_L2Row(args.N, args.M, j, jw, bound, j <= bound)], cfg)
    return 0


def _cmd_moments(args) -> int:
    cfg = _config(args)
    xs = args.x
    if xs is None:
        raise ValueError("moments requires --x")
    table = _table_for(cfg, int(max(xs)) + _scan_margin(max(xs)))
    for gamma in args.gamma:
        if not gamma < mo.HOOLEY_GAMMA_SUP:
            print(f"note: gamma={gamma:g} is outside the proven range of the "
                  "sqrt-log normalization; hooley_ratio is reported for reference only",
                  file=sys.stderr)
    rows = mo.moment_ratio_table(table, args.gamma, xs)
    _emit(rows, cfg, tsv_fields=("x", "refined_ratio"))
    return 0


def _cmd_measure(args) -> int:
    cfg = _config(args)
    table = _table_for(cfg, int(args.x) + _scan_margin(args.x))
    rows = [mo.exceptional_measure(table, h, args.x) for h in args.H]
    _emit(rows, cfg, tsv_fields=("H", "normalized"))
    return 0


def _cmd_richards(args) -> int:
    cfg = _config(args)
    if args.x is None:
        raise ValueError("richards requires --x")
    table = _table_for(cfg, int(args.x) + _scan_margin(args.x))
    _emit(mo.record_scan(table, args.x), cfg, tsv_fields=("n", "log_ratio"))
    return 0


# ----------------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twosquares",
        description="Sums of two squares: sieve tables, gap statistics, "
                    "Bessel-weighted sums and their identity checks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json", "tsv"), default="csv",
                        help="output format (default: csv)")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for grid evaluations (default: 1)")
    common.add_argument("--cache-dir", default=None,
                        help=f"bitset cache directory (default: ${CACHE_ENV} if set)")
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the per-family identity tolerances")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", parents=[common], help="build the membership table, print the member count")
    p.add_argument("--x-max", type=int, required=True)
    p.set_defaults(handler=_cmd_sieve)

    p = sub.add_parser("gaps", parents=[common], help="record-breaking gaps up to --x-max")
    p.add_argument("--x-max", type=int, required=True)
    p.set_defaults(handler=_cmd_gaps)

    p = sub.add_parser("r-scan", parents=[common],
                       help="record gaps with the distance supremum in real and integer conventions")
    p.add_argument("--x", type=float, default=None)
    p.add_argument("--x-max", type=int, default=None)
    p.set_defaults(handler=_cmd_r_scan)

    p = sub.add_parser("d-check", parents=[common],
                       help="verify the circle-to-lattice vs set-distance inequality on [3, x-max]")
    p.add_argument("--x-max", type=int, required=True)
    p.set_defaults(handler=_cmd_d_check)

    p = sub.add_parser("bessel-sum", parents=[common], help="evaluate the weighted sum three ways")
    p.add_argument("--N", type=float, required=True, help="evaluation point")
    p.add_argument("--M", type=float, required=True, help="Gaussian cutoff scale")
    p.set_defaults(handler=_cmd_bessel_sum)

    p = sub.add_parser("verify-identities", parents=[common],
                       help="run the full identity grid and report discrepancies")
    p.add_argument("--grid", choices=("default",), default="default")
    p.set_defaults(handler=_cmd_verify_identities)

    p = sub.add_parser("weber", parents=[common], help="quadrature vs closed form for the Weber integral")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=1.5)
    p.set_defaults(handler=_cmd_weber)

    p = sub.add_parser("j-functional", parents=[common],
                       help="mean-square deviation over [0, N] and its weighted closed form")
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--M", type=float, required=True)
    p.set_defaults(handler=_cmd_j_functional)

    p = sub.add_parser("moments", parents=[common], help="gap moments with both normalizations")
    p.add_argument("--gamma", type=float, nargs="+", required=True)
    p.add_argument("--x", type=float, nargs="+", required=True)
    p.set_defaults(handler=_cmd_moments)

    p = sub.add_parser("measure", parents=[common], help="measure of the far-from-members set")
    p.add_argument("--H", type=float, nargs="+", required=True)
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(handler=_cmd_measure)

    p = sub.add_parser("richards", parents=[common], help="integer distance records with log normalization")
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(handler=_cmd_richards)

    return parser


def run(argv=None) -> int:
    """Entry point returning a process exit code (0 ok, 2 validation, 1 internal)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.handler(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
