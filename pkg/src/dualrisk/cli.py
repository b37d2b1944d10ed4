"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 table mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import counts, divdist, dividends, ruin, sim, tables
from .errors import NumericalError, ValidationError
from .model import ModelSpec, combexp_gains, erlang2_gains

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_MISMATCH = 0, 2, 3, 4

PRESETS = {
    "erlang-c0.75": (erlang2_gains, 2.0, 0.75),
    "erlang-c1": (erlang2_gains, 2.0, 1.0),
    "erlang-c2.1": (erlang2_gains, 2.0, 2.1),
    "combexp-c0.75": (combexp_gains, 2.0, 0.75),
    "combexp-c1": (combexp_gains, 2.0, 1.0),
    "combexp-c0.5": (combexp_gains, 2.0, 0.5),
}


def preset_spec(name: str) -> ModelSpec:
    gains, lam, c = PRESETS[name]
    return ModelSpec(n=2, lam=lam, c=c, gains=gains(), delta=tables.DELTA)


# ---- output ------------------------------------------------------------------------------
class Output:
    def __init__(self, fmt: str, path: str | None):
        self.fmt, self.path = fmt, path

    def emit(self, header: list[str], rows: list[list], meta: dict | None = None) -> None:
        if self.fmt == "json":
            payload = {"columns": header, "rows": [dict(zip(header, r)) for r in rows]}
            if meta:
                payload.update(meta)
            text = json.dumps(payload, indent=2) + "\n"
        else:
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(header)
            for r in rows:
                writer.writerow([_cell(v) for v in r])
            text = buf.getvalue()
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)


def _cell(v):
    if isinstance(v, float):
        return tables.format_float(v)
    return v


# ---- argument helpers ----------------------------------------------------------------------
def _load_spec(args) -> ModelSpec:
    if args.spec:
        try:
            spec = ModelSpec.load(args.spec)
        except OSError as exc:
            raise ValidationError(f"cannot read spec file: {exc}") from exc
    else:
        spec = preset_spec(args.preset)
    changes = {}
    if getattr(args, "b", None) is not None:
        changes["barrier"] = args.b
    if getattr(args, "delta", None) is not None:
        changes["delta"] = args.delta
    return spec.with_(**changes) if changes else spec


def _values(vals, grid) -> list[float]:
    if grid is not None:
        lo, hi, num = grid
        return list(np.linspace(lo, hi, int(num)))
    return [float(v) for v in vals]


def _add_common(p: argparse.ArgumentParser, barrier: bool = False, delta: bool = False) -> None:
    p.add_argument("--spec", help="JSON model spec (keys n, lambda, c, delta, barrier, gains)")
    p.add_argument("--preset", choices=sorted(PRESETS), default="erlang-c1", help="built-in parameter set")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", help="write to this file instead of stdout")
    if barrier:
        p.add_argument("--b", type=float, help="dividend barrier / upper target")
    if delta:
        p.add_argument("--delta", type=float, help="interest force")


def _add_u(p: argparse.ArgumentParser, default=(1.0,)) -> None:
    p.add_argument("--u", type=float, nargs="+", default=list(default), help="initial surplus values")
    p.add_argument("--u-grid", type=float, nargs=3, metavar=("START", "STOP", "NUM"), help="evenly spaced u values")


# ---- commands --------------------------------------------------------------------------------
def cmd_ruin(args) -> int:
    spec = _load_spec(args)
    delta = spec.delta
    us = _values(args.u, args.u_grid)
    transform = ruin.ruin_transform(spec, delta)
    rows = [[u, delta, transform(u)] for u in us]
    Output(args.format, args.out).emit(["u", "delta", "psi"], rows)
    return EXIT_OK


def cmd_dividends(args) -> int:
    spec = _load_spec(args)
    b = spec.require_barrier()
    delta = spec.delta
    rows = []
    for u in _values(args.u, args.u_grid):
        phi_k = dividends.phi(spec, args.k, delta, u)
        v = dividends.v_moment(spec, args.order, delta, u)
        share = dividends.first_dividend_share(spec, delta, u) if u > 0 else float("nan")
        rows.append([u, b, delta, phi_k, v, share])
    header = ["u", "b", "delta", f"phi{args.k}", f"V{args.order}", "first_dividend_share"]
    Output(args.format, args.out).emit(header, rows)
    return EXIT_OK


def cmd_divdist(args) -> int:
    spec = _load_spec(args)
    b = spec.require_barrier()
    rows = []
    for u in _values(args.u, args.u_grid):
        ch = divdist.chi(spec, u)
        for x in args.x:
            g = divdist.g_density(spec, u, x) if u <= b else float("nan")
            gt = g / ch if ch > 0 else float("nan")
            rows.append([u, b, x, divdist.G(spec, u, x), ch, 1.0 - ch, g, gt])
    Output(args.format, args.out).emit(["u", "b", "x", "G", "chi", "xi", "g", "g_tilde"], rows)
    return EXIT_OK


def cmd_counts(args) -> int:
    spec = _load_spec(args)
    rows = []
    us = _values(args.u, args.u_grid)
    if spec.barrier is None:
        for u in us:
            for m in range(args.max_m + 1):
                rows.append([u, m, counts.q(spec, u, m)])
        header = ["u", "m", "q"]
    else:
        b = spec.barrier
        for u in us:
            for m in range(1, args.max_m + 1):
                rows.append([u, b, str(m), counts.r(spec, u, b, m)])
            tail = counts.r_tail(spec, u, b, args.max_m, paths=args.paths, seed=args.seed)
            rows.append([u, b, f">={args.max_m + 1}", tail.value])
        header = ["u", "b", "m", "r"]
    Output(args.format, args.out).emit(header, rows)
    return EXIT_OK


QUANTITIES = ["ruin-lt", "dividend-moment", "barrier-prob", "dividend-cdf", "gains-ruin", "gains-target", "aggregate"]


def _quantity(args, spec: ModelSpec):
    q = args.quantity
    if q == "ruin-lt":
        return sim.RuinLT(spec.delta)
    if q == "dividend-moment":
        return sim.DiscountedDividendMoment(args.k, spec.delta)
    if q == "barrier-prob":
        return sim.BarrierProb()
    if q == "dividend-cdf":
        return sim.DividendCdfAt(tuple(args.x))
    if q == "gains-ruin":
        return sim.GainCountRuinPmf(args.max_m)
    if q == "gains-target":
        return sim.GainCountTargetPmf(args.max_m)
    return sim.AggregateDividends(spec.delta, args.order)


def cmd_simulate(args) -> int:
    spec = _load_spec(args)
    cfg = sim.SimulationConfig(
        spec, paths=args.paths, seed=args.seed, workers=args.workers, max_events_per_path=args.max_events
    )
    quantity = _quantity(args, spec)
    rows = []
    for u in _values(args.u, args.u_grid):
        est = sim.run(cfg, quantity, u)
        ests = est if isinstance(est, list) else [est]
        if args.quantity == "dividend-cdf":
            labels = [f"x={x:g}" for x in args.x]
        elif args.quantity in ("gains-ruin", "gains-target"):
            labels = [f"m={m}" for m in range(args.max_m + 1)]
        else:
            labels = [""]
        for label, e in zip(labels, ests):
            rows.append([u, args.quantity, label, e.mean, e.std_error, e.n, e.censored_fraction])
    header = ["u", "quantity", "index", "mean", "std_error", "n", "censored_fraction"]
    Output(args.format, args.out).emit(header, rows, {"seed": args.seed, "paths": args.paths})
    return EXIT_OK


def cmd_reproduce(args) -> int:
    ids = tables.table_ids() if args.all else [args.table]
    status = EXIT_OK
    header: list[str] = []
    rows: list[list] = []
    summary = []
    for tid in ids:
        res = tables.reproduce(tid)
        fails = res.failures(args.tolerance)
        summary.append({"table": res.table_id, "max_abs_diff": res.max_abs_diff(), "failed_cells": len(fails)})
        if len(ids) == 1:
            header = [res.row_name] + res.columns + ["abs_diff"]
            for label, cells in zip(res.rows, res.cells):
                diffs = [c.abs_diff for c in cells if c.abs_diff is not None]
                rows.append([label] + [c.value for c in cells] + [max(diffs, default=0.0)])
        if fails:
            status = EXIT_MISMATCH
            for r, col, cell in fails:
                print(
                    f"table {res.table_id}: {res.row_name}={r} {col}: computed {cell.value:.6g}, reference {cell.golden:.6g}",
                    file=sys.stderr,
                )
    if len(ids) > 1:
        header = ["table", "max_abs_diff", "failed_cells"]
        rows = [[s["table"], s["max_abs_diff"], s["failed_cells"]] for s in summary]
    Output(args.format, args.out).emit(header, rows, {"tolerance": args.tolerance, "summary": summary})
    return status


FIGURES = {
    "1": "G(u,b,x) against u, Erlang gains, c=1, b=5 and b=10",
    "2": "g(u,5,x) and g_tilde(u,5,x), Erlang gains, c=1",
    "3": "g(u,5,x) and g_tilde(u,5,x), Erlang gains, c=2.1",
    "4": "q(1,m), Erlang gains, c=1",
    "5": "G(u,5,x) against u, combined exponentials, c=0.75",
    "6": "g(u,5,x) and g_tilde(u,5,x), combined exponentials, c=0.75",
    "7": "q(1,m), combined exponentials, c=1",
}


def figure_data(fig_id: str, points: int = 101) -> tuple[list[str], list[list]]:
    if fig_id not in FIGURES:
        raise ValidationError(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")
    rows: list[list] = []
    if fig_id in ("1", "5"):
        panels = [(5.0, range(1, 6)), (10.0, range(1, 11))] if fig_id == "1" else [(5.0, range(0, 6))]
        base = preset_spec("erlang-c1" if fig_id == "1" else "combexp-c0.75")
        for b, xs in panels:
            spec = base.with_(barrier=b)
            us = np.linspace(0.0, b, points)
            for x in xs:
                vals = divdist.G(spec, us, float(x))
                rows.extend([b, float(x), float(u), float(v)] for u, v in zip(us, vals))
        return ["b", "x", "u", "G"], rows
    if fig_id in ("2", "3", "6"):
        name = {"2": "erlang-c1", "3": "erlang-c2.1", "6": "combexp-c0.75"}[fig_id]
        spec = preset_spec(name).with_(barrier=5.0)
        xs = np.linspace(0.0, 10.0, points)
        for u in range(1, 6):
            ch = divdist.chi(spec, float(u))
            for x in xs:
                g = divdist.g_density(spec, float(u), float(x))
                rows.append([float(u), float(x), g, g / ch])
        return ["u", "x", "g", "g_tilde"], rows
    spec = preset_spec("erlang-c1" if fig_id == "4" else "combexp-c1")
    for m in range(31):
        rows.append([1.0, m, counts.q(spec, 1.0, m)])
    return ["u", "m", "q"], rows


def cmd_figure(args) -> int:
    header, rows = figure_data(args.id, args.points)
    Output(args.format, args.out).emit(header, rows, {"figure": args.id, "title": FIGURES[args.id]})
    return EXIT_OK


# ---- parser --------------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualrisk", description="Ruin and dividend measures for the Erlang(n) dual risk model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ruin", help="Laplace transform of the ruin time (ruin probability at delta=0)")
    _add_common(p, delta=True)
    _add_u(p)
    p.set_defaults(func=cmd_ruin)

    p = sub.add_parser("dividends", help="discounted dividend moments under a barrier")
    _add_common(p, barrier=True, delta=True)
    _add_u(p)
    p.add_argument("--k", type=int, default=1, help="moment order of the first dividend")
    p.add_argument("--order", type=int, default=1, help="moment order of the aggregate dividends")
    p.set_defaults(func=cmd_dividends)

    p = sub.add_parser("divdist", help="first dividend distribution G, density g and chi")
    _add_common(p, barrier=True)
    _add_u(p)
    p.add_argument("--x", type=float, nargs="+", default=[1.0])
    p.set_defaults(func=cmd_divdist)

    p = sub.add_parser("counts", help="gain counts before ruin (q) or to reach the barrier b (r)")
    _add_common(p, barrier=True)
    _add_u(p)
    p.add_argument("--max-m", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=100_000)
    p.set_defaults(func=cmd_counts)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of any quantity")
    _add_common(p, barrier=True, delta=True)
    _add_u(p)
    p.add_argument("--quantity", choices=QUANTITIES, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--x", type=float, nargs="+", default=[1.0])
    p.add_argument("--max-m", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-events", type=int, default=1_000_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reproduce", help="rebuild a reference table and compare with the stored values")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--table", choices=tables.table_ids())
    group.add_argument("--all", action="store_true")
    p.add_argument("--tolerance", type=float, default=tables.ABS_TOL)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("figure", help="data series behind a figure")
    p.add_argument("--id", required=True, choices=sorted(FIGURES))
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
