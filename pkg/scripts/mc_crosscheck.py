#!/usr/bin/env python3
"""Simulate the barrier quantities of the reference tables and compare.

For each barrier level the script prints the analytic value, the simulated
value with its standard error, and the stored reference value, so cells where
the reference disagrees with both can be told apart from solver errors.

Run:
    python3 scripts/mc_crosscheck.py --paths 400000 --workers 4
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

from dualrisk import dividends, divdist, sim, tables


@dataclass
class CrossCheckConfig:
    table_id: str = "1"
    barriers: list[float] = field(default_factory=lambda: [1.0, 2.0, 3.0, 5.0])
    paths: int = 400_000
    seed: int = 11
    workers: int = 4
    out: Path | None = None


def check(cfg: CrossCheckConfig) -> list[list]:
    td = tables.get(cfg.table_id)
    res = td.compute()
    golden = {row: cells for row, cells in zip(res.rows, res.cells)}
    delta = td.spec.delta
    out = []
    for b in cfg.barriers:
        spec = td.spec.with_(barrier=b)
        run = sim.SimulationConfig(spec, paths=cfg.paths, seed=cfg.seed, workers=cfg.workers)
        est = {
            "phi0(b)": sim.run(run, sim.DiscountedDividendMoment(0, delta), b),
            "phi1(b)": sim.run(run, sim.DiscountedDividendMoment(1, delta), b),
            "V(b,b)": sim.run(run, sim.AggregateDividends(delta, 1), b),
            "chi(b,b)": sim.run(run, sim.BarrierProb(), b),
        }
        exact = {
            "phi0(b)": dividends.phi(spec, 0, delta, b),
            "phi1(b)": dividends.phi(spec, 1, delta, b),
            "V(b,b)": dividends.v_moment(spec, 1, delta, b),
            "chi(b,b)": divdist.chi(spec, b),
        }
        label = tables.format_float(b).rstrip("0").rstrip(".")
        ref_cells = golden.get(label)
        for j, col in enumerate(res.columns):
            e = est[col]
            ref = ref_cells[j].golden if ref_cells is not None else None
            out.append([b, col, exact[col], e.mean, e.std_error, ref])
    return out


def main(cfg: CrossCheckConfig) -> None:
    rows = check(cfg)
    header = ["b", "quantity", "analytic", "simulated", "std_error", "reference"]
    fh = cfg.out.open("w", newline="") if cfg.out else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([r[0], r[1]] + [("" if v is None else f"{v:.6f}") for v in r[2:]])
    if cfg.out:
        fh.close()


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--table", default="1", help="a barrier-start table, e.g. 1, 2 or 3")
    p.add_argument("--barriers", type=float, nargs="+", default=[1.0, 2.0, 3.0, 5.0])
    p.add_argument("--paths", type=int, default=400_000)
    p.add_argument("--seed", type=int, default=11)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--out", type=Path)
    a = p.parse_args()
    main(CrossCheckConfig(a.table, a.barriers, a.paths, a.seed, a.workers, a.out))
