#!/usr/bin/env python3
"""Rebuild every reference table, write one CSV per table and a summary.

Run:
    python3 scripts/reproduce_tables.py --out-dir results/tables
"""

from __future__ import annotations

import argparse
import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from dualrisk import tables


@dataclass
class TableRunConfig:
    table_ids: list[str] = field(default_factory=tables.table_ids)
    tolerance: float = tables.ABS_TOL
    out_dir: Path = Path("results/tables")


def write_table(res: tables.TableResult, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([res.row_name] + [f"{c}" for col in res.columns for c in (col, f"{col} ref")] + ["abs_diff"])
        for label, cells in zip(res.rows, res.cells):
            row = [label]
            for c in cells:
                row += [tables.format_float(c.value), "" if c.golden is None else tables.format_float(c.golden)]
            diffs = [c.abs_diff for c in cells if c.abs_diff is not None]
            row.append(tables.format_float(max(diffs, default=0.0)))
            w.writerow(row)


def main(cfg: TableRunConfig) -> list[dict]:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    summary = []
    for tid in cfg.table_ids:
        start = time.perf_counter()
        res = tables.reproduce(tid)
        elapsed = time.perf_counter() - start
        write_table(res, cfg.out_dir / f"table_{tid}.csv")
        fails = res.failures(cfg.tolerance)
        summary.append(
            {"table": tid, "title": res.title, "max_abs_diff": res.max_abs_diff(), "failed_cells": len(fails),
             "seconds": round(elapsed, 3)}
        )
        print(f"table {tid:>3}: {len(fails):3d} cells off, max diff {res.max_abs_diff():.2e}  ({res.title})")
    meta = {k: str(v) if isinstance(v, Path) else v for k, v in asdict(cfg).items()}
    (cfg.out_dir / "summary.json").write_text(json.dumps({"config": meta, "tables": summary}, indent=2))
    return summary


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--tables", nargs="*", default=None)
    p.add_argument("--tolerance", type=float, default=tables.ABS_TOL)
    p.add_argument("--out-dir", type=Path, default=Path("results/tables"))
    a = p.parse_args()
    cfg = TableRunConfig(tolerance=a.tolerance, out_dir=a.out_dir)
    if a.tables:
        cfg.table_ids = a.tables
    main(cfg)
