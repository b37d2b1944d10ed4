#!/usr/bin/env python3
"""Write the data series behind every figure as CSV, one file per figure.

Run:
    python3 scripts/figure_data.py --out-dir results/figures --points 201
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

from dualrisk import cli


@dataclass
class FigureConfig:
    figure_ids: list[str] = field(default_factory=lambda: sorted(cli.FIGURES))
    points: int = 201
    out_dir: Path = Path("results/figures")


def main(cfg: FigureConfig) -> None:
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for fid in cfg.figure_ids:
        header, rows = cli.figure_data(fid, cfg.points)
        path = cfg.out_dir / f"figure_{fid}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        print(f"figure {fid}: {len(rows)} rows -> {path}  ({cli.FIGURES[fid]})")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--figures", nargs="*", default=None)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out-dir", type=Path, default=Path("results/figures"))
    a = p.parse_args()
    cfg = FigureConfig(points=a.points, out_dir=a.out_dir)
    if a.figures:
        cfg.figure_ids = a.figures
    main(cfg)
