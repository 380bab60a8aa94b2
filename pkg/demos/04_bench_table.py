"""
A results table from a manifest
===============================

Runs the ``bench`` subcommand on the bundled corpus and prints the table:
mean objective over the runs, its relative standard deviation in percent,
and the mean time to the best solution.
"""

from __future__ import annotations

import argparse
import csv
import tempfile
from pathlib import Path

from ksrd.cli import main as ksrd

CORPUS = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus"

ROWS = [
    ("kite5.txt", 3, "exact", 1, 10),
    ("kite5.txt", 3, "vns", 5, 10),
    ("ud_n20_r3_s5.txt", 2, "greedy", 1, 10),
    ("ud_n20_r3_s5.txt", 2, "vns", 5, 10),
    ("ud_n30_r3_s8.txt", 3, "greedy", 1, 10),
    ("ud_n30_r3_s8.txt", 3, "vns", 5, 10),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description="bench a small manifest")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--iters", type=int, default=100)
    args = ap.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        manifest = Path(tmp) / "manifest.csv"
        with manifest.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["instance", "k", "algo", "runs", "time_limit"])
            w.writerows((CORPUS / name, *rest) for name, *rest in ROWS)
        table = Path(tmp) / "table.csv"
        ksrd(["bench", "--manifest", str(manifest), "--jobs", str(args.jobs), "--max-iters", str(args.iters),
              "--out", str(table)])
        with table.open(newline="") as fh:
            rows = list(csv.DictReader(fh))

    print(f"{'instance':<14}{'n':>4}{'k':>3}  {'algo':<7}{'mean obj':>9}{'sigma %':>9}{'t_best s':>10}")
    for r in rows:
        print(f"{r['instance']:<14}{r['n']:>4}{r['k']:>3}  {r['algo']:<7}{float(r['mean_obj']):>9.1f}"
              f"{float(r['sigma_pct']):>9.2f}{float(r['mean_t_best']):>10.3f}")


if __name__ == "__main__":
    main()
