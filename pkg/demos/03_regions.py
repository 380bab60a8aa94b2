"""
Labeling map regions
====================

Regions that share a border or a corner are adjacent. This builds the
adjacency of a GeoJSON file (by default a 4x4 grid of square cells), solves
it, and reports the armies per region id.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from ksrd import RegionSet, SolverConfig, exact_feasible, geojson_to_graph, vns_solve

GRID = Path(__file__).resolve().parent.parent / "tests" / "data" / "corpus" / "grid4.geojson"


def main(argv=None):
    ap = argparse.ArgumentParser(description="solve the region adjacency of a GeoJSON file")
    ap.add_argument("geojson", nargs="?", default=str(GRID))
    ap.add_argument("--id-property", default="cell")
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--iters", type=int, default=200)
    args = ap.parse_args(argv)

    regions = RegionSet.from_geojson(Path(args.geojson), args.id_property)
    g, ids = geojson_to_graph(regions)
    print(f"{g.n} regions, {g.m} adjacencies")

    rep = vns_solve(g, SolverConfig(k=args.k, iter_max=args.iters))
    labels = rep.solution.labels
    print(f"weight {rep.solution.weight} (greedy {rep.greedy_fitness.weight}), "
          f"exactly feasible: {exact_feasible(g, labels, args.k)}")
    for rid, (x, y), lab in zip(ids, regions.centroids, labels):
        if lab:
            print(f"  {rid}: {lab} at ({x:.1f}, {y:.1f})")


if __name__ == "__main__":
    main()
