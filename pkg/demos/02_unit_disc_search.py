"""
Greedy versus search on random unit-disc graphs
===============================================

Generates a few unit-disc graphs, runs the greedy constructor and the
variable neighborhood search on each, and prints the gain together with a
short trace of the incumbent's weight.
"""

from __future__ import annotations

import argparse
import time

from ksrd import SolverConfig, UnitDiscParams, gen_unit_disc, generate_attacks, greedy, vns_solve


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[30, 50, 80])
    ap.add_argument("--radius", type=float, default=0.4)
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--iters", type=int, default=50)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    for n in args.n:
        g = gen_unit_disc(UnitDiscParams(n, args.radius, args.seed))
        t0 = time.perf_counter()
        sets = generate_attacks(g, args.k)
        print(f"\nn={n} m={g.m} max degree={g.max_degree}: {len(sets.intense)} intense, "
              f"{len(sets.lightweight)} lightweight attacks ({time.perf_counter() - t0:.2f}s)")

        # keep the iterations where the incumbent weight changed
        trace = []

        def progress(it, fit, t):
            if not trace or trace[-1][1] != fit.weight:
                trace.append((it, fit.weight, t))

        base = greedy(g, args.k).weight
        rep = vns_solve(g, SolverConfig(k=args.k, iter_max=args.iters, seed=args.seed),
                        progress=progress, attack_sets=sets)
        for it, w, t in trace:
            print(f"  iter {it:4d}  weight {w:3d}  t={t:.2f}s")
        print(f"  greedy {base} -> search {rep.solution.weight} ({rep.mode} feasibility, "
              f"best after {rep.time_to_best:.2f}s of {rep.total_time:.2f}s)")


if __name__ == "__main__":
    main()
