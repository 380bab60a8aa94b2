"""Command-line entry point: solve, verify, gen and bench subcommands.

Exit codes: 0 success (or feasible), 1 infeasible labeling, 2 error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from math import comb
from pathlib import Path

from .attacks import DEFAULT_BALL_RADIUS, DEFAULT_BOUND, generate_attacks
from .defense import DEFAULT_CUTOFF, DEFAULT_TRIES, Solution, SolutionError, quasi_infeasibility
from .graph import Graph, GraphError
from .greedy import greedy
from .instances import (
    InstanceError,
    RegionSet,
    UnitDiscParams,
    gen_unit_disc,
    geojson_to_graph,
    load_edge_list,
    write_edge_list,
)
from .oracle import BudgetExceeded, brute_force_optimum, count_failing_attacks, first_failing_attack
from .vns import SolverConfig, vns_solve

EXIT_OK, EXIT_INFEASIBLE, EXIT_ERROR = 0, 1, 2
MANIFEST_COLUMNS = ("instance", "k", "algo", "runs", "time_limit")
BENCH_COLUMNS = ("instance", "n", "k", "algo", "mean_obj", "sigma_pct", "mean_t_best", "runs", "seed_base")


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared helpers


def _load_instance(path: str) -> Graph:
    try:
        return load_edge_list(path)
    except OSError as e:
        raise CliError(f"cannot read instance {path}: {e.strerror or e}") from e


def _check_k(g: Graph, k: int) -> None:
    if k < 1:
        raise CliError("k must be >= 1")
    if k > g.n:
        raise CliError(f"k exceeds n (k={k}, n={g.n})")


def feasibility_mode(g: Graph, k: int, bound: int = DEFAULT_BOUND) -> str:
    """``exact`` when every k-subset is enumerated, ``quasi`` otherwise."""
    return "exact" if comb(g.n, k) < bound else "quasi"


def non_defended(g: Graph, labels, k: int, mode: str, *, cutoff: int = DEFAULT_CUTOFF,
                 tries: int = DEFAULT_TRIES, bound: int = DEFAULT_BOUND,
                 ball_radius: int = DEFAULT_BALL_RADIUS) -> int:
    """The count ``verify`` reports: the matching oracle over all attacks in
    exact mode, quasi verification (seed 0, epoch 0) on the intense
    attacks otherwise."""
    if mode == "exact":
        return count_failing_attacks(g, labels, k)
    attacks = generate_attacks(g, k, bound, ball_radius)
    count, _ = quasi_infeasibility(g, labels, attacks.intense, cutoff, tries, with_coverage=False)
    return count


def run_record(instance: str, path: str, k: int, algo: str, seed: int, cfg: SolverConfig,
               omit_timing: bool = False) -> dict:
    """Solve once and describe the result as a JSON-ready dict."""
    g = _load_instance(path)
    _check_k(g, k)
    t0 = time.perf_counter()
    iterations = 0
    if algo == "vns":
        rep = vns_solve(g, cfg)
        sol, t_best, iterations = rep.solution, rep.time_to_best, rep.iterations
    elif algo == "greedy":
        sol = greedy(g, k)
        t_best = time.perf_counter() - t0
    elif algo == "exact":
        _, sol = brute_force_optimum(g, k)
        t_best = time.perf_counter() - t0
    else:
        raise CliError(f"unknown algorithm {algo!r}")
    total = time.perf_counter() - t0
    mode = "exact" if algo == "exact" else feasibility_mode(g, k, cfg.comb_take_all_bound)
    nd = non_defended(g, sol.labels, k, mode, cutoff=cfg.cutoff, tries=cfg.tries,
                      bound=cfg.comb_take_all_bound, ball_radius=cfg.ball_radius)
    config = {
        "r_min": cfg.r_min, "r_max": cfg.r_max, "move_prob": cfg.move_prob,
        "cutoff": cfg.cutoff, "tries": cfg.tries, "attack_bound": cfg.comb_take_all_bound,
        "ball_radius": cfg.ball_radius, "time_limit": cfg.t_max, "max_iters": cfg.iter_max,
    }
    return {
        "instance": instance,
        "n": g.n,
        "k": k,
        "algorithm": algo,
        "objective": sol.weight,
        "labels": list(sol.labels),
        "mode": mode,
        "non_defended": nd,
        "time_to_best": None if omit_timing else round(t_best, 6),
        "total_time": None if omit_timing else round(total, 6),
        "iterations": iterations,
        "seed": seed,
        "config": config,
    }


def summarize(objectives, t_best) -> dict:
    """Mean objective, population relative standard deviation in percent,
    and mean time-to-best (None when timings were omitted)."""
    mean = statistics.fmean(objectives)
    sigma = statistics.pstdev(objectives) / mean * 100 if mean else 0.0
    tb = [t for t in t_best if t is not None]
    return {
        "mean_obj": mean,
        "sigma_pct": sigma,
        "mean_t_best": statistics.fmean(tb) if tb and len(tb) == len(t_best) else None,
        "runs": len(objectives),
    }


def _config_from(args, k: int, seed: int, time_limit: float | None = None) -> SolverConfig:
    try:
        return SolverConfig(
            k=k,
            r_min=args.rmin,
            r_max=args.rmax,
            move_prob=args.move_prob,
            cutoff=args.cutoff,
            tries=args.tries,
            comb_take_all_bound=args.attack_bound,
            ball_radius=args.ball_radius,
            t_max=args.time_limit if time_limit is None else time_limit,
            iter_max=args.max_iters,
            seed=seed,
        )
    except ValueError as e:
        raise CliError(str(e)) from e


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=300.0, help="seconds per run (default 300)")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--rmin", type=int, default=1)
    p.add_argument("--rmax", type=int, default=10)
    p.add_argument("--move-prob", type=float, default=0.5)
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    p.add_argument("--tries", type=int, default=DEFAULT_TRIES)
    p.add_argument("--attack-bound", type=int, default=DEFAULT_BOUND,
                   help="enumerate all k-subsets below this many (default 50000)")
    p.add_argument("--ball-radius", type=int, default=DEFAULT_BALL_RADIUS)
    p.add_argument("--omit-timing", action="store_true",
                   help="write null timings so repeated runs are byte-identical")


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    if args.runs < 1:
        raise CliError("--runs must be >= 1")
    g = _load_instance(args.instance)
    _check_k(g, args.k)
    name = Path(args.instance).stem
    out = sys.stdout
    records = []
    for r in range(args.runs):
        seed = args.seed + r
        rec = run_record(name, args.instance, args.k, args.algo, seed,
                         _config_from(args, args.k, seed), args.omit_timing)
        records.append(rec)
        out.write(json.dumps(rec) + "\n")
        out.flush()
    if args.summary:
        s = summarize([r["objective"] for r in records], [r["time_to_best"] for r in records])
        out.write(json.dumps({"summary": {"instance": name, "k": args.k, "algorithm": args.algo, **s}}) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def parse_labels(text: str) -> list[int]:
    """Labels from a file path or an inline list such as ``1,0,2`` or ``[1 0 2]``."""
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            text = fh.read()
    tokens = [t for t in re.split(r"[\s,\[\]]+", text) if t]
    try:
        return [int(t) for t in tokens]
    except ValueError as e:
        raise CliError(f"labels must be integers: {e}") from e


def cmd_verify(args) -> int:
    g = _load_instance(args.instance)
    _check_k(g, args.k)
    try:
        sol = Solution.checked(parse_labels(args.labels), g, args.k)
    except SolutionError as e:
        raise CliError(str(e)) from e
    if args.mode == "exact":
        count = count_failing_attacks(g, sol, args.k)
        first = first_failing_attack(g, sol, args.k) if count else None
    else:
        attacks = generate_attacks(g, args.k, args.attack_bound, args.ball_radius)
        count, info = quasi_infeasibility(g, sol, attacks.intense, args.cutoff, args.tries)
        first = attacks.intense[int(info.failed[0])] if count else None
    if count == 0:
        print(f"feasible ({args.mode}): weight {sol.weight}, 0 non-defended attacks")
        return EXIT_OK
    print(f"infeasible ({args.mode}): weight {sol.weight}, {count} non-defended attacks")
    print("first failing attack: " + " ".join(map(str, first)))
    return EXIT_INFEASIBLE


# ---------------------------------------------------------------------------
# gen


def _write_output(data: bytes, out: str | None) -> None:
    if out is None:
        # a redirected stdout (e.g. StringIO) may have no binary buffer
        stream = getattr(sys.stdout, "buffer", None)
        if stream is None:
            sys.stdout.write(data.decode())
        else:
            sys.stdout.flush()
            stream.write(data)
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def cmd_gen_unit_disc(args) -> int:
    try:
        g = gen_unit_disc(UnitDiscParams(args.n, args.radius, args.seed))
    except InstanceError as e:
        raise CliError(str(e)) from e
    _write_output(write_edge_list(g), args.out)
    return EXIT_OK


def cmd_gen_geojson(args) -> int:
    try:
        regions = RegionSet.from_geojson(Path(args.file), args.id_property)
        g, ids = geojson_to_graph(regions, args.tol)
    except OSError as e:
        raise CliError(f"cannot read {args.file}: {e.strerror or e}") from e
    except (InstanceError, json.JSONDecodeError) as e:
        raise CliError(f"{args.file}: {e}") from e
    _write_output(write_edge_list(g), args.out)
    sidecar = args.map or (args.out + ".ids.csv" if args.out else None)
    if sidecar:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", "region_id"])
        w.writerows(enumerate(ids))
        with open(sidecar, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def read_manifest(path: str) -> list[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
            header = rows and list(rows[0]) or None
    except OSError as e:
        raise CliError(f"cannot read manifest {path}: {e.strerror or e}") from e
    base = Path(path).parent
    out = []
    for i, row in enumerate(rows, start=2):
        missing = [c for c in MANIFEST_COLUMNS if not (row.get(c) or "").strip()]
        if missing:
            raise CliError(f"{path}:{i}: missing {', '.join(missing)} (header {header})")
        try:
            item = {
                "instance": str(base / row["instance"].strip()),
                "k": int(row["k"]),
                "algo": row["algo"].strip(),
                "runs": int(row["runs"]),
                "time_limit": float(row["time_limit"]),
            }
        except ValueError as e:
            raise CliError(f"{path}:{i}: {e}") from e
        if item["algo"] not in ("vns", "greedy", "exact"):
            raise CliError(f"{path}:{i}: unknown algo {item['algo']!r}")
        if item["runs"] < 1:
            raise CliError(f"{path}:{i}: runs must be >= 1")
        if not os.path.isfile(item["instance"]):
            raise CliError(f"{path}:{i}: missing instance file {item['instance']}")
        out.append(item)
    return out


def _bench_job(job):
    instance, path, k, algo, seed, cfg, omit = job
    rec = run_record(instance, path, k, algo, seed, cfg, omit)
    return rec["n"], rec["objective"], rec["time_to_best"]


def _fmt(x) -> str:
    return "" if x is None else f"{x:.6g}"


def cmd_bench(args) -> int:
    rows = read_manifest(args.manifest)
    jobs = []
    for ri, row in enumerate(rows):
        # an exact optimum is the same on every run; compute it once
        nruns = 1 if row["algo"] == "exact" else row["runs"]
        for r in range(nruns):
            seed = args.seed_base + r
            cfg = _config_from(args, row["k"], seed, row["time_limit"])
            jobs.append((ri, (Path(row["instance"]).stem, row["instance"], row["k"], row["algo"],
                              seed, cfg, args.omit_timing)))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            results = list(ex.map(_bench_job, [j for _, j in jobs]))
    else:
        results = [_bench_job(j) for _, j in jobs]

    per_row: dict[int, list] = {}
    for (ri, _), res in zip(jobs, results):
        per_row.setdefault(ri, []).append(res)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for ri, row in enumerate(rows):
        res = per_row[ri]
        s = summarize([o for _, o, _ in res], [t for _, _, t in res])
        w.writerow([Path(row["instance"]).stem, res[0][0], row["k"], row["algo"], _fmt(s["mean_obj"]),
                    _fmt(s["sigma_pct"]), _fmt(s["mean_t_best"]), row["runs"], args.seed_base])
    _write_output(buf.getvalue().encode(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ksrd", description="k-strong Roman domination solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance, one JSON line per run")
    p.add_argument("--instance", required=True, help="edge-list file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--algo", choices=("vns", "greedy", "exact"), default="vns")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--summary", action="store_true",
                   help="append a line with mean objective, sigma%% and mean time-to-best")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a labeling")
    p.add_argument("--instance", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--labels", required=True, help="file or inline list, e.g. 1,0,2,1,1")
    p.add_argument("--mode", choices=("exact", "quasi"), default="exact")
    p.add_argument("--cutoff", type=int, default=DEFAULT_CUTOFF)
    p.add_argument("--tries", type=int, default=DEFAULT_TRIES)
    p.add_argument("--attack-bound", type=int, default=DEFAULT_BOUND)
    p.add_argument("--ball-radius", type=int, default=DEFAULT_BALL_RADIUS)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate an instance file")
    gsub = p.add_subparsers(dest="generator", required=True)
    q = gsub.add_parser("unit-disc", help="random unit-disc graph in the unit square")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--radius", type=float, required=True)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_gen_unit_disc)
    q = gsub.add_parser("from-geojson", help="Queen adjacency of GeoJSON polygons")
    q.add_argument("file")
    q.add_argument("--tol", type=float, default=1e-9, help="contact tolerance in map units")
    q.add_argument("--id-property", help="feature property holding the region id")
    q.add_argument("--out")
    q.add_argument("--map", help="node to region-id CSV (default: <out>.ids.csv)")
    q.set_defaults(func=cmd_gen_geojson)

    p = sub.add_parser("bench", help="aggregate runs over a manifest into a CSV table")
    p.add_argument("--manifest", required=True, help="CSV with columns " + ",".join(MANIFEST_COLUMNS))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, InstanceError, GraphError, BudgetExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
