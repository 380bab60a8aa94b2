"""Variable neighborhood search for k-strong Roman domination.

The search keeps an incumbent that passed verification on the intense attack
set. Each iteration shakes the incumbent (``r`` increments, ``r + 1``
label-weighted decrements), repairs it with a first-improvement local search
over pairwise label redistributions scored on the lightweight attack set,
and verifies promising results on the intense set before accepting them.

Note the comparison in the acceptance test mixes two attack sets: the
candidate's fitness counts lightweight failures while the incumbent's counts
intense failures. This asymmetry is deliberate and kept as designed.
"""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from ._kernels import ON_RAISE
from .attacks import DEFAULT_BALL_RADIUS, DEFAULT_BOUND, AttackSets, generate_attacks
from .defense import (
    DEFAULT_CUTOFF,
    DEFAULT_TRIES,
    MAX_CUTOFF,
    CoverageInfo,
    Solution,
    attacks_array,
    label_cap,
    quasi_infeasibility,
)
from .graph import Graph
from .greedy import greedy

TIME_CHECK_EVERY = 1000
_SEED_MASK = (1 << 63) - 1


class Fitness(NamedTuple):
    """Lexicographic (non-defended attacks, label sum); smaller is better."""

    infeasibility: int
    weight: int


@dataclass(frozen=True)
class SolverConfig:
    k: int
    r_min: int = 1
    r_max: int = 10
    move_prob: float = 0.5
    cutoff: int = DEFAULT_CUTOFF
    tries: int = DEFAULT_TRIES
    comb_take_all_bound: int = DEFAULT_BOUND
    ball_radius: int = DEFAULT_BALL_RADIUS
    t_max: float = 300.0
    iter_max: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 1 <= self.r_min <= self.r_max:
            raise ValueError("need 1 <= r_min <= r_max")
        if not 0.0 <= self.move_prob <= 1.0:
            raise ValueError("move_prob must lie in [0, 1]")
        if self.cutoff < 1 or self.tries < 1:
            raise ValueError("cutoff and tries must be >= 1")
        if self.iter_max < 0 or self.t_max < 0:
            raise ValueError("limits must be non-negative")
        if self.ball_radius < 0 or self.comb_take_all_bound < 0:
            raise ValueError("ball_radius and comb_take_all_bound must be non-negative")


@dataclass
class RunReport:
    solution: Solution
    fitness: Fitness
    iterations: int
    time_to_best: float
    total_time: float
    mode: str
    seed: int
    greedy_fitness: Fitness
    config: SolverConfig = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "labels": list(self.solution.labels),
            "objective": self.solution.weight,
            "non_defended": self.fitness.infeasibility,
            "iterations": self.iterations,
            "time_to_best": self.time_to_best,
            "total_time": self.total_time,
            "mode": self.mode,
            "seed": self.seed,
            "greedy_objective": self.greedy_fitness.weight,
            "config": asdict(self.config),
        }


# ---------------------------------------------------------------------------
# shaking


def shake(s: Solution, r: int, rng: random.Random, cap: int, *, return_counts: bool = False):
    """``r`` uniform increments on nodes below ``cap``, then ``r + 1``
    decrements drawn with probability proportional to the current label.
    Steps with no eligible node are skipped.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    labels = list(s.labels)
    n = len(labels)
    inc = dec = 0
    for _ in range(r):
        eligible = [v for v in range(n) if labels[v] < cap]
        if not eligible:
            break
        labels[rng.choice(eligible)] += 1
        inc += 1
    for _ in range(r + 1):
        if not any(labels):
            break
        v = rng.choices(range(n), weights=labels)[0]
        labels[v] -= 1
        dec += 1
    out = Solution(tuple(labels))
    return (out, inc, dec) if return_counts else out


# ---------------------------------------------------------------------------
# local search


def two_decompositions(a: int, b: int, cap: int) -> list[tuple[int, int]]:
    total = a + b
    return [
        (x, total - x)
        for x in range(max(0, total - cap), min(cap, total) + 1)
        if x != a
    ]


def recheck_sets(
    prev: CoverageInfo, s: Solution, s2: Solution, changed: Sequence[int], attacks=None
) -> tuple[set[int], set[int]]:
    """Attack indices re-evaluated by :func:`incremental_recheck`, split into
    (previously failed, previously defended).

    With ``attacks`` given, failed entries that a 0 -> 1 raise of a node
    outside the attack cannot affect are dropped too, as the kernel does.
    """
    failed_re: set[int] = set()
    defended_re: set[int] = set()
    for x in set(changed):
        old, new = s.labels[x], s2.labels[x]
        if new == old:
            continue
        for idx in prev.failed_touch(x, old, new):
            if attacks is not None and old == 0 and new == 1 and x not in attacks[idx]:
                kind = _failed_kind(prev, x, idx)
                if kind == ON_RAISE:
                    continue
            failed_re.add(idx)
        defended_re.update(prev.sensitive(x, old, new))
        if new < old:
            defended_re.update(prev.defenders(x, below=new))
    return failed_re, defended_re


def _failed_kind(prev: CoverageInfo, x: int, idx: int) -> int:
    lo, hi = prev.failed_touch_ptr[x], prev.failed_touch_ptr[x + 1]
    pos = np.flatnonzero(prev.failed_touch_idx[lo:hi] == idx)[0]
    return int(prev.failed_touch_kind[lo + pos])


def _buffers(g: Graph, k: int):
    return _kernels.make_buffers(g.n, k, max(g.max_degree, 1))


def incremental_recheck(
    g: Graph,
    prev: CoverageInfo,
    s: Solution,
    s2: Solution,
    changed: Sequence[int],
    attacks,
    cutoff: int = DEFAULT_CUTOFF,
    tries: int = DEFAULT_TRIES,
    seed: int = 0,
    epoch: int = 0,
    limit: int | None = None,
) -> int:
    """Non-defended count of ``s2`` reusing ``prev``, the coverage of ``s``.

    ``s2`` may differ from ``s`` only at the nodes in ``changed``. Only the
    attacks in :func:`recheck_sets` are re-evaluated; every other attack
    keeps its verdict. Lowering a label elsewhere leaves the recorded
    defense valid, raising one only adds options, and an attack whose
    evaluation reads no changed label repeats its previous computation (its
    roulette stream is tied to ``(seed, epoch, index)``). Hence the result
    equals a full recount with the same ``seed`` and ``epoch``.

    Sensitivity to promotions is recorded one node at a time. A pairwise
    split promotes at most one node; if ``changed`` promotes several, the
    count is recomputed from scratch.

    With ``limit`` the evaluation may stop once the count is known to be
    ``>= limit``; the value returned is then only a lower bound.
    """
    pairs = [(x, s.labels[x]) for x in sorted(set(changed)) if s2.labels[x] != s.labels[x]]
    if not pairs:
        return len(prev.failed)
    if sum(old <= 1 < s2.labels[x] for x, old in pairs) > 1:
        count, _ = quasi_infeasibility(g, s2, attacks, cutoff, tries, seed, epoch, with_coverage=False)
        return count
    arr = attacks_array(attacks)
    indptr, indices = g.csr
    amark = np.zeros(len(arr), dtype=np.int64)
    labels = np.asarray(s2.labels, dtype=np.int64)
    lptr = np.empty(g.n + 1, dtype=np.int64)
    lidx = np.empty(len(indices), dtype=np.int64)
    _kernels.lender_csr(labels, indptr, indices, lptr, lidx)
    return int(_kernels.recheck(
        labels, lptr, lidx, arr, *prev.csr(), len(prev.failed),
        np.array([x for x, _ in pairs], dtype=np.int64), np.array([o for _, o in pairs], dtype=np.int64),
        min(int(cutoff), MAX_CUTOFF), int(tries), seed & _SEED_MASK, epoch & _SEED_MASK,
        -1 if limit is None else int(limit), amark, 1, *_buffers(g, arr.shape[1]),
    ))


def local_search(
    g: Graph,
    s: Solution,
    attacks,
    cutoff: int = DEFAULT_CUTOFF,
    tries: int = DEFAULT_TRIES,
    rng: random.Random | None = None,
    *,
    cap: int,
    seed: int = 0,
    epoch: int = 0,
    deadline: float | None = None,
) -> tuple[Solution, Fitness]:
    """First-improvement search over pairwise label redistributions.

    Node pairs ``i < j`` are visited in shuffled order and every other split
    of ``labels[i] + labels[j]`` is tried. The first split that lowers the
    non-defended count is kept and the scan restarts on a fresh shuffle.
    Stops when the count reaches zero, after a scan without improvement, or
    at ``deadline`` (checked every ``TIME_CHECK_EVERY`` candidates).

    Pairs where neither node is read by any failed attack are skipped: such
    a split cannot repair anything, so the count cannot drop.
    """
    rng = rng or random.Random(0)
    arr = attacks_array(attacks)
    n = g.n
    labels = np.asarray(s.labels, dtype=np.int64).copy()
    weight = s.weight
    base, info = quasi_infeasibility(g, labels, arr, cutoff, tries, seed, epoch)
    if base == 0 or n < 2:
        return s, Fitness(base, weight)
    indptr, indices = g.csr
    cut = min(int(cutoff), MAX_CUTOFF)
    seed63, epoch63 = seed & _SEED_MASK, epoch & _SEED_MASK
    iu, ju = np.triu_indices(n, 1)
    iu = iu.astype(np.int64)
    ju = ju.astype(np.int64)
    order = list(range(len(iu)))
    amark = np.zeros(len(arr), dtype=np.int64)
    stamp = 0
    while True:
        rng.shuffle(order)
        perm = np.array(order, dtype=np.int64)
        pi, pj = iu[perm], ju[perm]
        hot = np.diff(info.failed_touch_ptr) > 0
        pos = 0
        found = False
        while pos < len(pi):
            found, pos, _, stamp, count = _kernels.scan_pairs(
                labels, pi, pj, pos, TIME_CHECK_EVERY, cap, hot, base,
                indptr, indices, arr, *info.csr(), len(info.failed),
                cut, int(tries), seed63, epoch63, amark, stamp,
            )
            if found:
                break
            if deadline is not None and time.perf_counter() > deadline:
                return Solution(tuple(labels.tolist())), Fitness(base, weight)
        if not found:
            return Solution(tuple(labels.tolist())), Fitness(base, weight)
        if count == 0:
            return Solution(tuple(labels.tolist())), Fitness(0, weight)
        base, info = quasi_infeasibility(g, labels, arr, cutoff, tries, seed, epoch)
        if base == 0:
            return Solution(tuple(labels.tolist())), Fitness(0, weight)
        if deadline is not None and time.perf_counter() > deadline:
            return Solution(tuple(labels.tolist())), Fitness(base, weight)


# ---------------------------------------------------------------------------
# main loop

ProgressSink = Callable[[int, Fitness, float], None]


def vns_solve(
    g: Graph,
    cfg: SolverConfig,
    progress: ProgressSink | None = None,
    attack_sets: AttackSets | None = None,
) -> RunReport:
    if g.n < cfg.k:
        raise ValueError(f"k={cfg.k} exceeds the number of nodes n={g.n}")
    t0 = time.perf_counter()
    attacks = attack_sets or generate_attacks(g, cfg.k, cfg.comb_take_all_bound, cfg.ball_radius)
    intense, light = attacks.intense, attacks.lightweight
    cap = label_cap(g, cfg.k)
    rng = random.Random(cfg.seed)
    deadline = t0 + cfg.t_max

    best = greedy(g, cfg.k)
    epoch = 0
    count, _ = quasi_infeasibility(
        g, best, intense, cfg.cutoff, cfg.tries, cfg.seed, epoch, with_coverage=False
    )
    best_fit = Fitness(count, best.weight)
    greedy_fit = best_fit
    t_best = time.perf_counter() - t0

    it = 0
    while time.perf_counter() < deadline and it < cfg.iter_max:
        for r in range(cfg.r_min, cfg.r_max + 1):
            if it >= cfg.iter_max or time.perf_counter() >= deadline:
                break
            it += 1
            shaken = shake(best, r, rng, cap)
            epoch += 1
            cand, fit = local_search(
                g, shaken, light, cfg.cutoff, cfg.tries, rng,
                cap=cap, seed=cfg.seed, epoch=epoch, deadline=deadline,
            )
            accepted = False
            if fit < best_fit or (fit == best_fit and cfg.move_prob < rng.random()):
                epoch += 1
                bad, _ = quasi_infeasibility(
                    g, cand, intense, cfg.cutoff, cfg.tries, cfg.seed, epoch, stop_after=1
                )
                if bad == 0:
                    if cand.weight < best.weight or best_fit.infeasibility > 0:
                        t_best = time.perf_counter() - t0
                    best, best_fit = cand, Fitness(0, cand.weight)
                    accepted = True
            if progress is not None:
                progress(it, best_fit, time.perf_counter() - t0)
            if accepted:
                break

    return RunReport(
        solution=best,
        fitness=best_fit,
        iterations=it,
        time_to_best=t_best,
        total_time=time.perf_counter() - t0,
        mode="exact" if attacks.exhaustive else "quasi",
        seed=cfg.seed,
        greedy_fitness=greedy_fit,
        config=cfg,
    )
