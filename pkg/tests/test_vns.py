from __future__ import annotations

import random
from itertools import product

import pytest
from conftest import A, E, complete, random_unit_disc
from hypothesis import given, settings
from hypothesis import strategies as st

from ksrd import (
    Fitness,
    Solution,
    SolverConfig,
    brute_force_optimum,
    exact_feasible,
    generate_attacks,
    greedy,
    incremental_recheck,
    label_cap,
    local_search,
    quasi_infeasibility,
    shake,
    two_decompositions,
    vns_solve,
)
from ksrd.vns import recheck_sets

ALL10 = generate_attacks(complete(5), 3).intense


# --- shake --------------------------------------------------------------------


def test_shake_unconstrained():
    s = Solution((2, 3, 4, 1))
    for seed in range(20):
        out, inc, dec = shake(s, 2, random.Random(seed), cap=10, return_counts=True)
        assert (inc, dec) == (2, 3)
        assert out.weight == 9


def test_shake_all_zero():
    out = shake(Solution((0, 0, 0)), 1, random.Random(0), cap=3)
    assert out.labels == (0, 0, 0)


def test_shake_saturated():
    out, inc, dec = shake(Solution((3, 3, 3)), 1, random.Random(0), cap=3, return_counts=True)
    assert (inc, dec) == (0, 2) and out.weight == 7


def test_shake_rejects_r0():
    with pytest.raises(ValueError):
        shake(Solution((1,)), 0, random.Random(0), cap=2)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=12), st.integers(1, 10), st.integers(0, 10**6))
def test_shake_weight_delta(labels, r, seed):
    s = Solution(tuple(labels))
    out, inc, dec = shake(s, r, random.Random(seed), cap=4, return_counts=True)
    assert out.weight == s.weight + inc - dec
    assert all(0 <= x <= 4 for x in out.labels)


# --- 2-decompositions ---------------------------------------------------------


def test_two_decompositions():
    assert two_decompositions(2, 3, 5) == [(0, 5), (1, 4), (3, 2), (4, 1), (5, 0)]
    assert two_decompositions(0, 0, 7) == []
    assert two_decompositions(3, 3, 4) == [(2, 4), (4, 2)]


@given(st.integers(0, 6), st.integers(0, 6), st.integers(1, 6))
def test_two_decompositions_property(a, b, cap):
    a, b = min(a, cap), min(b, cap)
    got = two_decompositions(a, b, cap)
    expected = [(x, y) for x in range(cap + 1) for y in range(cap + 1) if x + y == a + b and x != a]
    assert got == expected


# --- local search -------------------------------------------------------------


def test_local_search_kite5_weight4(g1):
    # moves keep the weight and the optimum is 5, so one failure must remain
    attacks = generate_attacks(g1, 3).intense
    s, fit = local_search(g1, Solution((0, 0, 3, 0, 1)), attacks, cap=4)
    assert s.weight == 4 and fit == Fitness(1, 4)


def test_local_search_kite5_weight5(g1):
    attacks = generate_attacks(g1, 3).intense
    starts = [f for f in product(range(5), repeat=5) if sum(f) == 5 and quasi_infeasibility(g1, f, attacks)[0]]
    assert len(starts) > 50
    for f in starts:
        s, fit = local_search(g1, Solution(f), attacks, cap=4)
        assert fit == Fitness(0, 5)
        assert exact_feasible(g1, s, 3)


def test_local_search_keeps_feasible(g1):
    s0 = Solution((1, 0, 2, 1, 1))
    s, fit = local_search(g1, s0, generate_attacks(g1, 3).intense, cap=4)
    assert s == s0 and fit == Fitness(0, 5)


def test_local_search_terminates_on_zero():
    g = complete(2)
    s, fit = local_search(g, Solution((0, 0)), [(0, 1)], cap=2)
    assert s.weight == 0 and fit.infeasibility == 1


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1 << 30))
def test_local_search_preserves_weight_and_never_worsens(seed):
    rnd = random.Random(seed)
    g = random_unit_disc(rnd, 4, 18)
    k = rnd.randint(1, min(3, g.n))
    cap = label_cap(g, k)
    attacks = generate_attacks(g, k).lightweight
    s0 = Solution(tuple(rnd.randint(0, cap) for _ in range(g.n)))
    before, _ = quasi_infeasibility(g, s0, attacks, seed=seed, epoch=2)
    s, fit = local_search(g, s0, attacks, rng=rnd, cap=cap, seed=seed, epoch=2)
    assert s.weight == s0.weight == fit.weight
    assert fit.infeasibility <= before
    assert quasi_infeasibility(g, s, attacks, seed=seed, epoch=2)[0] == fit.infeasibility


# --- incremental recheck ------------------------------------------------------


def test_recheck_identity(g1):
    s = Solution((0, 0, 3, 0, 1))
    count, info = quasi_infeasibility(g1, s, ALL10)
    assert incremental_recheck(g1, info, s, s, [0, 1], ALL10) == count


def test_recheck_kite5_pair(g1):
    s, s2 = Solution((0, 0, 3, 0, 1)), Solution((1, 0, 3, 0, 0))
    attacks = generate_attacks(g1, 3).intense
    _, info = quasi_infeasibility(g1, s, attacks)
    failed_re, defended_re = recheck_sets(info, s, s2, [A, E], attacks)
    abd = attacks.index((0, 1, 3))
    assert abd in failed_re
    # attacks E defended itself in
    assert {i for i, a in enumerate(attacks) if E in a} <= defended_re
    full, _ = quasi_infeasibility(g1, s2, attacks, with_coverage=False)
    assert incremental_recheck(g1, info, s, s2, [A, E], attacks) == full


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1 << 30))
def test_raise_only_recheck_sets(seed):
    rnd = random.Random(seed)
    g = random_unit_disc(rnd, 4, 16)
    k = rnd.randint(1, min(3, g.n))
    cap = label_cap(g, k)
    attacks = generate_attacks(g, k).lightweight
    lab = [rnd.randint(0, cap - 1) for _ in range(g.n)]
    s = Solution(tuple(lab))
    i, j = rnd.sample(range(g.n), 2) if g.n > 1 else (0, 0)
    lab[i] += 1
    lab[j] = min(cap, lab[j] + 1)
    s2 = Solution(tuple(lab))
    count, info = quasi_infeasibility(g, s, attacks, seed=seed)
    failed_re, defended_re = recheck_sets(info, s, s2, [i, j], attacks)
    assert failed_re <= set(info.failed.tolist())
    sens = set()
    for x in (i, j):
        lo, hi = info.sensitive_ptr[x], info.sensitive_ptr[x + 1]
        sens.update(int(a) for a, kd in zip(info.sensitive_idx[lo:hi], info.sensitive_kind[lo:hi]))
    assert defended_re <= sens
    full, _ = quasi_infeasibility(g, s2, attacks, seed=seed, with_coverage=False)
    assert incremental_recheck(g, info, s, s2, [i, j], attacks, seed=seed) == full


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 1 << 30))
def test_incremental_equals_full(seed):
    rnd = random.Random(seed)
    g = random_unit_disc(rnd, 4, 20)
    k = rnd.randint(1, min(3, g.n))
    cap = label_cap(g, k)
    attacks = generate_attacks(g, k, bound=rnd.choice([50, 50_000]), ball_radius=1).lightweight
    cutoff, tries = rnd.choice([2, 4, 100]), rnd.choice([1, 3])
    s = Solution(tuple(rnd.randint(0, cap) for _ in range(g.n)))
    _, info = quasi_infeasibility(g, s, attacks, cutoff, tries, seed, 5)
    i, j = rnd.sample(range(g.n), 2)
    for x, y in two_decompositions(s.labels[i], s.labels[j], cap):
        lab = list(s.labels)
        lab[i], lab[j] = x, y
        s2 = Solution(tuple(lab))
        full, _ = quasi_infeasibility(g, s2, attacks, cutoff, tries, seed, 5, with_coverage=False)
        assert incremental_recheck(g, info, s, s2, [i, j], attacks, cutoff, tries, seed, 5) == full


def test_incremental_multi_promotion_falls_back():
    rnd = random.Random(3)
    g = random_unit_disc(rnd, 12, 12)
    attacks = generate_attacks(g, 2).intense
    s = Solution((0,) * g.n)
    _, info = quasi_infeasibility(g, s, attacks)
    s2 = Solution((2, 2, 2) + (0,) * (g.n - 3))
    full, _ = quasi_infeasibility(g, s2, attacks, with_coverage=False)
    assert incremental_recheck(g, info, s, s2, [0, 1, 2], attacks) == full


# --- solver -------------------------------------------------------------------


def test_config_validation():
    for bad in (dict(k=0), dict(k=2, r_min=3, r_max=2), dict(k=2, move_prob=1.5),
                dict(k=2, cutoff=0), dict(k=2, iter_max=-1)):
        with pytest.raises(ValueError):
            SolverConfig(**bad)


def test_vns_kite5(g1):
    for seed in range(5):
        rep = vns_solve(g1, SolverConfig(k=3, seed=seed, iter_max=200))
        assert rep.solution.weight == 5 and rep.mode == "exact"
        assert exact_feasible(g1, rep.solution, 3)


def test_vns_k2():
    rep = vns_solve(complete(2), SolverConfig(k=2, iter_max=100))
    assert rep.solution.weight == 2


def test_vns_zero_iterations(g1):
    rep = vns_solve(g1, SolverConfig(k=3, iter_max=0))
    assert rep.solution == greedy(g1, 3) and rep.fitness == rep.greedy_fitness
    assert rep.iterations == 0


def test_vns_errors(g1):
    with pytest.raises(ValueError):
        vns_solve(g1, SolverConfig(k=6))


def test_vns_progress_and_report(g1):
    seen = []
    rep = vns_solve(g1, SolverConfig(k=2, iter_max=30), progress=lambda it, f, t: seen.append((it, f)))
    assert [it for it, _ in seen] == list(range(1, 31))
    d = rep.as_dict()
    assert d["objective"] == sum(d["labels"]) and d["non_defended"] == 0


def test_vns_deterministic():
    g = random_unit_disc(random.Random(4), 20, 20)
    a = vns_solve(g, SolverConfig(k=2, seed=9, iter_max=60))
    b = vns_solve(g, SolverConfig(k=2, seed=9, iter_max=60))
    assert a.solution == b.solution and a.iterations == b.iterations


def test_vns_quasi_mode_small_bound():
    g = random_unit_disc(random.Random(8), 15, 15)
    rep = vns_solve(g, SolverConfig(k=2, comb_take_all_bound=10, ball_radius=1, iter_max=60))
    assert rep.fitness.infeasibility == 0
    assert rep.solution.weight <= greedy(g, 2).weight


def test_vns_reaches_optimum_small():
    g = random_unit_disc(random.Random(21), 8, 8)
    opt, _ = brute_force_optimum(g, 2)
    assert vns_solve(g, SolverConfig(k=2, iter_max=300)).solution.weight == opt
