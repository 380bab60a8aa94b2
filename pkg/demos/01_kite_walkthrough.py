"""
Defending a five-node graph
===========================

A small walk through the core objects: a graph, a labeling, single attacks,
the exact oracle, the greedy constructor and the search.
"""

from __future__ import annotations

from itertools import combinations

from ksrd import (
    SolverConfig,
    brute_force_optimum,
    defend_exact,
    exact_feasible,
    from_edges,
    greedy,
    is_attack_defended,
    vns_solve,
)

# triangle A, B, C with pendants D (on C) and E (on B)
names = "ABCDE"
g = from_edges(5, [(0, 1), (1, 2), (2, 0), (2, 3), (1, 4)])
print(g, "degrees", g.degrees)

# C holds three armies and E one; A, B and D hold none
f = [0, 0, 3, 0, 1]


def show(attack):
    out = is_attack_defended(g, f, attack)
    who = ", ".join(f"{names[v]}<-{names[u]}" for v, u in out.assignment)
    print(f"attack {{{','.join(names[v] for v in attack)}}}: defended={out.defended} {who}")


# C can lend two armies (it keeps one), enough for A and B; E defends itself
show((0, 1, 4))
# A, B and D all rely on C, which can only spare two
show((0, 1, 3))

# the exact oracle checks every 3-node attack
bad = [a for a in combinations(range(5), 3) if not defend_exact(g, f, a).defended]
print("failing attacks:", ["".join(names[v] for v in a) for a in bad])

# a cheapest labeling that survives every 3-node attack
gamma, best = brute_force_optimum(g, 3)
print("optimum weight", gamma, "e.g.", best.labels)

# the greedy constructor and the search both find weight-5 labelings
s = greedy(g, 3)
print("greedy", s.labels, "weight", s.weight, "feasible", exact_feasible(g, s, 3))
rep = vns_solve(g, SolverConfig(k=3, iter_max=100, seed=0))
print("search", rep.solution.labels, "weight", rep.solution.weight, "mode", rep.mode)
