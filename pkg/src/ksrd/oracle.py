"""Brute-force ground truth for small instances."""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Iterator

from .defense import Solution, defend_exact, label_cap
from .graph import Graph

MAX_ATTACKS = 10**7
MAX_LABELINGS = 10**8


class BudgetExceeded(RuntimeError):
    pass


def exact_feasible(g: Graph, s, k: int, max_attacks: int = MAX_ATTACKS) -> bool:
    return first_failing_attack(g, s, k, max_attacks) is None


def first_failing_attack(g: Graph, s, k: int, max_attacks: int = MAX_ATTACKS):
    """Lexicographically first undefendable k-attack, or None."""
    if comb(g.n, k) > max_attacks:
        raise BudgetExceeded(f"C({g.n}, {k}) attacks exceed the budget of {max_attacks}")
    for attack in combinations(range(g.n), k):
        if not defend_exact(g, s, attack).defended:
            return attack
    return None


def count_failing_attacks(g: Graph, s, k: int, max_attacks: int = MAX_ATTACKS) -> int:
    if comb(g.n, k) > max_attacks:
        raise BudgetExceeded(f"C({g.n}, {k}) attacks exceed the budget of {max_attacks}")
    return sum(
        1 for attack in combinations(range(g.n), k) if not defend_exact(g, s, attack).defended
    )


def _compositions(total: int, parts: int, cap: int) -> Iterator[list[int]]:
    """All vectors of ``parts`` ints in ``[0, cap]`` summing to ``total``."""
    vec = [0] * parts

    def rec(i, left):
        if i == parts - 1:
            if left <= cap:
                vec[i] = left
                yield vec
            return
        # the remaining slots can absorb at most cap each
        lo = max(0, left - cap * (parts - 1 - i))
        for x in range(min(cap, left), lo - 1, -1):
            vec[i] = x
            yield from rec(i + 1, left - x)

    if parts == 0:
        return
    yield from rec(0, total)


def _count_compositions(total: int, parts: int, cap: int) -> int:
    # inclusion-exclusion over parts exceeding cap
    return sum(
        (-1) ** j * comb(parts, j) * comb(total - j * (cap + 1) + parts - 1, parts - 1)
        for j in range(parts + 1)
        if total - j * (cap + 1) >= 0
    )


def brute_force_optimum(
    g: Graph,
    k: int,
    weight_cap: int | None = None,
    max_attacks: int = MAX_ATTACKS,
    max_labelings: int = MAX_LABELINGS,
) -> tuple[int, Solution]:
    """Minimum weight of a proper labeling, by iterative deepening on weight.

    Every labeling of weight ``w`` (labels within ``[0, min(max_degree, k) + 1]``)
    is tested against all ``C(n, k)`` attacks with the matching oracle; the
    first weight with a feasible labeling is optimal. The all-ones labeling
    bounds the search at ``w = n``.
    """
    n = g.n
    if n < k:
        raise ValueError(f"k={k} exceeds n={n}")
    if comb(n, k) > max_attacks:
        raise BudgetExceeded(f"C({n}, {k}) attacks exceed the budget of {max_attacks}")
    cap = label_cap(g, k)
    top = n if weight_cap is None else min(weight_cap, n)
    attacks = list(combinations(range(n), k))
    adj = g.adjacency
    explored = 0
    for w in range(top + 1):
        explored += _count_compositions(w, n, cap)
        if explored > max_labelings:
            raise BudgetExceeded(f"more than {max_labelings} labelings to enumerate")
        last_bad = None
        for labels in _compositions(w, n, cap):
            # a single attacked 0-node needs a neighbor with label >= 2
            if any(x == 0 and not any(labels[u] >= 2 for u in adj[v]) for v, x in enumerate(labels)):
                continue
            if last_bad is not None and not defend_exact(g, labels, last_bad).defended:
                continue
            for attack in attacks:
                if not defend_exact(g, labels, attack).defended:
                    last_bad = attack
                    break
            else:
                return w, Solution(tuple(labels))
    raise BudgetExceeded(f"no feasible labeling with weight <= {top}")
