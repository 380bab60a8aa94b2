from __future__ import annotations

from .defense import Solution, label_cap
from .graph import Graph


def greedy(g: Graph, k: int) -> Solution:
    """Coverage-based constructive heuristic.

    Repeatedly labels the unlabeled node ``v`` with the most not-yet-covered
    nodes in its closed neighborhood (its gain). Ties go to uncovered nodes,
    then to the smallest id. The chosen node gets ``gain + 1`` if it was
    already covered (it keeps one army for itself), ``gain`` otherwise,
    capped at ``min(k + 1, max_degree + 1)``; its closed neighborhood then
    becomes covered. Stops once every node is covered.
    """
    n = g.n
    cap = min(k + 1, label_cap(g, k))
    labels = [0] * n
    covered = [False] * n
    labeled = [False] * n
    remaining = n
    closed = [(v,) + g.adjacency[v] for v in range(n)]
    while remaining:
        best_key, best_v = None, -1
        for v in range(n):
            if labeled[v]:
                continue
            gain = sum(1 for u in closed[v] if not covered[u])
            key = (gain, not covered[v], -v)
            if best_key is None or key > best_key:
                best_key, best_v = key, v
        gain, v = best_key[0], best_v
        labels[v] = min(cap, gain + (1 if covered[v] else 0))
        labeled[v] = True
        for u in closed[v]:
            if not covered[u]:
                covered[u] = True
                remaining -= 1
    return Solution(tuple(labels))
