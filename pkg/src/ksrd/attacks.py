"""Predefined attack sets.

An attack is a sorted tuple of ``k`` distinct nodes. When the number of all
k-subsets is below ``bound`` every attack is used. Otherwise the *intense*
set is the union of k-subsets of all radius-``ball_radius`` balls, and the
*lightweight* set (used inside local search) is either the intense set, if
small enough, or the union of k-subsets of closed neighborhoods.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable

from .graph import Graph

Attack = tuple[int, ...]

DEFAULT_BOUND = 50_000
DEFAULT_BALL_RADIUS = 3


@dataclass(frozen=True)
class AttackSets:
    intense: tuple[Attack, ...]
    lightweight: tuple[Attack, ...]
    exhaustive: bool
    k: int

    @property
    def lightweight_is_intense(self) -> bool:
        return self.lightweight is self.intense or self.lightweight == self.intense


def k_combinations(nodes: Iterable[int], k: int) -> list[Attack]:
    return list(combinations(sorted(set(nodes)), k))


def _maximal_sets(sets: Iterable[frozenset[int]], k: int) -> list[frozenset[int]]:
    # k-subsets of a set contained in another kept set add nothing
    kept: list[frozenset[int]] = []
    for s in sorted({s for s in sets if len(s) >= k}, key=lambda s: (-len(s), sorted(s))):
        if not any(s <= t for t in kept):
            kept.append(s)
    return kept


def _union_of_combinations(sets: Iterable[frozenset[int]], k: int) -> tuple[Attack, ...]:
    kept = _maximal_sets(sets, k)
    if len(kept) == 1:
        return tuple(combinations(sorted(kept[0]), k))
    seen: set[Attack] = set()
    for s in kept:
        seen.update(combinations(sorted(s), k))
    return tuple(sorted(seen))


def generate_attacks(
    g: Graph, k: int, bound: int = DEFAULT_BOUND, ball_radius: int = DEFAULT_BALL_RADIUS
) -> AttackSets:
    if k < 1:
        raise ValueError("k must be >= 1")
    if g.n < k:
        raise ValueError(f"k={k} exceeds the number of nodes n={g.n}")
    if comb(g.n, k) < bound:
        everything = tuple(combinations(range(g.n), k))
        return AttackSets(everything, everything, True, k)

    intense = _union_of_combinations((g.ball(v, ball_radius) for v in range(g.n)), k)
    exhaustive = len(intense) == comb(g.n, k)
    if len(intense) <= bound:
        lightweight = intense
    else:
        lightweight = _union_of_combinations(
            (g.closed_neighborhood(v) for v in range(g.n)), k
        )
    return AttackSets(intense, lightweight, exhaustive, k)
