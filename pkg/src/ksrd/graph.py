"""Immutable simple undirected graph with neighborhood queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    ``adjacency[v]`` is a sorted tuple of neighbors. Build instances with
    :meth:`from_edges` rather than calling the constructor directly.
    """

    n: int
    adjacency: tuple[tuple[int, ...], ...]
    degrees: tuple[int, ...] = field(init=False)
    max_degree: int = field(init=False)

    def __post_init__(self):
        degrees = tuple(len(a) for a in self.adjacency)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "max_degree", max(degrees, default=0))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        if n < 1:
            raise GraphError("graph needs at least one node")
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside [0, {n})")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    def edges(self) -> list[tuple[int, int]]:
        """Canonical edge list, ``u < v``, sorted."""
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` int64 arrays of the adjacency lists."""
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter(
            (u for a in self.adjacency for u in a), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices

    @property
    def m(self) -> int:
        return sum(self.degrees) // 2

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise GraphError(f"node {v} out of range [0, {self.n})")

    def closed_neighborhood(self, v: int) -> frozenset[int]:
        self._check(v)
        return frozenset(self.adjacency[v]).union((v,))

    def ball(self, v: int, radius: int) -> frozenset[int]:
        """Nodes at hop distance at most ``radius`` from ``v`` (``v`` included)."""
        self._check(v)
        if radius < 0:
            raise GraphError("radius must be non-negative")
        seen = {v}
        frontier = deque([(v, 0)])
        while frontier:
            u, d = frontier.popleft()
            if d == radius:
                continue
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    frontier.append((w, d + 1))
        return frozenset(seen)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.adjacency == other.adjacency

    def __hash__(self):
        return hash((self.n, self.adjacency))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m}, max_degree={self.max_degree})"


def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    return Graph.from_edges(n, edges)


def ball(g: Graph, v: int, radius: int) -> frozenset[int]:
    return g.ball(v, radius)


def closed_neighborhood(g: Graph, v: int) -> frozenset[int]:
    return g.closed_neighborhood(v)
