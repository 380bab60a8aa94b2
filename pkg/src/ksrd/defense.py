"""Attack defense: heuristic and exact.

A labeling defends an attack when every attacked node labeled 0 can be
assigned a distinct field army from a neighbor ``u`` with ``labels[u] >= 2``,
where ``u`` lends at most ``labels[u] - 1`` armies in total. Attacked nodes
with a positive label defend themselves.

``is_attack_defended`` follows the two-strategy scheme: an exhaustive search
over defender assignments when the number of assignments is below
``cutoff``, otherwise a randomized roulette with ``tries`` attempts (which
may miss a defense but never reports a false one). ``defend_exact`` decides
the same question with capacitated bipartite matching and is used as an
independent oracle.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from ._kernels import ON_ANY
from .attacks import Attack
from .graph import Graph

DEFAULT_CUTOFF = 100
DEFAULT_TRIES = 10

_MASK64 = (1 << 64) - 1
_MASK63 = (1 << 63) - 1
_GOLDEN = 0x9E3779B97F4A7C15
# larger cutoffs behave like this one; assignment counts never get near it
MAX_CUTOFF = 1 << 40


class SolutionError(ValueError):
    pass


def label_cap(g: Graph, k: int) -> int:
    """Largest admissible label, ``min(max_degree, k) + 1``."""
    return min(g.max_degree, k) + 1


@dataclass(frozen=True)
class Solution:
    labels: tuple[int, ...]
    weight: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(int(x) for x in self.labels))
        object.__setattr__(self, "weight", sum(self.labels))

    @classmethod
    def checked(cls, labels: Iterable[int], g: Graph, k: int) -> "Solution":
        s = cls(tuple(labels))
        if len(s.labels) != g.n:
            raise SolutionError(f"expected {g.n} labels, got {len(s.labels)}")
        cap = label_cap(g, k)
        for v, x in enumerate(s.labels):
            if not 0 <= x <= cap:
                raise SolutionError(f"label {x} at node {v} outside [0, {cap}]")
        return s

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, v):
        return self.labels[v]


def _labels_of(s) -> Sequence[int]:
    return s.labels if isinstance(s, Solution) else s


@dataclass(frozen=True)
class DefenseOutcome:
    """Result of defending one attack.

    ``assignment`` pairs each attacked 0-node with the neighbor lending it an
    army; ``self_defenders`` are attacked nodes with a positive label.
    ``method`` is one of ``"trivial"``, ``"none"`` (some 0-node has no
    possible defender), ``"deterministic"``, ``"roulette"`` or ``"exact"``.
    """

    defended: bool
    self_defenders: tuple[int, ...] = ()
    assignment: tuple[tuple[int, int], ...] = ()
    method: str = "trivial"

    @property
    def defending_nodes(self) -> Counter:
        c = Counter(self.self_defenders)
        c.update(u for _, u in self.assignment)
        return c

    def __bool__(self):
        return self.defended


def _seed63(x: int) -> int:
    return int(x) & _MASK63


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def attack_seed(seed: int, epoch: int, index: int) -> int:
    """Seed of the roulette stream for attack ``index`` (splitmix64 mix of
    the triple; seed and epoch are reduced to 63 bits)."""
    z = (_seed63(seed) * _GOLDEN + _seed63(epoch) * 0xBF58476D1CE4E5B9 + index * 0x94D049BB133111EB) & _MASK64
    return _mix64(z)


class AttackStream:
    """splitmix64 stream; ``randrange`` uses a 32-bit multiply-shift.

    The compiled kernels implement the same generator, so one attack gets
    the same roulette draws in both code paths.
    """

    def __init__(self, seed: int, epoch: int | None = None, index: int | None = None):
        self.state = attack_seed(seed, epoch, index) if epoch is not None else int(seed) & _MASK64

    def next64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix64(self.state)

    def randrange(self, w: int) -> int:
        return ((self.next64() >> 32) * w) >> 32


# ---------------------------------------------------------------------------
# core evaluation


def alternatives_for(g: Graph, s, v: int) -> list[int]:
    labels = _labels_of(s)
    return [u for u in g.adjacency[v] if labels[u] >= 2]


def _search_assignment(labels, reduced, alts):
    """First capacity-consistent assignment in product order, or None.

    Depth-first over ``alts`` in the order given; the first complete
    assignment found is the first consistent tuple of the Cartesian product
    in lexicographic order, so this matches a plain product scan while
    pruning infeasible prefixes.
    """
    m = len(reduced)
    used: dict[int, int] = {}
    choice = [0] * m
    depth = 0
    while True:
        if depth == m:
            return [alts[i][choice[i]] for i in range(m)]
        options = alts[depth]
        placed = False
        while choice[depth] < len(options):
            u = options[choice[depth]]
            if labels[u] - 1 - used.get(u, 0) >= 1:
                used[u] = used.get(u, 0) + 1
                placed = True
                break
            choice[depth] += 1
        if placed:
            depth += 1
            if depth < m:
                choice[depth] = 0
            continue
        # backtrack
        depth -= 1
        if depth < 0:
            return None
        u = alts[depth][choice[depth]]
        used[u] -= 1
        choice[depth] += 1


def _roulette(labels, adj, reduced, tries, rng):
    """Each pass picks, for every attacked 0-node in turn, a neighbor with
    probability proportional to its spare armies ``labels[u] - 1`` minus
    those already lent in this pass."""
    for _ in range(tries):
        committed: dict[int, int] = {}
        picked = []
        for v in reduced:
            total = 0
            for u in adj[v]:
                d = labels[u] - 1 - committed.get(u, 0)
                if d > 0:
                    total += d
            if total == 0:
                break
            r = rng.randrange(total)
            for u in adj[v]:
                d = labels[u] - 1 - committed.get(u, 0)
                if d > 0:
                    if r < d:
                        break
                    r -= d
            committed[u] = committed.get(u, 0) + 1
            picked.append(u)
        else:
            return picked
    return None


def _split_attack(labels, adj, attack):
    selfd, reduced, alts = [], [], []
    for v in attack:
        if labels[v] > 0:
            selfd.append(v)
        else:
            reduced.append(v)
            alts.append([u for u in adj[v] if labels[u] >= 2])
    return selfd, reduced, alts


def _outcome(selfd, reduced, picked, method) -> DefenseOutcome:
    if picked is None:
        return DefenseOutcome(False, (), (), method)
    return DefenseOutcome(True, tuple(selfd), tuple(zip(reduced, picked)), method)


def is_attack_defended(
    g: Graph,
    s,
    attack: Attack,
    cutoff: int = DEFAULT_CUTOFF,
    tries: int = DEFAULT_TRIES,
    rng=None,
) -> DefenseOutcome:
    """Defend one attack.

    Attacked nodes with a positive label defend themselves. If some attacked
    0-node has no neighbor with label >= 2 the attack fails at once.
    Otherwise, when the number of possible defender assignments is below
    ``cutoff`` the assignments are searched exhaustively, else
    :func:`roulette_defense` gets ``tries`` attempts. ``rng`` needs a
    ``randrange(w)`` method (an :class:`AttackStream` or ``random.Random``).
    """
    labels = _labels_of(s)
    selfd, reduced, alts = _split_attack(labels, g.adjacency, attack)
    if any(not a for a in alts):
        return DefenseOutcome(False, (), (), "none")
    if not reduced:
        return DefenseOutcome(True, tuple(selfd), (), "trivial")
    product = 1
    for a in alts:
        product = min(product * len(a), cutoff)
    if product < cutoff:
        return _outcome(selfd, reduced, _search_assignment(labels, reduced, alts), "deterministic")
    rng = rng if rng is not None else AttackStream(0)
    return _outcome(selfd, reduced, _roulette(labels, g.adjacency, reduced, tries, rng), "roulette")


def deterministic_defense(g: Graph, s, attack: Attack) -> DefenseOutcome:
    """Exhaustive assignment search, whatever the number of assignments."""
    labels = _labels_of(s)
    selfd, reduced, alts = _split_attack(labels, g.adjacency, attack)
    if any(not a for a in alts):
        return DefenseOutcome(False, (), (), "none")
    picked = _search_assignment(labels, reduced, alts) if reduced else []
    return _outcome(selfd, reduced, picked, "deterministic")


def roulette_defense(g: Graph, s, attack: Attack, tries: int, rng) -> DefenseOutcome:
    if tries < 1:
        raise ValueError("tries must be >= 1")
    labels = _labels_of(s)
    selfd, reduced, _ = _split_attack(labels, g.adjacency, attack)
    picked = _roulette(labels, g.adjacency, reduced, tries, rng) if reduced else []
    return _outcome(selfd, reduced, picked, "roulette")


# ---------------------------------------------------------------------------
# exact oracle


def defend_exact(g: Graph, s, attack: Attack) -> DefenseOutcome:
    """Decide defendability by capacitated bipartite matching.

    Left side: attacked nodes labeled 0. Right side: nodes ``u`` with
    ``labels[u] >= 2`` and capacity ``labels[u] - 1``. Augmenting paths
    (Kuhn's algorithm with capacities); defended iff the left side is
    saturated.
    """
    labels = _labels_of(s)
    adj = g.adjacency
    selfd = tuple(v for v in attack if labels[v] > 0)
    zeros = [v for v in attack if labels[v] == 0]
    # matched[u] = list of left nodes currently served by u
    matched: dict[int, list[int]] = {}
    owner: dict[int, int] = {}

    def augment(v, visited):
        for u in adj[v]:
            cap = labels[u] - 1
            if cap < 1 or u in visited:
                continue
            visited.add(u)
            served = matched.setdefault(u, [])
            if len(served) < cap:
                served.append(v)
                owner[v] = u
                return True
            for w in list(served):
                if augment(w, visited):
                    served.remove(w)
                    served.append(v)
                    owner[v] = u
                    return True
        return False

    for v in zeros:
        if not augment(v, set()):
            return DefenseOutcome(False, (), (), "exact")
    return DefenseOutcome(True, selfd, tuple((v, owner[v]) for v in zeros), "exact")


def audit_outcome(g: Graph, s, attack: Attack, outcome: DefenseOutcome) -> bool:
    """Check a positive outcome against the defense rules directly."""
    labels = _labels_of(s)
    if not outcome.defended:
        return True
    zeros = {v for v in attack if labels[v] == 0}
    if set(outcome.self_defenders) != set(attack) - zeros:
        return False
    if {v for v, _ in outcome.assignment} != zeros or len(outcome.assignment) != len(zeros):
        return False
    load = Counter(u for _, u in outcome.assignment)
    for v, u in outcome.assignment:
        if u not in g.adjacency[v]:
            return False
    return all(load[u] <= labels[u] - 1 for u in load)


# ---------------------------------------------------------------------------
# quasi-infeasibility over an attack list


def attacks_array(attacks) -> np.ndarray:
    if isinstance(attacks, np.ndarray):
        return np.ascontiguousarray(attacks, dtype=np.int64)
    attacks = list(attacks)
    k = len(attacks[0]) if attacks else 1
    return np.array(attacks, dtype=np.int64).reshape(len(attacks), k)


def _labels_array(s) -> np.ndarray:
    return np.asarray(_labels_of(s), dtype=np.int64).copy()


@dataclass(frozen=True, eq=False)
class CoverageInfo:
    """Per-node attack indices gathered during one full verification.

    Stored as CSR arrays: the indices for node ``u`` are
    ``<name>_idx[<name>_ptr[u]:<name>_ptr[u + 1]]``.

    ``defenders``
        attacks that ``u`` helped defend, either as a self-defender or as a
        lender. ``defenders_need`` holds, per entry, the smallest label that
        keeps the recorded defense valid (one plus the armies ``u`` lends);
        each node's entries are sorted by it, descending. Lowering
        ``labels[u]`` below that value may break the attack.
    ``sensitive``
        defended attacks whose verdict may flip when ``labels[u]`` changes
        although the recorded defense stays valid. Roulette-decided attacks
        whose evaluation reads ``labels[u]`` react to any change
        (``ON_ANY``). Exhaustively decided attacks whose assignment count
        would reach the cutoff if ``u`` alone became a lender react only to
        ``labels[u]`` going from at most 1 to at least 2 (``ON_PROMOTE``).
    ``failed``
        indices of non-defended attacks.
    ``failed_touch``
        failed attacks whose evaluation reads ``labels[u]``; only these can
        be repaired by changing ``u``. Roulette failures react to any change
        (``ON_ANY``). Exhaustive failures react only to raises
        (``ON_RAISE``), since defendability is monotone in the labels; for
        an attacked 0-node without alternatives only that node and its
        neighbors are listed.

    The ``*_kind`` arrays hold these tags, and each node's segment is sorted
    by tag, ``ON_ANY`` first.
    """

    failed: np.ndarray
    defenders_ptr: np.ndarray
    defenders_idx: np.ndarray
    defenders_need: np.ndarray
    sensitive_ptr: np.ndarray
    sensitive_idx: np.ndarray
    sensitive_kind: np.ndarray
    failed_touch_ptr: np.ndarray
    failed_touch_idx: np.ndarray
    failed_touch_kind: np.ndarray

    @property
    def non_defended(self) -> set[int]:
        return set(self.failed.tolist())

    def defenders(self, u: int, below: int | None = None) -> list[int]:
        """Attacks ``u`` defends; with ``below``, only those that need
        ``labels[u] > below``."""
        lo, hi = self.defenders_ptr[u], self.defenders_ptr[u + 1]
        idx = self.defenders_idx[lo:hi]
        if below is not None:
            idx = idx[self.defenders_need[lo:hi] > below]
        return idx.tolist()

    def sensitive(self, u: int, old: int | None = None, new: int | None = None) -> list[int]:
        """Entries for ``u``; given ``old -> new``, only those that change can affect."""
        lo, hi = self.sensitive_ptr[u], self.sensitive_ptr[u + 1]
        idx, kind = self.sensitive_idx[lo:hi], self.sensitive_kind[lo:hi]
        if old is not None and not (old <= 1 and new >= 2):
            idx = idx[kind == ON_ANY]
        return idx.tolist()

    def failed_touch(self, u: int, old: int | None = None, new: int | None = None) -> list[int]:
        """Entries for ``u``; given ``old -> new``, only those that change can affect."""
        lo, hi = self.failed_touch_ptr[u], self.failed_touch_ptr[u + 1]
        idx, kind = self.failed_touch_idx[lo:hi], self.failed_touch_kind[lo:hi]
        if old is not None and new < old:
            idx = idx[kind == ON_ANY]
        return idx.tolist()

    def csr(self) -> tuple:
        return (self.defenders_ptr, self.defenders_idx, self.defenders_need,
                self.sensitive_ptr, self.sensitive_idx, self.sensitive_kind,
                self.failed_touch_ptr, self.failed_touch_idx, self.failed_touch_kind)


def quasi_infeasibility(
    g: Graph,
    s,
    attacks,
    cutoff: int = DEFAULT_CUTOFF,
    tries: int = DEFAULT_TRIES,
    seed: int = 0,
    epoch: int = 0,
    *,
    stop_after: int | None = None,
    with_coverage: bool = True,
) -> tuple[int, CoverageInfo | None]:
    """Count attacks the labeling fails to defend, applying
    :func:`is_attack_defended` to each.

    Attack ``i`` draws its roulette numbers from
    ``AttackStream(seed, epoch, i)``, so re-evaluating one attack under the
    same labeling reproduces its verdict. With ``stop_after`` the scan ends
    once that many failures are seen (the count is then a lower bound and
    no coverage is returned).
    """
    arr = attacks_array(attacks)
    labels = _labels_array(s)
    indptr, indices = g.csr
    want = with_coverage and stop_after is None
    if arr.shape[1] > 62:
        raise ValueError("attacks larger than 62 nodes are not supported")
    nf, failed, *csr = _kernels.full_verify(
        labels, indptr, indices, arr, min(int(cutoff), MAX_CUTOFF), int(tries),
        _seed63(seed), _seed63(epoch), want, int(stop_after or 0),
    )
    return int(nf), (CoverageInfo(failed, *csr) if want else None)


def verdicts(g: Graph, s, attacks, cutoff: int = DEFAULT_CUTOFF, tries: int = DEFAULT_TRIES,
             seed: int = 0, epoch: int = 0) -> list[bool]:
    """Per-attack verdicts computed by the pure-Python path, with the same
    per-attack streams as :func:`quasi_infeasibility`."""
    return [
        is_attack_defended(g, s, a, cutoff, tries, AttackStream(seed, epoch, i)).defended
        for i, a in enumerate(attacks)
    ]
