from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

from ksrd import Graph, UnitDiscParams, from_edges, gen_unit_disc

DATA = Path(__file__).parent / "data"
CORPUS = DATA / "corpus"

# the five-node "kite": triangle A, B, C with pendants D on C and E on B
A, B, C, D, E = range(5)
KITE5_EDGES = [(0, 1), (1, 2), (2, 0), (2, 3), (1, 4)]


def kite5() -> Graph:
    return from_edges(5, KITE5_EDGES)


def complete(n: int) -> Graph:
    return from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def random_graph(rnd: random.Random, n: int, p: float) -> Graph:
    return from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rnd.random() < p])


def random_unit_disc(rnd: random.Random, lo: int, hi: int) -> Graph:
    return gen_unit_disc(UnitDiscParams(rnd.randint(lo, hi), rnd.uniform(0.25, 0.6), rnd.randrange(1 << 30)))


@pytest.fixture
def g1() -> Graph:
    return kite5()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
