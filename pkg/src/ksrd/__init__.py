"""k-strong Roman domination: attack generation, defense checks, a greedy
constructor, a variable neighborhood search solver and brute-force oracles."""

from __future__ import annotations

from .attacks import AttackSets, generate_attacks, k_combinations
from .defense import (
    CoverageInfo,
    DefenseOutcome,
    Solution,
    SolutionError,
    defend_exact,
    deterministic_defense,
    is_attack_defended,
    label_cap,
    quasi_infeasibility,
    roulette_defense,
)
from .graph import Graph, GraphError, from_edges
from .greedy import greedy
from .instances import (
    InstanceError,
    RegionSet,
    UnitDiscParams,
    gen_unit_disc,
    geojson_to_graph,
    load_edge_list,
    parse_edge_list,
    save_edge_list,
    write_edge_list,
)
from .oracle import BudgetExceeded, brute_force_optimum, count_failing_attacks, exact_feasible, first_failing_attack
from .vns import Fitness, RunReport, SolverConfig, incremental_recheck, local_search, shake, two_decompositions, vns_solve

__version__ = "0.1.0"

__all__ = [
    "AttackSets", "BudgetExceeded", "CoverageInfo", "DefenseOutcome", "Fitness", "Graph", "GraphError",
    "InstanceError", "RegionSet", "RunReport", "Solution", "SolutionError", "SolverConfig", "UnitDiscParams",
    "brute_force_optimum", "count_failing_attacks", "defend_exact", "deterministic_defense", "exact_feasible",
    "first_failing_attack", "from_edges", "gen_unit_disc", "generate_attacks", "geojson_to_graph", "greedy",
    "incremental_recheck", "is_attack_defended", "k_combinations", "label_cap", "load_edge_list", "local_search",
    "parse_edge_list", "quasi_infeasibility", "roulette_defense", "save_edge_list", "shake", "two_decompositions",
    "vns_solve", "write_edge_list",
]
