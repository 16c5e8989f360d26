"""Abstract generate-and-test solvers for disjunctive answer set programs.

The package models solvers as transition graphs over records of literals:
a single-layer DPLL-style graph parameterised by propagator conditions, and
a two-layer graph whose left layer enumerates candidates of a generated
program and whose right layer searches a witness program refuting their
minimality.
"""

from .engine import (
    CONFIGS,
    RunResult,
    SolverConfig,
    Strategy,
    TwoLayerGraph,
    SingleLayerGraph,
    compare_graphs,
    config,
    explore_graph,
    make_config,
    replay,
    run,
    run_single,
)
from .oracle import classical_models, is_answer_set, stable_models, supported_models
from .program import AtomTable, Program, Record, Rule, parse_program, render_program

__all__ = [
    "AtomTable",
    "CONFIGS",
    "Program",
    "Record",
    "Rule",
    "RunResult",
    "SingleLayerGraph",
    "SolverConfig",
    "Strategy",
    "TwoLayerGraph",
    "classical_models",
    "compare_graphs",
    "config",
    "explore_graph",
    "is_answer_set",
    "make_config",
    "parse_program",
    "render_program",
    "replay",
    "run",
    "run_single",
    "stable_models",
    "supported_models",
]

__version__ = "0.1.0"
