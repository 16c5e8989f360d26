"""Early minimality tests, separate checking of non-head-cycle-free components,
and backjumping with learning.

The transition rules themselves live in :class:`dasp.engine.TwoLayerGraph`
and are switched on by the flags of :class:`dasp.engine.SolverConfig`; this
module exposes them per extension, together with the component analysis
and the conflict analysis they rely on.
"""

from __future__ import annotations

from typing import Iterable

from . import oracle
from .components import (
    ComponentAnalysis,
    component_analysis,
    dependency_graph,
    has_unfounded_subset_hcf,
    restrict_clauses,
)
from .engine import CONFIGS, RunResult, SolverConfig, Strategy, Transition, TwoLayerGraph, run, run_single
from .learning import (
    analyze_conflict,
    assumption_positions,
    conflict_backjump_clause,
    conflict_decisions,
    decision_clause,
)
from .program import Program, Rule, interpretation

__all__ = [
    "ComponentAnalysis",
    "component_analysis",
    "dependency_graph",
    "has_unfounded_subset_hcf",
    "restrict_clauses",
    "analyze_conflict",
    "conflict_backjump_clause",
    "conflict_decisions",
    "assumption_positions",
    "decision_clause",
    "applicable_dlv_separate",
    "applicable_gnt_early",
    "applicable_learning",
    "learnt_clause_entailed",
]


def _graph(program: Program, cfg: SolverConfig, graph: TwoLayerGraph | None) -> TwoLayerGraph:
    return graph if graph is not None else TwoLayerGraph(program, cfg)


def applicable_dlv_separate(program: Program, state, cfg: SolverConfig | None = None, graph: TwoLayerGraph | None = None) -> list[Transition]:
    cfg = cfg or CONFIGS["dlv"].with_flags(separate=True)
    if not cfg.separate:
        raise ValueError("configuration does not enable separate component checking")
    g = _graph(program, cfg, graph)
    if getattr(state, "side", None) == "R" and not 1 <= state.index <= len(g.units):
        raise ValueError(f"component index {state.index} out of range 1..{len(g.units)}")
    return g.transitions(state)


def applicable_gnt_early(program: Program, state, cfg: SolverConfig | None = None, graph: TwoLayerGraph | None = None) -> list[Transition]:
    cfg = cfg or CONFIGS["gnt"].with_flags(early_test=True)
    if not cfg.early_test:
        raise ValueError("configuration does not enable early minimality tests")
    return _graph(program, cfg, graph).transitions(state)


def applicable_learning(program: Program, state, cfg: SolverConfig | None = None, graph: TwoLayerGraph | None = None) -> list[Transition]:
    cfg = cfg or CONFIGS["cmodels"].with_flags(learning="decisions")
    if not cfg.learning:
        raise ValueError("configuration does not enable learning")
    return _graph(program, cfg, graph).transitions(state)


def learnt_clause_entailed(
    program: Program,
    cfg: SolverConfig,
    rule: str,
    clause: Iterable[int],
    state,
    cap: int = oracle.DEFAULT_CAP,
) -> bool:
    """Whether a learnt clause holds in every model of the layer it was learnt for.

    A left clause must hold in every model (of the generating type) of the
    generated program; a right clause in every model (of the witness type)
    of the witness program the right layer was working on.

    Models of every type are classical models, so classical entailment is
    tried first with the DP graph on the layer plus the negated clause;
    only if that fails are the models of the layer's type enumerated
    (subject to ``cap``).
    """
    graph = TwoLayerGraph(program, cfg)
    c = tuple(clause)
    if rule == "Learn_Left":
        layer, kind = graph.gen, cfg.gen.approx_type
    else:
        layer, kind = graph.witness_program(state.left, state.index), cfg.test.ensure_type
    refutation = Program.from_clauses(layer.clauses() + tuple((l ^ 1,) for l in c), layer.table)
    if run_single(refutation).verdict == "UNSAT":
        return True
    universe = layer.atoms()
    for true in oracle.models(layer, kind, cap=cap):
        lits = interpretation(true, universe)
        if not any(l in lits for l in c):
            return False
    return True
