"""Transition graphs: the single-layer DPLL template and the two-layer
generate-and-test template, with strategies, traces, replay, exhaustive
exploration and graph comparison.

States are immutable values (see :mod:`dasp.program`), so a graph object
only holds the program, the configuration and some caches of derived
programs.
"""

from __future__ import annotations

import itertools
import json
import random
import sys
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Sequence

from . import learning, oracle, propagators
from .components import component_analysis, has_unfounded_subset_hcf, restrict_clauses
from .program import (
    FAILSTATE,
    FALSUM,
    Fail,
    Ok,
    Program,
    Record,
    Rule,
    TwoLayer,
    atom_of,
    covers,
    initial_state,
    is_positive,
    neg,
    pos,
    positive_atoms,
    restrict,
)
from .transforms import GeneratingFunction, WitnessFunction, common_types, generator, test_gnt, test_dlv, witness

DEFAULT_MAX_STEPS = 10**7
DEFAULT_STORE_CAP = 10_000

# rule names -----------------------------------------------------------------

CONCLUDE = "Conclude"
BACKTRACK = "Backtrack"
UNIT_RULE = "Unit"
PROPAGATE = "Propagate"
DECIDE = "Decide"
SUCCESS = "Success"

CONCLUDE_L = "Conclude_L"
BACKTRACK_L = "Backtrack_L"
PROPAGATE_L = "Propagate_L"
DECIDE_L = "Decide_L"
CROSS_LR = "Cross_LR"
CONCLUDE_R = "Conclude_R"
BACKTRACK_R = "Backtrack_R"
PROPAGATE_R = "Propagate_R"
DECIDE_R = "Decide_R"
CONCLUDE_RL = "Conclude_RL"
BACKTRACK_RL = "Backtrack_RL"

EARLY_TEST_R = "EarlyTest_R"
CONCLUDE_R1 = "Conclude_R'"
CONCLUDE_R2 = "Conclude_R''"
CROSS_LR1 = "Cross_LR'"
PROPAGATE_L1 = "Propagate_L'"
PROPAGATE_R1 = "Propagate_R'"
BACKJUMP_L = "Backjump_L"
BACKJUMP_R = "Backjump_R"
BACKJUMP_RL = "Backjump_RL"
LEARN_LEFT = "Learn_Left"
LEARN_RIGHT = "Learn_Right"

DECISION_RULES = {DECIDE, DECIDE_L, DECIDE_R}
PROPAGATION_RULES = {UNIT_RULE, PROPAGATE, PROPAGATE_L, PROPAGATE_R, PROPAGATE_L1, PROPAGATE_R1}
BACKTRACK_RULES = {
    BACKTRACK, BACKTRACK_L, BACKTRACK_R, BACKTRACK_RL, BACKJUMP_L, BACKJUMP_R, BACKJUMP_RL, EARLY_TEST_R
}
CROSS_RULES = {CROSS_LR, CROSS_LR1}
LEARN_RULES = {LEARN_LEFT, LEARN_RIGHT}


class EngineError(RuntimeError):
    pass


class StepLimitExceeded(EngineError):
    pass


class InvariantViolation(EngineError):
    pass


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class SolverConfig:
    """A generating function with its p-conditions and a witness function with its p-conditions."""

    name: str
    gen: GeneratingFunction
    left: frozenset[str]
    test: WitnessFunction
    right: frozenset[str]
    early_test: bool = False
    separate: bool = False
    learning: str | None = None  # None, "decisions" or "reasons"

    def compatible_types(self) -> set[str]:
        """Types w for which both the approximating pair and the ensuring pair are declared."""
        if propagators.enforcing_type(self.left) != self.gen.approx_type:
            return set()
        if propagators.enforcing_type(self.right) != self.test.ensure_type:
            return set()
        return common_types(self.gen, self.test)

    def validate(self, unsafe: bool = False) -> None:
        if not unsafe and not self.compatible_types():
            raise ValueError(
                f"configuration {self.name!r}: ({propagators.pset_name(self.left)}, {self.gen.name}) and "
                f"({propagators.pset_name(self.right)}, {self.test.name}) are not declared approximating/"
                "ensuring pairs with respect to a common type"
            )
        if self.early_test and (self.gen.name != "gntGen" or self.test.name != "gntTest"):
            raise ValueError("early minimality tests need the gnt generating and witness functions")
        if self.separate and self.test.name != "dlvTest":
            raise ValueError("separate component checking needs the dlv witness function")
        if self.learning not in (None, "decisions", "reasons"):
            raise ValueError(f"unknown learning mode {self.learning!r}")
        if self.learning and (self.early_test or self.separate):
            raise ValueError("learning cannot be combined with the other extensions")

    def with_flags(self, early_test: bool = False, separate: bool = False, learning: str | None = None) -> "SolverConfig":
        return replace(self, early_test=early_test, separate=separate, learning=learning)

    def describe(self) -> str:
        return (
            f"{self.name}: {self.gen.name}/{propagators.pset_name(self.left)} + "
            f"{self.test.name}/{propagators.pset_name(self.right)}"
        )


def make_config(name: str, gen: str, left: str, test: str, right: str, **flags) -> SolverConfig:
    return SolverConfig(name, generator(gen), propagators.pset(left), witness(test), propagators.pset(right), **flags)


CONFIGS: dict[str, SolverConfig] = {
    "cmodels": make_config("cmodels", "cmodelsGen", "up", "cmodelsTest", "up"),
    "gnt": make_config("gnt", "gntGen", "sm", "gntTest", "sm"),
    "dlv": make_config("dlv", "dlvGen", "sd", "dlvTest", "up"),
    "hybrid1": make_config("hybrid1", "cnfcomp", "up", "gntTest", "sm"),
    "hybrid2": make_config("hybrid2", "cmodelsGen", "up", "dlvTest", "up"),
    "cnfcomp": make_config("cnfcomp", "cnfcomp", "up", "cmodelsTest", "up"),
    "dlvgen-cmodelstest": make_config("dlvgen-cmodelstest", "dlvGen", "sd", "cmodelsTest", "up"),
}


def config(name: str, early_test: bool = False, separate: bool = False, learning: str | bool | None = None) -> SolverConfig:
    try:
        base = CONFIGS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown solver {name!r}; choose from {sorted(CONFIGS)}") from None
    if learning is True:
        learning = "decisions"
    cfg = base.with_flags(early_test, separate, learning or None)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# Transitions


@dataclass(frozen=True)
class Transition:
    rule: str
    target: object
    literal: int | None = None
    pcondition: str | None = None
    clause: tuple[int, ...] | None = None


def _prefer(cands: Sequence[int], heuristic: Callable[[Sequence[int]], int] | None) -> int:
    return heuristic(cands) if heuristic else cands[0]


def lex_positive_first(cands: Sequence[int]) -> int:
    """Lowest atom first, positive before negative."""
    return min(cands, key=lambda l: (atom_of(l), 0 if is_positive(l) else 1))


def decision_candidates(atoms: Iterable[int], lits: frozenset[int]) -> list[int]:
    out = []
    for a in atoms:
        if pos(a) not in lits and neg(a) not in lits:
            out.append(pos(a))
            out.append(neg(a))
    return out


def _with_clause(store: tuple[tuple[int, ...], ...], clause: tuple[int, ...], cap: int):
    store = store + (clause,)
    if len(store) > cap:
        store = store[len(store) - cap :]
    return store


class SingleLayerGraph:
    """The DPLL template graph DPT(S, Π); with ``S = up`` and ``unit_name="Unit"`` the DP graph."""

    def __init__(self, program: Program, members: Iterable[str] = propagators.PSETS["up"], unit_name: str = PROPAGATE):
        self.program = program
        self.members = frozenset(members)
        self.unit_name = unit_name

    def initial(self) -> Record:
        return Record()

    def measure(self, state):
        if isinstance(state, (Ok, Fail)):
            return (1,)
        return (0, state.depth())

    def moves(self, state, want_all: bool = True, decide=None) -> list[Transition]:
        if not isinstance(state, Record):
            return []
        out: list[Transition] = []
        lits = state.lits
        if not state.is_consistent():
            if state.has_decision():
                out.append(Transition(BACKTRACK, state.backtrack()))
            else:
                out.append(Transition(CONCLUDE, FAILSTATE))
            if not want_all:
                return out
        if want_all:
            lab = propagators.out_prop_labelled(self.members, self.program, lits)
            out += [Transition(self.unit_name, state.push(l), l, c) for l, c in sorted(lab.items())]
        else:
            got = propagators.first_derivable(self.members, self.program, lits)
            if got:
                return [Transition(self.unit_name, state.push(got[0]), got[0], got[1])]
        if state.is_consistent():
            cands = decision_candidates(self.program.atoms(), lits)
            if cands:
                if want_all:
                    out += [Transition(DECIDE, state.push(l, True), l) for l in cands]
                else:
                    l = _prefer(cands, decide)
                    return [Transition(DECIDE, state.push(l, True), l)]
        if not out:
            out.append(Transition(SUCCESS, Ok(state)))
        return out

    transitions = moves


class TwoLayerGraph:
    """ST(P_L, P_R, gen, test)(Π) and its extended variants."""

    def __init__(
        self,
        program: Program,
        cfg: SolverConfig,
        store_cap: int = DEFAULT_STORE_CAP,
        early_guard: str = "validated",
    ):
        self.program = program
        self.cfg = cfg
        self.gen = cfg.gen.apply(program)
        self.pi_atoms = frozenset(program.atoms())
        self.gen_atoms = self.gen.atoms()
        self.store_cap = store_cap
        self.early_guard = early_guard
        self._left_cache: dict[tuple, Program] = {}
        self._test_cache: dict[tuple, Program] = {}
        self._right_cache: dict[tuple, Program] = {}
        self._conflict_cache: dict[tuple, tuple] = {}
        self.units: list[tuple[str, frozenset[int]]] = []
        if cfg.separate:
            ca = component_analysis(program)
            self.units = [("nhcf", c) for c in ca.non_hcf_components()]
            self.hcf_components = ca.hcf_components()
            if self.hcf_components:
                self.units.append(("hcf", frozenset().union(*self.hcf_components)))
            if not self.units:
                self.units.append(("vacuous", frozenset()))

    # programs -------------------------------------------------------------

    def left_program(self, store: tuple = ()) -> Program:
        if not store:
            return self.gen
        hit = self._left_cache.get(store)
        if hit is None:
            if len(self._left_cache) > 64:
                self._left_cache.clear()
            hit = Program(self.gen.rules + tuple(Rule.from_clause(c) for c in store), self.gen.table, self.gen.clause_mode)
            self._left_cache[store] = hit
        return hit

    def witness_program(self, left: Record, index: int = 0) -> Program:
        """test(Π, L) — or, in separate mode, the witness of the ``index``-th unit."""
        cand = restrict(left.lits, self.pi_atoms)
        key = (cand, index)
        hit = self._test_cache.get(key)
        if hit is not None:
            return hit
        if len(self._test_cache) > 4096:
            self._test_cache.clear()
        if self.cfg.early_test:
            hit = test_gnt(self.program, cand, partial=True)
        elif self.cfg.separate:
            hit = self._unit_witness(cand, index)
        else:
            hit = self.cfg.test.apply(self.program, cand)
        self._test_cache[key] = hit
        return hit

    def _unit_witness(self, cand: frozenset[int], index: int) -> Program:
        kind, atoms = self.units[index - 1]
        table = self.program.table
        if kind == "nhcf":
            return restrict_clauses(test_dlv(self.program, cand), atoms)
        if kind == "hcf":
            refuted = any(has_unfounded_subset_hcf(self.program, cand, c) for c in self.hcf_components)
            return Program.from_clauses([] if refuted else [()], table)
        return Program.from_clauses([()], table)

    def right_program(self, state: TwoLayer) -> Program:
        base = self.witness_program(state.left, state.index)
        if not state.right_learnt:
            return base
        key = (id(base), state.right_learnt)
        hit = self._right_cache.get(key)
        if hit is None:
            if len(self._right_cache) > 64:
                self._right_cache.clear()
            hit = Program(base.rules + tuple(Rule.from_clause(c) for c in state.right_learnt), base.table, base.clause_mode)
            self._right_cache[key] = (hit, base)
            return hit
        return hit[0]

    # measure --------------------------------------------------------------

    def measure(self, state):
        """Strictly increases along every transition (compared as Python tuples)."""
        if isinstance(state, (Ok, Fail)):
            return (1,)
        dl, dr = state.left.depth(), state.right.depth()
        if self.cfg.learning:
            return (0, dl, len(state.left_learnt), 0 if state.side == "L" else 1, dr, len(state.right_learnt))
        if self.cfg.early_test:
            if state.side == "L":
                rank = 1
            else:
                rank = 2 if self._early_final(state.left) else 0
            return (0, dl, rank, 0, dr)
        return (0, dl, 0 if state.side == "L" else 1, state.index, dr)

    def _early_final(self, left: Record) -> bool:
        """Whether the right layer is testing a final candidate (``Conclude_R'`` territory)."""
        if not covers(left.lits, self.program):
            return False
        if self.early_guard == "literal":
            return True
        return not self.left_moves(TwoLayer(left, Record(), "L"), want_all=False)

    # transitions ----------------------------------------------------------

    def transitions(self, state) -> list[Transition]:
        if not isinstance(state, TwoLayer):
            return []
        if state.side == "L":
            out = self.left_moves(state, True)
            if not out:
                out = [self._cross(state)]
            if self.cfg.learning:
                out += self._learn_moves(state)
            return out
        out = self.right_moves(state, True)
        if not out:
            out = self._rl_moves(state)
        if self.cfg.learning:
            out += self._learn_moves(state)
        return out

    def priority(self, state, decide=None) -> Transition | None:
        """The transition chosen by the priority strategy (rule listing order)."""
        if not isinstance(state, TwoLayer):
            return None
        if state.side == "L":
            out = self.left_moves(state, False, decide)
            return out[0] if out else self._cross(state)
        out = self.right_moves(state, False, decide)
        return out[0] if out else self._rl_moves(state)[0]

    def _cross(self, state: TwoLayer) -> Transition:
        if self.cfg.separate:
            return Transition(CROSS_LR1, TwoLayer(state.left, Record(), "R", 1, state.left_learnt))
        return Transition(CROSS_LR, TwoLayer(state.left, Record(), "R", 0, state.left_learnt))

    def _conflict(self, record: Record, program: Program, members) -> tuple[tuple[int, ...], int, int]:
        key = (record, id(program))
        hit = self._conflict_cache.get(key)
        if hit is not None and hit[0] is program:
            return hit[1]
        if self.cfg.learning == "reasons":
            got = learning.analyze_conflict(record, program, members)
        else:
            got = learning.decision_clause(record, program, members)
        if len(self._conflict_cache) > 256:
            self._conflict_cache.clear()
        self._conflict_cache[key] = (program, got)
        return got

    def left_moves(self, state: TwoLayer, want_all: bool = True, decide=None) -> list[Transition]:
        L = state.left
        out: list[Transition] = []
        prog = self.left_program(state.left_learnt)
        learn = bool(self.cfg.learning)
        if not L.is_consistent():
            if not L.has_decision():
                out.append(Transition(CONCLUDE_L, FAILSTATE))
            elif learn:
                clause, prefix, flipped = self._conflict(L, prog, self.cfg.left)
                if clause not in state.left_learnt and not want_all:
                    store = _with_clause(state.left_learnt, clause, self.store_cap)
                    return [Transition(LEARN_LEFT, replace(state, left_learnt=store), clause=clause)]
                out.append(Transition(BACKJUMP_L, replace(state, left=learning.jump(L, prefix, flipped)), flipped))
                if want_all and prefix != L.last_decision():
                    out.append(Transition(BACKJUMP_L, replace(state, left=L.backtrack()), L.backtrack().entries[-1][0]))
            else:
                out.append(Transition(BACKTRACK_L, replace(state, left=L.backtrack())))
            if not want_all:
                return out
        rule = PROPAGATE_L1 if learn else PROPAGATE_L
        if want_all:
            lab = propagators.out_prop_labelled(self.cfg.left, prog, L.lits)
            out += [Transition(rule, replace(state, left=L.push(l)), l, c) for l, c in sorted(lab.items())]
        else:
            got = propagators.first_derivable(self.cfg.left, prog, L.lits)
            if got:
                return [Transition(rule, replace(state, left=L.push(got[0])), got[0], got[1])]
        if L.is_consistent():
            cands = decision_candidates(self.gen_atoms, L.lits)
            if cands:
                if want_all:
                    out += [Transition(DECIDE_L, replace(state, left=L.push(l, True)), l) for l in cands]
                else:
                    l = _prefer(cands, decide)
                    return [Transition(DECIDE_L, replace(state, left=L.push(l, True)), l)]
        return out

    def right_moves(self, state: TwoLayer, want_all: bool = True, decide=None) -> list[Transition]:
        L, R = state.left, state.right
        cfg = self.cfg
        out: list[Transition] = []
        prog = self.right_program(state)
        if not R.is_consistent():
            if not R.has_decision():
                out.append(self._conclude_r(state))
            elif cfg.learning:
                clause, prefix, flipped = self._conflict(R, prog, cfg.right)
                if clause not in state.right_learnt and not want_all:
                    store = _with_clause(state.right_learnt, clause, self.store_cap)
                    return [Transition(LEARN_RIGHT, replace(state, right_learnt=store), clause=clause)]
                out.append(Transition(BACKJUMP_R, replace(state, right=learning.jump(R, prefix, flipped)), flipped))
                if want_all and prefix != R.last_decision():
                    out.append(Transition(BACKJUMP_R, replace(state, right=R.backtrack()), R.backtrack().entries[-1][0]))
            else:
                out.append(Transition(BACKTRACK_R, replace(state, right=R.backtrack())))
            if not want_all:
                return out
        rule = PROPAGATE_R1 if (cfg.learning or cfg.separate) else PROPAGATE_R
        if want_all:
            lab = propagators.out_prop_labelled(cfg.right, prog, R.lits)
            out += [Transition(rule, replace(state, right=R.push(l)), l, c) for l, c in sorted(lab.items())]
        else:
            got = propagators.first_derivable(cfg.right, prog, R.lits)
            if got:
                return [Transition(rule, replace(state, right=R.push(got[0])), got[0], got[1])]
        if R.is_consistent():
            cands = decision_candidates(prog.atoms(), R.lits)
            if cands:
                if want_all:
                    out += [Transition(DECIDE_R, replace(state, right=R.push(l, True)), l) for l in cands]
                else:
                    l = _prefer(cands, decide)
                    return [Transition(DECIDE_R, replace(state, right=R.push(l, True)), l)]
        if cfg.early_test and not out and R.is_consistent() and L.has_decision():
            back = L.backtrack()
            out.append(Transition(EARLY_TEST_R, TwoLayer(back, Record(), "R"), back.entries[-1][0]))
        return out

    def _conclude_r(self, state: TwoLayer) -> Transition:
        L = state.left
        if self.cfg.early_test:
            if self._early_final(L):
                return Transition(CONCLUDE_R1, Ok(L))
            return Transition(CONCLUDE_R2, TwoLayer(L, Record(), "L"))
        if self.cfg.separate:
            if state.index < len(self.units):
                return Transition(CONCLUDE_R1, TwoLayer(L, Record(), "R", state.index + 1, state.left_learnt))
            return Transition(CONCLUDE_R2, Ok(L))
        return Transition(CONCLUDE_R, Ok(L))

    def _rl_moves(self, state: TwoLayer) -> list[Transition]:
        L = state.left
        if not L.has_decision():
            return [Transition(CONCLUDE_RL, FAILSTATE)]
        back = L.backtrack()
        rule = BACKJUMP_RL if self.cfg.learning else BACKTRACK_RL
        return [Transition(rule, TwoLayer(back, Record(), "L", 0, state.left_learnt), back.entries[-1][0])]

    def _learn_moves(self, state: TwoLayer) -> list[Transition]:
        """Learn transitions offered to exhaustive strategies: the clause the
        conflict analysis would produce, when not yet stored."""
        out = []
        if not state.left.is_consistent() and state.left.has_decision() and not state.right and not state.right_learnt:
            clause = self._conflict(state.left, self.left_program(state.left_learnt), self.cfg.left)[0]
            if clause not in state.left_learnt:
                store = _with_clause(state.left_learnt, clause, self.store_cap)
                out.append(Transition(LEARN_LEFT, replace(state, left_learnt=store), clause=clause))
        if state.side == "R" and not state.right.is_consistent() and state.right.has_decision():
            clause = self._conflict(state.right, self.right_program(state), self.cfg.right)[0]
            if clause not in state.right_learnt:
                store = _with_clause(state.right_learnt, clause, self.store_cap)
                out.append(Transition(LEARN_RIGHT, replace(state, right_learnt=store), clause=clause))
        return out

    # invariants -------------------------------------------------------------

    def check_step(self, state, t: Transition) -> None:
        """Assert the progress measure and the model properties at crossings."""
        if not self.measure(state) < self.measure(t.target):
            raise InvariantViolation(f"measure does not increase along {t.rule}")
        kinds = self.cfg.gen.approx_type
        if t.rule in CROSS_RULES and not oracle.is_model(self.left_program(state.left_learnt), kinds, state.left.lits):
            raise InvariantViolation("left record is not a model of the generated program at crossing")
        if t.rule in (CONCLUDE_RL, BACKTRACK_RL, BACKJUMP_RL) and not self.cfg.early_test:
            prog = self.right_program(state)
            if not covers(state.right.lits, prog) or not oracle.is_model(prog, self.cfg.test.ensure_type, state.right.lits):
                raise InvariantViolation("right record is not a model of the witness program when leaving it")


# ---------------------------------------------------------------------------
# Strategies and runs


@dataclass
class Strategy:
    """``priority`` follows the rule listing order; ``random`` picks uniformly among
    all applicable transitions; ``scripted`` follows a list of
    ``(rule, literal)`` steps, checking each is applicable."""

    kind: str = "priority"
    decide: str = "lex"  # "lex" or "random"
    seed: int = 0
    script: Sequence[tuple[str, str | None]] = ()

    def __post_init__(self):
        if self.kind not in ("priority", "random", "scripted"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.decide not in ("lex", "random"):
            raise ValueError(f"unknown decide heuristic {self.decide!r}")
        self.rng = random.Random(self.seed)

    def decide_heuristic(self):
        if self.decide == "lex":
            return lex_positive_first
        return lambda cands: self.rng.choice(list(cands))


@dataclass
class RunResult:
    verdict: str  # "SAT" or "UNSAT"
    model: frozenset[int] | None
    terminal: object
    steps: int
    stats: dict[str, int]
    trace: list[dict] = field(default_factory=list)
    learnt: list[tuple[str, tuple[int, ...], tuple]] = field(default_factory=list)


def _stats_update(stats: dict[str, int], t: Transition) -> None:
    if t.rule in DECISION_RULES:
        stats["decisions"] += 1
    elif t.rule in PROPAGATION_RULES:
        stats["propagations"] += 1
    elif t.rule in BACKTRACK_RULES:
        stats["backtracks"] += 1
    elif t.rule in CROSS_RULES:
        stats["crossings"] += 1
    elif t.rule in LEARN_RULES:
        stats["learntCount"] += 1


def trace_step(i: int, t: Transition, table) -> dict:
    target = t.target
    entry = {
        "step": i,
        "rule": t.rule,
        "pcondition": t.pcondition,
        "literal": table.lit_str(t.literal) if t.literal is not None else None,
    }
    if t.clause is not None:
        entry["clause"] = [table.lit_str(l) for l in t.clause]
    if isinstance(target, TwoLayer):
        entry.update(left=target.left.render(table), right=target.right.render(table), side=target.side)
        if target.index:
            entry["index"] = target.index
    elif isinstance(target, Record):
        entry.update(left=target.render(table), right="", side="L")
    elif isinstance(target, Ok):
        entry.update(left=target.record.render(table), right="", side="ok")
    else:
        entry.update(left="", right="", side="failstate")
    return entry


def terminal_entry(result: RunResult, table) -> dict:
    if result.verdict == "SAT":
        return {"terminal": "ok", "model": sorted(table.name(a) for a in result.model)}
    return {"terminal": "failstate"}


def _choose(graph, state, strategy: Strategy, step: int, table) -> Transition:
    if strategy.kind == "priority":
        if isinstance(graph, TwoLayerGraph):
            t = graph.priority(state, strategy.decide_heuristic())
        else:
            moves = graph.moves(state, False, strategy.decide_heuristic())
            t = moves[0] if moves else None
        if t is None:
            raise EngineError("no transition applies to a non-terminal state")
        return t
    moves = graph.transitions(state)
    if not moves:
        raise EngineError("no transition applies to a non-terminal state")
    if strategy.kind == "random":
        return strategy.rng.choice(moves)
    if step >= len(strategy.script):
        raise EngineError(f"script exhausted after {step} steps")
    rule, lit = strategy.script[step]
    want = table.lit(lit) if lit is not None else None
    for t in moves:
        if t.rule == rule and (want is None or t.literal == want):
            return t
    raise EngineError(f"scripted step {step} ({rule} {lit}) is not applicable")


def _run_graph(graph, program: Program, strategy: Strategy, max_steps: int, record_trace: bool, check: bool) -> RunResult:
    table = program.table
    state = graph.initial() if isinstance(graph, SingleLayerGraph) else initial_state()
    stats = {"decisions": 0, "propagations": 0, "backtracks": 0, "crossings": 0, "learntCount": 0}
    trace: list[dict] = []
    learnt: list = []
    steps = 0
    while not isinstance(state, (Ok, Fail)):
        if steps >= max_steps:
            raise StepLimitExceeded(f"step failsafe of {max_steps} exceeded")
        t = _choose(graph, state, strategy, steps, table)
        if check:
            graph.check_step(state, t) if isinstance(graph, TwoLayerGraph) else _check_single(graph, state, t)
        if t.rule in LEARN_RULES:
            learnt.append((t.rule, t.clause, state))
        _stats_update(stats, t)
        steps += 1
        if record_trace:
            trace.append(trace_step(steps, t, table))
        state = t.target
    if isinstance(state, Ok):
        model = positive_atoms(state.record.lits) & frozenset(program.atoms())
        res = RunResult("SAT", model, state, steps, stats, trace, learnt)
    else:
        res = RunResult("UNSAT", None, state, steps, stats, trace, learnt)
    if record_trace:
        trace.append(terminal_entry(res, table))
    return res


def _check_single(graph: SingleLayerGraph, state, t: Transition) -> None:
    if not graph.measure(state) < graph.measure(t.target):
        raise InvariantViolation(f"measure does not increase along {t.rule}")


def run(
    program: Program,
    cfg: SolverConfig,
    strategy: Strategy | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
    trace: bool = False,
    check_invariants: bool = False,
    store_cap: int = DEFAULT_STORE_CAP,
    graph: TwoLayerGraph | None = None,
) -> RunResult:
    """Walk the two-layer graph from the initial state to a terminal state."""
    graph = graph or TwoLayerGraph(program, cfg, store_cap=store_cap)
    return _run_graph(graph, program, strategy or Strategy(), max_steps, trace, check_invariants)


def run_single(
    program: Program,
    members: Iterable[str] = propagators.PSETS["up"],
    strategy: Strategy | None = None,
    unit_name: str = PROPAGATE,
    max_steps: int = DEFAULT_MAX_STEPS,
    trace: bool = False,
    check_invariants: bool = False,
) -> RunResult:
    """Walk DPT(S, Π) from the empty record; the model is classical/supported/stable per S."""
    graph = SingleLayerGraph(program, members, unit_name)
    return _run_graph(graph, program, strategy or Strategy(), max_steps, trace, check_invariants)


def write_trace(path: str, result: RunResult, header: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(json.dumps(header) + "\n")
        for entry in result.trace:
            fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


@dataclass
class ReplayResult:
    ok: bool
    steps: int
    message: str
    result: RunResult | None = None


def replay(program: Program, cfg: SolverConfig | None, lines: Sequence[dict], members=None, unit_name: str = PROPAGATE) -> ReplayResult:
    """Re-apply the recorded transitions from the initial state and compare
    every recorded target and the terminal line."""
    table = program.table
    graph = SingleLayerGraph(program, members, unit_name) if cfg is None else TwoLayerGraph(program, cfg)
    state = graph.initial() if cfg is None else initial_state()
    steps = [l for l in lines if "step" in l]
    terminals = [l for l in lines if "terminal" in l]
    for i, rec in enumerate(steps):
        moves = graph.transitions(state)
        want = table.lit(rec["literal"]) if rec.get("literal") is not None else None
        clause = tuple(table.lit(x) for x in rec["clause"]) if "clause" in rec else None
        match = None
        for t in moves:
            if t.rule != rec["rule"] or (want is not None and t.literal != want):
                continue
            if clause is not None and t.clause != clause:
                continue
            got = trace_step(rec["step"], t, table)
            if all(got.get(k) == rec.get(k) for k in ("left", "right", "side")):
                match = t
                break
        if match is None:
            return ReplayResult(False, i, f"step {rec['step']} ({rec['rule']}) does not reproduce")
        state = match.target
    if isinstance(state, Ok):
        model = positive_atoms(state.record.lits) & frozenset(program.atoms())
        res = RunResult("SAT", model, state, len(steps), {})
    elif isinstance(state, Fail):
        res = RunResult("UNSAT", None, state, len(steps), {})
    else:
        return ReplayResult(False, len(steps), "trace ends in a non-terminal state")
    if terminals and terminals[-1] != terminal_entry(res, table):
        return ReplayResult(False, len(steps), "terminal line differs", res)
    return ReplayResult(True, len(steps), "reproduced", res)


def read_trace(path: str) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# ---------------------------------------------------------------------------
# Exhaustive exploration


def segment_key(record: Record) -> tuple:
    """Record up to the order of propagated literals inside each decision level.

    Every guard reads the set view, the decision marks and the level
    structure only, so records with the same key have corresponding
    transitions: the quotient is a bisimulation.
    """
    segs: list = [[None, []]]
    for lit, d in record.entries:
        if d:
            segs.append([lit, []])
        else:
            segs[-1][1].append(lit)
    return tuple((d, frozenset(p)) for d, p in segs)


def exact_key(record: Record) -> tuple:
    return record.entries


@dataclass
class ChecksReport:
    verdict: str  # "holds", "violated" or "inconclusive"
    states: int = 0
    edges: int = 0
    violations: list[str] = field(default_factory=list)
    ok_models: set[frozenset[int]] = field(default_factory=set)
    fail_reachable: bool = False
    expected: set[frozenset[int]] = field(default_factory=set)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


class _Cap(Exception):
    pass


@dataclass
class _RightSummary:
    ok: bool
    stuck: bool
    states: int
    edges: frozenset


def _explore_right(graph: TwoLayerGraph, left: Record, keyfn, budget: list[int], violations: list[str], with_edges: bool) -> _RightSummary:
    start = TwoLayer(left, Record(), "R")
    seen = {keyfn(start.right): start}
    queue = deque([start])
    ok = stuck = False
    edges = set()
    n_edges = 0
    while queue:
        st = queue.popleft()
        moves = graph.right_moves(st, True)
        if not moves:
            stuck = True
            continue
        for t in moves:
            n_edges += 1
            if not graph.measure(st) < graph.measure(t.target):
                violations.append(f"measure violated by {t.rule}")
            if isinstance(t.target, Ok):
                ok = True
                if with_edges:
                    edges.add((keyfn(st.right), "ok"))
                continue
            k = keyfn(t.target.right)
            if with_edges:
                edges.add((keyfn(st.right), k))
            if k not in seen:
                budget[0] -= 1
                if budget[0] < 0:
                    raise _Cap()
                seen[k] = t.target
                queue.append(t.target)
    return _RightSummary(ok, stuck, len(seen), frozenset(edges))


@dataclass
class _Exploration:
    left_edges: set
    crossings: dict
    states: int
    edges: int
    ok_records: list
    fail: bool
    violations: list


def _explore_two_layer(graph: TwoLayerGraph, max_states: int, keyfn, with_edges: bool) -> _Exploration:
    if graph.cfg.learning or graph.cfg.early_test or graph.cfg.separate:
        raise ValueError("exhaustive exploration covers the base two-layer graphs only")
    budget = [max_states]
    start = initial_state()
    seen = {keyfn(start.left): start}
    queue = deque([start])
    left_edges = set()
    crossings: dict = {}
    right_cache: dict = {}
    ok_records = []
    violations: list[str] = []
    fail = False
    n_states = 1
    n_edges = 0

    def visit(src, t: Transition):
        nonlocal fail, n_edges
        n_edges += 1
        if not graph.measure(src) < graph.measure(t.target):
            violations.append(f"measure violated by {t.rule}")
        tgt = t.target
        if isinstance(tgt, Fail):
            fail = True
            if with_edges:
                left_edges.add((keyfn(src.left), src.side, "fail"))
            return
        k = keyfn(tgt.left)
        if with_edges:
            left_edges.add((keyfn(src.left), src.side, (k, tgt.side)))
        if tgt.side == "L" and k not in seen:
            budget[0] -= 1
            if budget[0] < 0:
                raise _Cap()
            seen[k] = tgt
            queue.append(tgt)

    while queue:
        st = queue.popleft()
        moves = graph.left_moves(st, True)
        if moves:
            for t in moves:
                visit(st, t)
            continue
        t = graph._cross(st)
        visit(st, t)
        lk = keyfn(st.left)
        if lk in crossings:
            continue
        cand = restrict(st.left.lits, graph.pi_atoms)
        summ = right_cache.get(cand)
        if summ is None:
            summ = _explore_right(graph, st.left, exact_key if with_edges else keyfn, budget, violations, with_edges)
            right_cache[cand] = summ
        crossings[lk] = summ
        n_states += summ.states
        n_edges += len(summ.edges)
        if summ.ok:
            ok_records.append(st.left)
        if summ.stuck:
            for rt in graph._rl_moves(TwoLayer(st.left, Record(), "R")):
                src = TwoLayer(st.left, Record(), "R")
                if rt.rule == CONCLUDE_RL:
                    fail = True
                    n_edges += 1
                    if with_edges:
                        left_edges.add((lk, "R", "fail"))
                else:
                    visit(src, rt)
    return _Exploration(left_edges, crossings, n_states + len(seen), n_edges, ok_records, fail, violations)


class _Summaries:
    """Reachable outcomes of states, memoised on the literal sets of their records.

    In the base graphs every guard reads the set of literals of each record
    and whether the record has a decision; the only transitions that look
    further into a record are the conflict transitions, which go to the
    record cut at its last decision with that decision flipped, or to
    Failstate (left layer) or Ok (right layer) when there is no decision.
    Call that target the *backtrack target* of the state. The terminals
    reachable from a state are then ``own ∪ (back if conflict)``, where
    ``own`` and the flag ``conflict`` (a conflict transition is reachable)
    depend on the literal sets only, and ``back`` are the terminals
    reachable from the backtrack target. A Decide edge to ``M d`` is
    followed by computing both ``M d`` and the state ``M ¬d`` it backtracks
    to. In the right layer there are two kinds of conflict: within the
    right record (to the right backtrack target) and Backtrack_RL or
    Conclude_RL (to the left one), so the summary of a right state carries
    two flags.

    Records only grow along propagations, so every state reachable from one
    with an inconsistent record by propagation is inconsistent too and has
    the conflict transition among its moves; the summary of such a state is
    just the conflict. Only its conflict edge is generated and checked.
    """

    def __init__(self, graph, universe: frozenset[int], max_states: int):
        self.graph = graph
        self.universe = universe
        self.max_states = max_states
        self.memo: dict = {}
        self.edges = 0

    def _edge(self, state, t: Transition, own: set) -> None:
        self.edges += 1
        if not self.graph.measure(state) < self.graph.measure(t.target):
            own.add(("violation", f"measure does not increase along {t.rule}"))

    def _store(self, key, value):
        if len(self.memo) >= self.max_states:
            raise _Cap()
        self.memo[key] = value
        return value

    def single(self, rec: Record) -> tuple[frozenset, bool]:
        key = rec.lits
        if key in self.memo:
            return self.memo[key]
        own: set = set()
        conflict = False
        if not rec.is_consistent():
            for t in self.graph.moves(rec, False):
                self._edge(rec, t, own)
            return frozenset(own), True
        moves = self.graph.moves(rec, True)
        if not moves:
            own.add(("violation", f"non-terminal state {rec.entries} has no successor"))
        consistent = rec.is_consistent()
        for t in moves:
            self._edge(rec, t, own)
            if t.rule in (BACKTRACK, CONCLUDE):
                conflict = True
            elif isinstance(t.target, Ok):
                own.add(("ok", positive_atoms(t.target.record.lits) & self.universe))
            elif not consistent:
                continue
            elif t.rule == DECIDE:
                o1, c1 = self.single(t.target)
                own |= o1
                if c1:
                    o2, c2 = self.single(rec.push(t.literal ^ 1))
                    own |= o2
                    conflict |= c2
            else:
                o1, c1 = self.single(t.target)
                own |= o1
                conflict |= c1
        return self._store(key, (frozenset(own), conflict))

    def two(self, st: TwoLayer) -> tuple[frozenset, bool, bool]:
        """(own outcomes, left conflict reachable, right conflict reachable)."""
        g = self.graph
        right = st.side == "R"
        key = (st.left.lits, st.right.lits) if right else st.left.lits
        if key in self.memo:
            return self.memo[key]
        own: set = set()
        cl = cr = False
        rec = st.right if right else st.left
        if not rec.is_consistent():
            moves = (g.right_moves if right else g.left_moves)(st, False)
            for t in moves:
                self._edge(st, t, own)
            return frozenset(own), not right, right
        if right:
            moves = g.right_moves(st, True) or g._rl_moves(st)
        else:
            moves = g.left_moves(st, True) or [g._cross(st)]
        consistent = True
        for t in moves:
            self._edge(st, t, own)
            tgt = t.target
            if t.rule in (BACKTRACK_L, CONCLUDE_L, BACKTRACK_RL, CONCLUDE_RL):
                cl = True
            elif t.rule == BACKTRACK_R or (right and t.rule == CONCLUDE_R):
                cr = True
            elif isinstance(tgt, Ok):
                own.add(("ok", positive_atoms(tgt.record.lits) & self.universe))
            elif not consistent:
                continue
            elif t.rule == DECIDE_L:
                o1, c1, _ = self.two(tgt)
                own |= o1
                if c1:
                    o2, c2, _ = self.two(replace(st, left=st.left.push(t.literal ^ 1)))
                    own |= o2
                    cl |= c2
            elif t.rule == DECIDE_R:
                o1, l1, r1 = self.two(tgt)
                own |= o1
                cl |= l1
                if r1:
                    o2, l2, r2 = self.two(replace(st, right=st.right.push(t.literal ^ 1)))
                    own |= o2
                    cl |= l2
                    cr |= r2
            elif t.rule == CROSS_LR:
                o1, l1, r1 = self.two(tgt)
                own |= o1
                cl |= l1
                if r1:
                    own.add(("ok", positive_atoms(st.left.lits) & self.universe))
            else:
                o1, l1, r1 = self.two(tgt)
                own |= o1
                cl |= l1
                cr |= r1
        return self._store(key, (frozenset(own), cl, cr))


def explore_graph(
    program: Program,
    cfg: SolverConfig | None = None,
    max_states: int = 200_000,
    members: Iterable[str] | None = None,
    quotient: bool = True,
) -> ChecksReport:
    """Check the "checks" conditions on the reachable part of a graph.

    With ``cfg=None`` the single-layer graph DPT(members, Π) is explored and
    N is the set of models of the type the members enforce; otherwise the
    base two-layer graph is explored and N is the set of stable models.

    With ``quotient`` (the default) reachable outcomes are computed once per
    state abstraction (see :class:`_Summaries`), which keeps programs with
    a handful of atoms tractable; ``states`` then counts abstractions.
    Without it every record is visited individually (up to the order of
    propagations within a decision level). In both modes acyclicity is
    established by checking that the progress measure strictly increases
    along every explored edge, and every non-terminal state is checked to
    have a successor.
    """
    universe = frozenset(program.atoms())
    if cfg is None:
        members = frozenset(members if members is not None else propagators.PSETS["up"])
        kind = propagators.enforcing_type(members) or "cla"
        expected = oracle.models(program, kind)
        graph = SingleLayerGraph(program, members)
    else:
        if cfg.learning or cfg.early_test or cfg.separate:
            raise ValueError("exhaustive exploration covers the base two-layer graphs only")
        expected = oracle.stable_models(program)
        graph = TwoLayerGraph(program, cfg)
    report = ChecksReport("holds", expected=expected)
    if not quotient:
        return _explore_exact(program, cfg, graph, max_states, report, expected)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20_000))
    summ = _Summaries(graph, universe, max_states)
    try:
        if cfg is None:
            own, conflict = summ.single(Record())
        else:
            own, conflict, _ = summ.two(initial_state())
        outcomes = own | ({("fail",)} if conflict else set())
    except _Cap:
        report.verdict = "inconclusive"
        report.states = max_states
        return report
    finally:
        sys.setrecursionlimit(limit)
    report.states, report.edges = len(summ.memo), summ.edges
    for o in sorted(outcomes, key=repr):
        if o[0] == "violation":
            report.violations.append(o[1])
        elif o[0] == "fail":
            report.fail_reachable = True
        else:
            report.ok_models.add(o[1])
    return _finish(report, expected)


def _explore_exact(program, cfg, graph, max_states, report, expected) -> ChecksReport:
    keyfn = segment_key
    universe = frozenset(program.atoms())
    if cfg is None:
        seen = {keyfn(Record())}
        queue = deque([Record()])
        try:
            while queue:
                st = queue.popleft()
                moves = graph.moves(st, True)
                if not moves:
                    report.violations.append(f"non-terminal state {st.render(program.table)} has no successor")
                for t in moves:
                    report.edges += 1
                    if not graph.measure(st) < graph.measure(t.target):
                        report.violations.append(f"measure violated by {t.rule}")
                    if isinstance(t.target, Fail):
                        report.fail_reachable = True
                    elif isinstance(t.target, Ok):
                        report.ok_models.add(positive_atoms(t.target.record.lits) & universe)
                    else:
                        k = keyfn(t.target)
                        if k not in seen:
                            if len(seen) >= max_states:
                                raise _Cap()
                            seen.add(k)
                            queue.append(t.target)
        except _Cap:
            report.verdict = "inconclusive"
            report.states = len(seen)
            return report
        report.states = len(seen)
        return _finish(report, expected)
    try:
        ex = _explore_two_layer(graph, max_states, keyfn, with_edges=False)
    except _Cap:
        report.verdict = "inconclusive"
        report.states = max_states
        return report
    report.states, report.edges = ex.states, ex.edges
    report.violations += ex.violations
    report.fail_reachable = ex.fail
    report.ok_models = {positive_atoms(r.lits) & universe for r in ex.ok_records}
    return _finish(report, expected)


def _finish(report: ChecksReport, expected) -> ChecksReport:
    bad = report.ok_models - expected
    if bad:
        report.violations.append(f"Ok states outside N: {sorted(map(sorted, bad))}")
    if report.fail_reachable != (not expected):
        report.violations.append(
            "Failstate reachable although N is non-empty" if report.fail_reachable else "N is empty but Failstate is unreachable"
        )
    report.verdict = "violated" if report.violations else "holds"
    return report


@dataclass
class GraphDiff:
    verdict: str  # "IDENTICAL", "DIFFERS" or "INCONCLUSIVE"
    first_difference: str | None = None
    edges: int = 0


def compare_graphs(
    program: Program, left: SolverConfig, right: SolverConfig, max_states: int = 200_000, quotient: bool = True
) -> GraphDiff:
    """Compare the reachable edge relations of two base two-layer graphs that
    share their witness pair.

    With ``quotient`` (the default) the comparison runs on literal sets: the
    left-rules offered at a record depend only on its literal set and on
    whether it holds a decision, and the targets are built from the record
    by code shared by both graphs. Two graphs over the same atoms therefore
    coincide exactly when they offer the same (rule, literal) labels on every
    reachable literal set and build the same witness program at every
    crossing. Every consistent literal set is reachable by decisions, so the
    comparison covers all of them plus the inconsistent sets propagation
    reaches from them. ``quotient=False`` compares the record-level edges
    of both explorations instead.
    """
    if left.test.name != right.test.name or left.right != right.right:
        raise ValueError("compare_graphs needs configurations with the same witness pair")
    if quotient:
        return _compare_literal_sets(program, TwoLayerGraph(program, left), TwoLayerGraph(program, right), max_states)
    explorations = []
    for cfg in (left, right):
        try:
            explorations.append(_explore_two_layer(TwoLayerGraph(program, cfg), max_states, exact_key, True))
        except _Cap:
            return GraphDiff("INCONCLUSIVE", "state cap exceeded")
    a, b = explorations
    table = program.table

    def show(edge) -> str:
        def rec(entries):
            return Record(entries).render(table) or "∅"

        src, side, dst = edge
        tgt = "Failstate" if dst == "fail" else f"({rec(dst[0])})_{dst[1]}"
        return f"({rec(src)})_{side} -> {tgt}"

    only = sorted(a.left_edges ^ b.left_edges, key=lambda e: (len(e[0]), str(e)))
    if only:
        which = "left" if only[0] in a.left_edges else "right"
        return GraphDiff("DIFFERS", f"edge only in the {which} graph: {show(only[0])}", len(a.left_edges))
    if a.crossings.keys() != b.crossings.keys():
        return GraphDiff("DIFFERS", "different crossing records")
    for k, summ in a.crossings.items():
        other = b.crossings[k]
        if summ.edges != other.edges or (summ.ok, summ.stuck) != (other.ok, other.stuck):
            return GraphDiff("DIFFERS", f"right layers differ after crossing with {Record(k).render(table)}")
    total = len(a.left_edges) + sum(len(s.edges) for s in a.crossings.values())
    return GraphDiff("IDENTICAL", None, total)


def _labels(graph: TwoLayerGraph, lits: frozenset[int]) -> tuple[frozenset, bool]:
    """(rule, literal) labels of the left-rules at a record with these
    literals and at least one decision, and whether ``Cross_LR`` applies."""
    record = Record((l, True) for l in sorted(lits))
    moves = graph.left_moves(TwoLayer(record, Record(), "L"), True)
    return frozenset((m.rule, m.literal) for m in moves), not moves


def _compare_literal_sets(program: Program, a: TwoLayerGraph, b: TwoLayerGraph, max_states: int) -> GraphDiff:
    table = program.table
    if a.gen_atoms != b.gen_atoms:
        return GraphDiff("DIFFERS", "the generated programs have different atoms")
    atoms = a.gen_atoms
    if 3 ** len(atoms) > max_states:
        return GraphDiff("INCONCLUSIVE", "state cap exceeded")
    show = lambda lits: "{" + " ".join(table.lit_str(l) for l in sorted(lits)) + "}"
    queue = deque()
    for signs in itertools.product((None, False, True), repeat=len(atoms)):
        queue.append(frozenset(pos(x) if s else neg(x) for x, s in zip(atoms, signs) if s is not None))
    seen = set(queue)
    edges = 0
    while queue:
        lits = queue.popleft()
        la, cross_a = _labels(a, lits)
        lb, cross_b = _labels(b, lits)
        if la != lb:
            rule, lit = min(la ^ lb, key=lambda e: (e[0], e[1] if e[1] is not None else -2))
            which = "first" if (rule, lit) in la else "second"
            label = rule + (f" {table.lit_str(lit)}" if lit is not None else "")
            return GraphDiff("DIFFERS", f"{label} at {show(lits)} only in the {which} graph", edges)
        edges += len(la)
        if cross_a:
            record = Record((l, True) for l in sorted(lits))
            wa, wb = a.witness_program(record), b.witness_program(record)
            if wa.atoms() != wb.atoms() or sorted(wa.clauses()) != sorted(wb.clauses()):
                return GraphDiff("DIFFERS", f"right layers differ after crossing with {show(lits)}", edges)
            edges += 1
            continue
        for rule, lit in la:
            if rule == PROPAGATE_L and lit is not None:
                nxt = lits | {lit}
                if nxt not in seen:
                    if len(seen) >= max_states:
                        return GraphDiff("INCONCLUSIVE", "state cap exceeded", edges)
                    seen.add(nxt)
                    queue.append(nxt)
    return GraphDiff("IDENTICAL", None, edges)
