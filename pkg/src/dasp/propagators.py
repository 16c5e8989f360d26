"""Propagator conditions and the harness that checks them for soundness and completeness.

A p-condition maps a program and a (partial) literal set to the literals it
allows to be added. The four conditions are evaluated in the fixed order
``UnitPropagate``, ``AllRulesCancelled``, ``BackchainTrue``, ``Unfounded``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import oracle
from .program import FALSUM, Program, atom_of, consistent, interpretation, neg, pos

UNIT = "UnitPropagate"
ARC = "AllRulesCancelled"
BACKCHAIN = "BackchainTrue"
UNFOUNDED = "Unfounded"

ORDER = (UNIT, ARC, BACKCHAIN, UNFOUNDED)

PSETS: dict[str, frozenset[str]] = {
    "up": frozenset({UNIT}),
    "sd": frozenset({UNIT, ARC, BACKCHAIN}),
    "sm": frozenset({UNIT, ARC, BACKCHAIN, UNFOUNDED}),
}

_ALIASES = {"up": UNIT, "unit": UNIT, "arc": ARC, "bt": BACKCHAIN, "unf": UNFOUNDED}


def pset(spec: str | Iterable[str]) -> frozenset[str]:
    """``"sd"``, ``"UP,ARC"`` or an iterable of condition names."""
    if isinstance(spec, str):
        if spec in PSETS:
            return PSETS[spec]
        parts = [p.strip() for p in spec.split(",") if p.strip()]
    else:
        parts = list(spec)
    out = set()
    for p in parts:
        if p in ORDER:
            out.add(p)
        elif p.lower() in _ALIASES:
            out.add(_ALIASES[p.lower()])
        else:
            raise ValueError(f"unknown propagator condition {p!r}")
    return frozenset(out)


def pset_name(members: frozenset[str]) -> str:
    for name, m in PSETS.items():
        if m == members:
            return name
    return ",".join(c for c in ORDER if c in members)


def enforcing_type(members: frozenset[str]) -> str | None:
    """The model type a condition set enforces, when it is one of the known sets."""
    if UNIT in members and UNFOUNDED in members:
        return "sta"
    if UNIT in members and ARC in members:
        return "sup"
    if members == PSETS["up"]:
        return "cla"
    return None


# ---------------------------------------------------------------------------
# The four conditions


def _unit(program: Program, lits: frozenset[int]) -> set[int]:
    out: set[int] = set()
    for clause in program.clauses():
        if not clause:
            if FALSUM not in lits:
                out.add(FALSUM)
            continue
        free = [l for l in clause if (l ^ 1) not in lits]
        if len(free) == 0:
            out.update(l for l in clause if l not in lits)
        elif len(free) == 1 and free[0] not in lits:
            out.add(free[0])
    return out


def _body_cancelled(r, lits: frozenset[int]) -> bool:
    return any(neg(a) in lits for a in r.pos) or any(pos(a) in lits for a in r.neg)


def _supporting(r, a: int, lits: frozenset[int]) -> bool:
    if _body_cancelled(r, lits):
        return False
    return not any(h != a and pos(h) in lits for h in r.head)


def _arc(program: Program, lits: frozenset[int]) -> set[int]:
    out = set()
    for a in program.atoms():
        if neg(a) in lits:
            continue
        if not any(_supporting(program.rules[i], a, lits) for i in program.rules_with_head(a)):
            out.add(neg(a))
    return out


def _backchain(program: Program, lits: frozenset[int]) -> set[int]:
    out = set()
    for a in program.atoms():
        if pos(a) not in lits:
            continue
        idx = program.rules_with_head(a)
        live = [i for i in idx if _supporting(program.rules[i], a, lits)]
        if len(live) > 1:
            continue
        # the chosen rule need not be supporting itself; all the others must not be
        candidates = live if live else idx
        for i in candidates:
            r = program.rules[i]
            forced = [neg(h) for h in r.head if h != a] + list(r.body_lits())
            out.update(l for l in forced if l not in lits)
    return out


def unfounded_witnesses(program: Program, lits: Iterable[int]) -> dict[int, frozenset[int]]:
    """For every atom lying in some set unfounded on ``lits``, one such set.

    Exact for disjunctive programs. The third unfounded condition only
    depends on which true atoms occurring in multi-atom heads are put in the
    set; those choices are enumerated, and for each the remaining atoms are
    settled by the usual greatest-fixpoint computation.
    """
    s = frozenset(lits)
    if not consistent(s):
        return {}
    atoms = program.atoms()
    rules = program.rules
    body_dead = [_body_cancelled(r, s) for r in rules]
    choice = sorted(
        {h for r in rules if len(r.head) > 1 for h in r.head if pos(h) in s}
    )
    found: dict[int, frozenset[int]] = {}
    for k in range(len(choice) + 1):
        for chosen in itertools.combinations(choice, k):
            inside = set(chosen)
            outside = set(choice) - inside
            active = [
                i
                for i, r in enumerate(rules)
                if not body_dead[i] and not any(h in outside for h in r.head if pos(h) in s)
            ]
            # least set of atoms that cannot belong to the unfounded set
            founded = set(outside)
            changed = True
            while changed:
                changed = False
                for i in active:
                    r = rules[i]
                    if founded.issuperset(r.pos):
                        for h in r.head:
                            if h not in founded:
                                founded.add(h)
                                changed = True
            if inside & founded:
                continue
            x = frozenset(a for a in atoms if a not in founded)
            if not x:
                continue
            for a in x:
                found.setdefault(a, x)
            if len(found) == len(atoms):
                return found
    return found


def _unfounded(program: Program, lits: frozenset[int]) -> set[int]:
    return {neg(a) for a in unfounded_witnesses(program, lits) if neg(a) not in lits}


_CONDITIONS: dict[str, Callable[[Program, frozenset[int]], set[int]]] = {
    UNIT: _unit,
    ARC: _arc,
    BACKCHAIN: _backchain,
    UNFOUNDED: _unfounded,
}


def pc_unit_propagate(program: Program, lits: Iterable[int]) -> set[int]:
    return _unit(program, frozenset(lits))


def pc_all_rules_cancelled(program: Program, lits: Iterable[int]) -> set[int]:
    return _arc(program, frozenset(lits))


def pc_backchain_true(program: Program, lits: Iterable[int]) -> set[int]:
    return _backchain(program, frozenset(lits))


def pc_unfounded(program: Program, lits: Iterable[int]) -> set[int]:
    return _unfounded(program, frozenset(lits))


def evaluate(condition: str, program: Program, lits: Iterable[int]) -> set[int]:
    return _CONDITIONS[condition](program, frozenset(lits))


def derives(condition: str, program: Program, lits: Iterable[int], lit: int) -> bool:
    """Whether ``condition`` derives ``lit`` from ``lits``; same as membership
    in :func:`evaluate`, with a direct check for UnitPropagate."""
    s = frozenset(lits)
    if condition != UNIT:
        return lit in _CONDITIONS[condition](program, s)
    if lit in s:
        return False
    for clause in program.clauses():
        if lit == FALSUM and not clause:
            return True
        if lit in clause:
            free = [l for l in clause if (l ^ 1) not in s]
            if not free or free == [lit]:
                return True
    return False


def out_prop(members: Iterable[str], program: Program, lits: Iterable[int]) -> set[int]:
    s = frozenset(lits)
    out: set[int] = set()
    for c in ORDER:
        if c in members:
            out |= _CONDITIONS[c](program, s)
    return out


def out_prop_labelled(members: Iterable[str], program: Program, lits: Iterable[int]) -> dict[int, str]:
    """Each derivable literal with the first condition (in evaluation order) deriving it."""
    s = frozenset(lits)
    out: dict[int, str] = {}
    for c in ORDER:
        if c in members:
            for l in _CONDITIONS[c](program, s):
                out.setdefault(l, c)
    return out


def first_derivable(members: Iterable[str], program: Program, lits: Iterable[int]) -> tuple[int, str] | None:
    """The literal the priority strategy propagates: the smallest literal of
    the first condition, in evaluation order, that derives anything."""
    s = frozenset(lits)
    for c in ORDER:
        if c in members:
            got = _CONDITIONS[c](program, s)
            if got:
                return min(got), c
    return None


# ---------------------------------------------------------------------------
# Reasons: a subset of the current literals that already licenses a derivation


def reason(condition: str, program: Program, lits: frozenset[int], lit: int) -> frozenset[int]:
    """A subset ``S`` of ``lits`` such that ``condition`` still derives ``lit`` from ``S``.

    Used by conflict analysis; the derivations are monotone in the literals
    that cancel rules or falsify clause literals.
    """
    if condition == UNIT:
        for clause in program.clauses():
            if lit == FALSUM and not clause:
                return frozenset()
            if lit in clause:
                rest = list(clause)
                rest.remove(lit)
                if all((l ^ 1) in lits for l in rest):
                    return frozenset(l ^ 1 for l in rest)
        raise ValueError("literal is not unit-derivable")
    if condition == ARC:
        a = atom_of(lit)
        return frozenset(_cancel_witness(program.rules[i], a, lits) for i in program.rules_with_head(a))
    if condition == BACKCHAIN:
        for a in program.atoms():
            if pos(a) not in lits:
                continue
            idx = program.rules_with_head(a)
            live = [i for i in idx if _supporting(program.rules[i], a, lits)]
            if len(live) > 1:
                continue
            for i in live if live else idx:
                r = program.rules[i]
                forced = [neg(h) for h in r.head if h != a] + list(r.body_lits())
                if lit in forced:
                    return frozenset(
                        [pos(a)] + [_cancel_witness(program.rules[j], a, lits) for j in idx if j != i]
                    )
        raise ValueError("literal is not derivable by backchaining")
    if condition == UNFOUNDED:
        x = unfounded_witnesses(program, lits)[atom_of(lit)]
        out = set()
        for a in x:
            for i in program.rules_with_head(a):
                r = program.rules[i]
                if set(r.pos) & x:
                    continue
                body = [l ^ 1 for l in r.body_lits() if (l ^ 1) in lits]
                if body:
                    out.add(body[0])
                    continue
                out.add(next(pos(h) for h in r.head if h not in x and pos(h) in lits))
        return frozenset(out)
    raise ValueError(f"unknown condition {condition!r}")


def _cancel_witness(r, a: int, lits: frozenset[int]) -> int:
    for l in r.body_lits():
        if (l ^ 1) in lits:
            return l ^ 1
    for h in r.head:
        if h != a and pos(h) in lits:
            return pos(h)
    raise ValueError("rule is supporting")


# ---------------------------------------------------------------------------
# Soundness / completeness harness


@dataclass
class EnforcingReport:
    members: frozenset[str]
    kind: str
    samples: int = 0
    soundness_checks: int = 0
    completeness_checks: int = 0
    counterexamples: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def check_enforcing(
    members: Iterable[str],
    kind: str,
    samples: Iterable[Program],
    rng: random.Random | None = None,
    partials_per_model: int = 3,
) -> EnforcingReport:
    """Test that ``members`` is ``kind``-sound and ``kind``-complete on the sample programs.

    Soundness: for random subsets ``M`` of every ``kind``-model ``M1``, the
    derived literals lie in ``M1``. Completeness: every complete consistent
    assignment is a ``kind``-model exactly when nothing can be derived from it.
    """
    members = frozenset(members)
    rng = rng or random.Random(0)
    report = EnforcingReport(members, kind)
    for program in samples:
        report.samples += 1
        universe = program.atoms()
        good = oracle.models(program, kind)
        good_lits = [interpretation(m, universe) for m in good]
        for full in good_lits:
            subsets = [full] + [
                frozenset(l for l in full if rng.random() < 0.5) for _ in range(partials_per_model)
            ]
            for sub in subsets:
                report.soundness_checks += 1
                derived = out_prop(members, program, sub)
                bad = derived - full
                if bad:
                    report.counterexamples.append(
                        f"unsound: {program!r} M={sorted(sub)} M1={sorted(full)} derived {sorted(bad)}"
                    )
        for bits in itertools.product((False, True), repeat=len(universe)):
            true = {a for a, b in zip(universe, bits) if b}
            full = interpretation(true, universe)
            report.completeness_checks += 1
            is_model = frozenset(true) in good
            quiet = not out_prop(members, program, full)
            if is_model != quiet:
                report.counterexamples.append(
                    f"incomplete: {program!r} M={sorted(true)} model={is_model} derived={not quiet}"
                )
    return report
