"""Generating and witness program functions.

A generating function maps a program to a program over a superset of its
atoms whose models (of some type) approximate the stable models; a witness
function maps a program and a candidate assignment to a program that has no
models (of some type) exactly when the candidate is stable.

CNF results are programs in clause mode: the clause ``C`` is the constraint
``:- not C`` and keeps repeated literals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .program import (
    AtomTable,
    FALSUM,
    Program,
    Rule,
    atom_of,
    covers,
    is_positive,
    neg,
    pos,
    positive_atoms,
)


# ---------------------------------------------------------------------------
# Completion


@dataclass(frozen=True)
class Completion:
    """A program together with one support formula per atom.

    ``support[a]`` lists the conjunctions ``B ∧ ¬A`` of the rules ``A ∨ a ← B``;
    the formula for ``a`` is ``¬a ∨ ⋁ support[a]``. An empty list is the empty
    disjunction (falsum); an empty conjunction is verum.
    """

    program: Program
    support: dict[int, tuple[tuple[int, ...], ...]]


def support_conjunction(rule: Rule, a: int) -> tuple[int, ...]:
    """``B ∧ ¬(head ∖ {a})`` as literals: the body in canonical order, then the
    negated remaining head atoms. Repeated literals are merged."""
    lits = list(rule.body_lits())
    lits.sort()
    lits += [neg(h) for h in rule.head if h != a]
    seen: list[int] = []
    for l in lits:
        if l not in seen:
            seen.append(l)
    return tuple(seen)


def completion(program: Program) -> Completion:
    support = {
        a: tuple(support_conjunction(program.rules[i], a) for i in program.rules_with_head(a))
        for a in program.atoms()
    }
    return Completion(program, support)


def cnfcomp(program: Program) -> Program:
    """The completion in conjunctive normal form, by distributivity.

    Clauses keep every literal the distribution produces, repetitions and
    tautologies included: ``a :- not a`` gives ``(a ∨ a) ∧ (¬a ∨ ¬a)``.
    """
    comp = completion(program)
    clauses: list[tuple[int, ...]] = [r.clause_lits() for r in program.rules]
    for a in program.atoms():
        disjuncts = comp.support[a]
        for pick in itertools.product(*disjuncts):
            clauses.append((neg(a),) + tuple(pick))
    return Program.from_clauses(clauses, program.table)


# ---------------------------------------------------------------------------
# Auxiliary atom names


def _canonical_body(table: AtomTable, rule: Rule) -> list[str]:
    out = []
    for l in sorted(set(rule.body_lits())):
        name = table.name(atom_of(l))
        out.append(name if is_positive(l) else "N" + name)
    return out


def body_atom(table: AtomTable, rule: Rule) -> int:
    """``b__<body>``: the atom standing for the body of ``rule``."""
    return table.intern("b__" + ("__".join(_canonical_body(table, rule)) or "T"))


def head_body_atom(table: AtomTable, a: int, rule: Rule, qualify: bool = False) -> int:
    """``h__<a>__<body>``: the atom standing for ``a`` being derived by ``rule``.

    With ``qualify`` the rest of the head is appended (``__O<b>...``), which
    keeps two disjunctive rules with the same body and different heads apart.
    """
    name = "h__" + table.name(a) + "__" + ("__".join(_canonical_body(table, rule)) or "T")
    if qualify:
        name += "__O" + "_".join(table.name(h) for h in rule.head if h != a)
    return table.intern(name)


def r_atom(table: AtomTable, a: int) -> int:
    return table.intern(table.name(a) + "__r")


def s_atom(table: AtomTable, a: int) -> int:
    return table.intern(table.name(a) + "__s")


def _body_key(rule: Rule) -> frozenset[int]:
    return frozenset(rule.body_lits())


# ---------------------------------------------------------------------------
# cmodels


def gen_cmodels(program: Program) -> Program:
    """Clark-style completion with one auxiliary atom per distinct body and
    per (head atom, body) pair of disjunctive rules."""
    t = program.table
    rules = program.rules
    clauses: list[tuple[int, ...]] = []
    bodies: dict[frozenset[int], int] = {}
    for r in rules:
        key = _body_key(r)
        if key not in bodies:
            bodies[key] = body_atom(t, r)
            x = bodies[key]
            body = sorted(key)
            clauses.append((pos(x),) + tuple(l ^ 1 for l in body))
            for l in body:
                clauses.append((neg(x), l))
    aux_hb: dict[tuple[int, int], int] = {}
    rests: dict[tuple[int, frozenset[int]], set[tuple[int, ...]]] = {}
    for r in rules:
        if r.is_disjunctive():
            for a in r.head:
                rests.setdefault((a, _body_key(r)), set()).add(tuple(h for h in r.head if h != a))
    for i, r in enumerate(rules):
        if not r.is_disjunctive():
            continue
        x = bodies[_body_key(r)]
        for a in r.head:
            y = head_body_atom(t, a, r, qualify=len(rests[(a, _body_key(r))]) > 1)
            aux_hb[(i, a)] = y
            rest = [h for h in r.head if h != a]
            clauses.append((pos(y), neg(x)) + tuple(pos(h) for h in rest))
            for h in rest:
                clauses.append((neg(y), neg(h)))
            clauses.append((neg(y), pos(x)))
    for r in rules:
        clauses.append((neg(bodies[_body_key(r)]),) + tuple(pos(h) for h in r.head))
    for a in program.atoms():
        clause = [neg(a)]
        for i in program.rules_with_head(a):
            r = rules[i]
            clause.append(pos(aux_hb[(i, a)]) if r.is_disjunctive() else pos(bodies[_body_key(r)]))
        clauses.append(tuple(clause))
    return Program.from_clauses(_dedupe(clauses), t)


def _dedupe(clauses: Iterable[tuple[int, ...]]) -> list[tuple[int, ...]]:
    seen: set[tuple[int, ...]] = set()
    out = []
    for c in clauses:
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def _check_candidate(program: Program, lits: frozenset[int]) -> None:
    if FALSUM in lits or any((l ^ 1) in lits for l in lits):
        raise ValueError("candidate must be consistent")
    if not covers(lits, program):
        raise ValueError("candidate must assign every atom of the program")


def _reduct_rules(program: Program, true: frozenset[int]) -> list[Rule]:
    return [r for r in program.rules if not true.intersection(r.neg)]


def test_cmodels(program: Program, lits: Iterable[int]) -> Program:
    """Satisfiable exactly when a proper subset of the candidate's true atoms
    is a model of the reduct."""
    m = frozenset(lits)
    _check_candidate(program, m)
    atoms = set(program.atoms())
    true = positive_atoms(m) & atoms
    clauses: list[tuple[int, ...]] = [tuple(neg(a) for a in sorted(true))]
    clauses += [(neg(a),) for a in sorted(atoms - true)]
    for r in _reduct_rules(program, true):
        if true.issuperset(r.pos):
            clauses.append(tuple(neg(b) for b in r.pos) + tuple(pos(h) for h in r.head))
    return Program.from_clauses(_dedupe(clauses), program.table)


# ---------------------------------------------------------------------------
# gnt


def gen_gnt(program: Program) -> Program:
    """Non-disjunctive program whose stable models are the classical models
    that are minimal among those agreeing on the disjunctive heads' guesses."""
    t = program.table
    normal = [r for r in program.rules if not r.is_disjunctive()]
    disj = [r for r in program.rules if r.is_disjunctive()]
    out: list[Rule] = list(normal)
    d_atoms = sorted({a for r in disj for a in r.head})
    for r in disj:
        for a in r.head:
            out.append(Rule.make([a], r.pos, list(r.neg) + [r_atom(t, a)]))
    for r in disj:
        for a in r.head:
            out.append(Rule.make([r_atom(t, a)], [], [a]))
    for r in disj:
        out.append(Rule.make([], r.pos, list(r.neg) + list(r.head)))
    for a in d_atoms:
        for i in program.rules_with_head(a):
            r = program.rules[i]
            rest = [h for h in r.head if h != a]
            out.append(Rule.make([s_atom(t, a)], r.pos, list(r.neg) + rest))
    for a in d_atoms:
        out.append(Rule.make([], [a], [s_atom(t, a)]))
    return Program(out, t)


def test_gnt(program: Program, lits: Iterable[int], partial: bool = False) -> Program:
    """Non-disjunctive program with a stable model exactly when a proper
    subset of the candidate's true atoms is a model of the reduct.

    With ``partial=True`` the candidate may leave atoms unassigned; the
    result then has a stable model only if every total extension of the
    candidate fails the minimality test: rules whose positive body meets a
    false atom are dropped, and rules that any extension would satisfy
    through an unassigned head atom in their own body are ignored.
    """
    m = frozenset(lits)
    if partial:
        if FALSUM in m or any((l ^ 1) in m for l in m):
            raise ValueError("candidate must be consistent")
    else:
        _check_candidate(program, m)
    t = program.table
    atoms = set(program.atoms())
    true = positive_atoms(m) & atoms
    false = {atom_of(l) for l in m if not is_positive(l)} & atoms
    unknown = atoms - true - false
    reduct = _reduct_rules(program, true)
    normal_out: list[Rule] = []
    r_rules: list[Rule] = []
    guesses: list[Rule] = []
    constraints: list[Rule] = []
    for r in reduct:
        if set(r.pos) & false:
            continue
        if set(r.head) & set(r.pos) & unknown:
            continue  # any extension making the body true also makes the head true
        body = [b for b in r.pos if b in true]
        if r.is_disjunctive():
            for a in r.head:
                if a in true:
                    guesses.append(Rule.make([a], body, [r_atom(t, a)]))
                    r_rules.append(Rule.make([r_atom(t, a)], [], [a]))
            constraints.append(Rule.make([], body, r.head))
        elif r.head and r.head[0] in true:
            normal_out.append(Rule.make(r.head, body, []))
        else:
            # only reachable for partial candidates: the head cannot be kept
            constraints.append(Rule.make([], body, []))
    block = Rule.make([], sorted(true), sorted(false))
    return Program(guesses + r_rules + constraints + normal_out + [block], t)


# ---------------------------------------------------------------------------
# dlv


def gen_dlv(program: Program) -> Program:
    return program


def test_dlv(program: Program, lits: Iterable[int]) -> Program:
    """CNF over the candidate's true atoms, read as "this atom is removed".

    A model removes a non-empty set of true atoms so that every reduct rule
    whose body survives keeps one of its true head atoms; it exists exactly
    when the candidate's true atoms are not a minimal model of the reduct.
    """
    m = frozenset(lits)
    _check_candidate(program, m)
    atoms = set(program.atoms())
    true = positive_atoms(m) & atoms
    clauses: list[tuple[int, ...]] = []
    for r in _reduct_rules(program, true):
        if not true.issuperset(r.pos):
            continue
        clauses.append(tuple(pos(b) for b in r.pos) + tuple(neg(h) for h in r.head if h in true))
    clauses.append(tuple(pos(a) for a in sorted(true)))
    return Program.from_clauses(_dedupe(clauses), program.table)


# ---------------------------------------------------------------------------
# Registry


@dataclass(frozen=True)
class GeneratingFunction:
    name: str
    apply: Callable[[Program], Program]
    approx_type: str
    with_respect_to: tuple[str, ...]


@dataclass(frozen=True)
class WitnessFunction:
    name: str
    apply: Callable[[Program, frozenset[int]], Program]
    ensure_type: str
    with_respect_to: tuple[str, ...]


GENERATORS: dict[str, GeneratingFunction] = {
    "cnfcomp": GeneratingFunction("cnfcomp", cnfcomp, "cla", ("sup", "cla")),
    "cmodelsGen": GeneratingFunction("cmodelsGen", gen_cmodels, "cla", ("sup", "cla")),
    "gntGen": GeneratingFunction("gntGen", gen_gnt, "sta", ("cla",)),
    "dlvGen": GeneratingFunction("dlvGen", gen_dlv, "sup", ("cla",)),
}

WITNESSES: dict[str, WitnessFunction] = {
    "cmodelsTest": WitnessFunction("cmodelsTest", test_cmodels, "cla", ("cla", "sup")),
    "gntTest": WitnessFunction("gntTest", test_gnt, "sta", ("cla",)),
    "dlvTest": WitnessFunction("dlvTest", test_dlv, "cla", ("cla",)),
}


def _lookup(table: dict, name: str):
    for key, value in table.items():
        if key.lower() == name.lower():
            return value
    raise KeyError(f"unknown transform {name!r}; choose from {sorted(table)}")


def generator(name: str) -> GeneratingFunction:
    return _lookup(GENERATORS, name)


def witness(name: str) -> WitnessFunction:
    return _lookup(WITNESSES, name)


def common_types(gen: GeneratingFunction, test: WitnessFunction) -> set[str]:
    """Model types w for which the generator approximates and the witness ensures."""
    return set(gen.with_respect_to) & set(test.with_respect_to)
