"""Conflict analysis for backjumping and learning.

Two analyses are offered. ``conflict_backjump_clause`` negates every
decision of the record; ``analyze_conflict`` walks the reasons of the
propagated literals back to the decisions that actually took part in the
conflict, which allows jumping over unrelated decision levels.

A left record can also hold literals that its layer's clauses do not
justify: the literal flipped when the right layer rejects a candidate. The
program-aware variants (``decision_clause`` and ``analyze_conflict``) treat
those like decisions when building the clause, so that every learnt clause
follows from the layer's program and the clauses learnt before it.
"""

from __future__ import annotations

from typing import Iterable

from . import propagators
from .program import FALSUM, Program, Record


def conflict_backjump_clause(record: Record) -> tuple[tuple[int, ...], int, int]:
    """``(clause, prefix_length, flipped)`` for an inconsistent record.

    The clause is the disjunction of the complements of all decision
    literals (in record order); the jump keeps the entries before the
    rightmost decision ``d`` and appends ``¬d``.
    """
    positions = record.decision_positions()
    if not positions:
        raise ValueError("the record has no decision literal")
    clause = tuple(record.entries[p][0] ^ 1 for p in positions)
    last = positions[-1]
    return clause, last, record.entries[last][0] ^ 1


def _derivation(program: Program, members: Iterable[str], lits: frozenset[int], lit: int) -> str | None:
    for c in propagators.ORDER:
        if c in members and propagators.derives(c, program, lits, lit):
            return c
    return None


def _conflict_lits(record: Record) -> list[int]:
    if record.has_falsum:
        return [FALSUM]
    seen: set[int] = set()
    for lit, _ in record.entries:
        if lit ^ 1 in seen:
            return [lit, lit ^ 1]
        seen.add(lit)
    raise ValueError("the record is consistent")


def assumption_positions(record: Record, program: Program, members: Iterable[str]) -> list[int]:
    """Positions of the entries the layer's program does not justify.

    These are the decisions plus every propagated entry that no condition
    re-derives from the entries before it. The latter are the literals
    flipped by a jump back from the right layer (or by a chronological
    backjump without a stored clause): they rest on the failed test of a
    candidate, not on the clauses of the left layer.
    """
    members = frozenset(members)
    out = []
    for i, (lit, decision) in enumerate(record.entries):
        if decision:
            out.append(i)
        elif lit != FALSUM and _derivation(program, members, frozenset(l for l, _ in record.entries[:i]), lit) is None:
            out.append(i)
    return out


def _jump_for(record: Record, used: list[int]) -> tuple[int, int]:
    """Target prefix and flipped literal for a clause over the entries ``used``.

    The latest used decision is flipped, asserted right after the earliest
    decision that follows every other used entry. When a used entry that is
    not a decision comes after it, no jump keeps the other clause literals
    false and the jump is chronological.
    """
    positions = record.decision_positions()
    decisions = [p for p in used if record.entries[p][1]]
    if not decisions or decisions[-1] != used[-1]:
        last = positions[-1]
        return last, record.entries[last][0] ^ 1
    last = decisions[-1]
    others = used[:-1]
    prefix = next(p for p in positions if not others or p > others[-1])
    return prefix, record.entries[last][0] ^ 1


def decision_clause(record: Record, program: Program, members: Iterable[str]) -> tuple[tuple[int, ...], int, int]:
    """:func:`conflict_backjump_clause` for records that may hold unjustified literals.

    The clause negates the decisions and the unjustified entries (see
    :func:`assumption_positions`); the jump is that of
    :func:`conflict_backjump_clause`.
    """
    positions = record.decision_positions()
    if not positions:
        raise ValueError("the record has no decision literal")
    used = assumption_positions(record, program, members)
    last = positions[-1]
    return tuple(record.entries[p][0] ^ 1 for p in used), last, record.entries[last][0] ^ 1


def conflict_decisions(record: Record, program: Program, members: Iterable[str]) -> list[int]:
    """Positions of the assumptions (decisions and unjustified entries) the
    conflict depends on, in record order."""
    members = frozenset(members)
    index = {lit: i for i, (lit, _) in enumerate(record.entries)}
    stack = _conflict_lits(record)
    done: set[int] = set()
    used: set[int] = set()
    while stack:
        lit = stack.pop()
        i = index[lit]
        if i in done:
            continue
        done.add(i)
        if record.entries[i][1]:
            used.add(i)
            continue
        before = frozenset(l for l, _ in record.entries[:i])
        cond = _derivation(program, members, before, lit)
        if cond is None:
            used.add(i)
            continue
        stack.extend(propagators.reason(cond, program, before, lit))
    return sorted(used)


def analyze_conflict(record: Record, program: Program, members: Iterable[str]) -> tuple[tuple[int, ...], int, int]:
    """Like :func:`decision_clause`, restricted to the assumptions the conflict depends on.

    The flipped literal is asserted at the level right after the
    second-latest relevant assumption. When no decision is relevant the
    clause negates the relevant unjustified entries (possibly none) and the
    jump is chronological.
    """
    if not record.decision_positions():
        raise ValueError("the record has no decision literal")
    used = conflict_decisions(record, program, members)
    clause = tuple(record.entries[p][0] ^ 1 for p in used)
    prefix, flipped = _jump_for(record, used)
    return clause, prefix, flipped


def jump(record: Record, prefix: int, flipped: int) -> Record:
    return Record(record.entries[:prefix] + ((flipped, False),))
