"""Brute-force reference semantics.

Everything here enumerates assignments explicitly and is meant as ground
truth for small programs, not as a solver. Interpretations are returned as
frozensets of true atoms; the universe is always ``program.atoms()``.
"""

from __future__ import annotations

from typing import Iterable, Iterator

from .program import FALSUM, Program, Rule, atom_of, is_positive

DEFAULT_CAP = 20


class CapExceeded(ValueError):
    pass


class _Masks:
    """Rules of a program as bitmasks over the positions of ``program.atoms()``."""

    def __init__(self, program: Program, cap: int):
        atoms = program.atoms()
        if len(atoms) > cap:
            raise CapExceeded(f"{len(atoms)} atoms exceed the brute-force cap of {cap}")
        self.atoms = atoms
        self.bit = {a: 1 << i for i, a in enumerate(atoms)}
        self.rules = [
            (self.mask(r.head), self.mask(r.pos), self.mask(r.neg)) for r in program.rules
        ]
        self.full = (1 << len(atoms)) - 1

    def mask(self, atoms: Iterable[int]) -> int:
        m = 0
        for a in atoms:
            m |= self.bit[a]
        return m

    def atoms_of(self, m: int) -> frozenset[int]:
        return frozenset(a for a in self.atoms if m & self.bit[a])

    def satisfies(self, t: int, rules=None) -> bool:
        for h, p, n in self.rules if rules is None else rules:
            if not (t & h or p & ~t or t & n):
                return False
        return True

    def reduct(self, x: int) -> list[tuple[int, int, int]]:
        return [(h, p, 0) for h, p, n in self.rules if not n & x]

    def minimal(self, x: int, red) -> bool:
        """No proper subset of ``x`` satisfies the rules ``red``."""
        sub = (x - 1) & x
        while True:
            if sub != x and self.satisfies(sub, red):
                return False
            if sub == 0:
                return True
            sub = (sub - 1) & x


def reduct(program: Program, x: Iterable[int]) -> Program:
    """Drop rules whose negative body meets ``x``; strip negative bodies of the rest."""
    xs = set(x)
    kept = [Rule(r.head, r.pos, ()) for r in program.rules if not xs.intersection(r.neg)]
    return Program(kept, program.table, program.clause_mode)


def least_model(program: Program) -> frozenset[int]:
    """Least model of a negation-free program with at most one head atom per rule.

    Constraints are ignored; callers check them separately.
    """
    true: set[int] = set()
    changed = True
    while changed:
        changed = False
        for r in program.rules:
            if r.head and r.head[0] not in true and true.issuperset(r.pos):
                true.add(r.head[0])
                changed = True
    return frozenset(true)


def satisfies(true_atoms: Iterable[int], rule: Rule) -> bool:
    t = set(true_atoms)
    return bool(t.intersection(rule.head)) or not t.issuperset(rule.pos) or bool(t.intersection(rule.neg))


def _models(m: _Masks) -> Iterator[int]:
    for t in range(m.full + 1):
        if m.satisfies(t):
            yield t


def classical_models(program: Program, cap: int = DEFAULT_CAP) -> set[frozenset[int]]:
    m = _Masks(program, cap)
    return {m.atoms_of(t) for t in _models(m)}


def _lits_hit(lits: frozenset[int], atoms: Iterable[int], positive: bool) -> bool:
    off = 1 if positive else 0
    return any(2 * a + off in lits for a in atoms)


def is_supporting_rule(rule: Rule, a: int, lits: Iterable[int]) -> bool:
    """True iff ``lits`` avoids both the complements of the body and the rest of the head."""
    if a not in rule.head:
        raise ValueError("atom does not occur in the head of the rule")
    s = frozenset(lits)
    # complements of the body: -p for positive body atoms, p for negated ones
    if _lits_hit(s, rule.pos, False) or _lits_hit(s, rule.neg, True):
        return False
    return not _lits_hit(s, (h for h in rule.head if h != a), True)


def _supported(m: _Masks, t: int) -> bool:
    rest = t
    while rest:
        low = rest & -rest
        rest ^= low
        if not any(
            h & low and not (p & ~t) and not (n & t) and not (h & ~low & t) for h, p, n in m.rules
        ):
            return False
    return True


def supported_models(program: Program, cap: int = DEFAULT_CAP) -> set[frozenset[int]]:
    m = _Masks(program, cap)
    return {m.atoms_of(t) for t in _models(m) if _supported(m, t)}


def is_unfounded(x: Iterable[int], lits: Iterable[int], program: Program) -> bool:
    """The three-condition unfounded-set test for ``x`` on the consistent set ``lits``."""
    s = frozenset(lits)
    if FALSUM in s or any((l ^ 1) in s for l in s):
        raise ValueError("unfounded sets are only defined on consistent literal sets")
    xs = set(x)
    for a in xs:
        for i in program.rules_with_head(a):
            r = program.rules[i]
            if _lits_hit(s, r.pos, False) or _lits_hit(s, r.neg, True):
                continue
            if xs.intersection(r.pos):
                continue
            if _lits_hit(s, (h for h in r.head if h not in xs), True):
                continue
            return False
    return True


def is_answer_set(program: Program, x: Iterable[int], cap: int = DEFAULT_CAP) -> bool:
    """``x`` is a minimal set of atoms satisfying the reduct of the program by ``x``."""
    xs = frozenset(x)
    if not xs <= set(program.atoms()):
        return False
    m = _Masks(program, cap)
    t = m.mask(xs)
    red = m.reduct(t)
    return m.satisfies(t, red) and m.minimal(t, red)


def _stable_by_reduct(m: _Masks) -> Iterator[int]:
    for t in _models(m):
        red = m.reduct(t)
        if m.minimal(t, red):
            yield t


def _unfounded_mask(m: _Masks, x: int, t: int) -> bool:
    # t is a complete assignment; x is a candidate subset of its true atoms
    for h, p, n in m.rules:
        if not h & x:
            continue
        if p & ~t or n & t:  # body contradicted
            continue
        if x & p:
            continue
        if h & ~x & t:
            continue
        return False
    return True


def _stable_by_unfounded(m: _Masks) -> Iterator[int]:
    for t in _models(m):
        sub = t
        ok = True
        while sub:
            if _unfounded_mask(m, sub, t):
                ok = False
                break
            sub = (sub - 1) & t
        if ok:
            yield t


def stable_models(program: Program, cap: int = DEFAULT_CAP, method: str = "reduct") -> set[frozenset[int]]:
    """Stable models by minimality of the reduct, or (``method="unfounded"``)
    as classical models without a non-empty unfounded subset of their true atoms."""
    m = _Masks(program, cap)
    if method == "reduct":
        found = _stable_by_reduct(m)
    elif method == "unfounded":
        found = _stable_by_unfounded(m)
    else:
        raise ValueError(f"unknown method {method!r}")
    return {m.atoms_of(t) for t in found}


def models(program: Program, kind: str, cap: int = DEFAULT_CAP) -> set[frozenset[int]]:
    """Dispatch on a model type tag: ``cla``, ``sup`` or ``sta``."""
    if kind == "cla":
        return classical_models(program, cap)
    if kind == "sup":
        return supported_models(program, cap)
    if kind == "sta":
        return stable_models(program, cap)
    raise ValueError(f"unknown model type {kind!r}")


def is_model(program: Program, kind: str, lits: Iterable[int]) -> bool:
    """Whether the (complete) literal set, restricted to the program's atoms, is a ``kind``-model.

    Works without enumeration, so it is usable on programs above the cap.
    """
    s = frozenset(lits)
    t = frozenset(atom_of(l) for l in s if l != FALSUM and is_positive(l)) & set(program.atoms())
    if not all(satisfies(t, r) for r in program.rules):
        return False
    if kind == "cla":
        return True
    full = frozenset(2 * a + (1 if a in t else 0) for a in program.atoms())
    if kind == "sup":
        return all(
            any(is_supporting_rule(program.rules[i], a, full) for i in program.rules_with_head(a)) for a in t
        )
    if kind == "sta":
        if not program.is_disjunctive():
            return least_model(reduct(program, t)) == t
        return is_answer_set(program, t, cap=max(DEFAULT_CAP, len(program.atoms())))
    raise ValueError(f"unknown model type {kind!r}")
