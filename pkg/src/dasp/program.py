"""Ground disjunctive programs, literals, records and solver states.

Literals are plain integers so that set operations stay cheap:

* atom ``a`` (a dense id handed out by :class:`AtomTable`) has the positive
  literal ``2*a + 1`` and the negative literal ``2*a``;
* sorting literals as integers therefore orders them by atom id, with the
  negative literal before the positive one;
* ``l ^ 1`` is the complement of ``l``;
* :data:`FALSUM` (``-1``) stands for the contradiction symbol that a record
  may contain.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

FALSUM = -1

_NAME_RE = re.compile(r"[a-z][A-Za-z0-9_]*")


def pos(a: int) -> int:
    return 2 * a + 1


def neg(a: int) -> int:
    return 2 * a


def atom_of(lit: int) -> int:
    return lit >> 1


def is_positive(lit: int) -> bool:
    return lit & 1 == 1


def complement(lit: int) -> int:
    if lit == FALSUM:
        raise ValueError("the contradiction symbol has no complement")
    return lit ^ 1


class AtomTable:
    """Append-only bidirectional map between atom names and dense ids."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        """Return the id of ``name``, allocating a fresh one if needed."""
        found = self._ids.get(name)
        if found is not None:
            return found
        self._ids[name] = len(self._names)
        self._names.append(name)
        return self._ids[name]

    def id(self, name: str) -> int:
        return self._ids[name]

    def get(self, name: str) -> int | None:
        return self._ids.get(name)

    def name(self, a: int) -> str:
        return self._names[a]

    def __len__(self) -> int:
        return len(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def names(self) -> list[str]:
        return list(self._names)

    def lit(self, text: str) -> int:
        """Parse ``"a"``, ``"-a"`` or ``"¬a"`` into a literal of a known atom."""
        text = text.strip()
        if text in ("⊥", "#false"):
            return FALSUM
        if text[:1] in ("-", "¬", "~"):
            return neg(self._ids[text[1:]])
        return pos(self._ids[text])

    def lit_str(self, lit: int) -> str:
        if lit == FALSUM:
            return "⊥"
        name = self._names[atom_of(lit)]
        return name if is_positive(lit) else "-" + name


@dataclass(frozen=True)
class Rule:
    """``head_1 | ... | head_k :- pos_1, ..., not neg_1, ...``.

    For rules read from text the three tuples are sorted and duplicate free.
    Rules that come from clauses (see :meth:`Rule.from_clause`) may repeat an
    atom, and remember the clause they were built from in ``clause``.
    """

    head: tuple[int, ...]
    pos: tuple[int, ...] = ()
    neg: tuple[int, ...] = ()
    clause: tuple[int, ...] | None = field(default=None, compare=False, hash=False)

    @staticmethod
    def make(head: Iterable[int], pos_body: Iterable[int] = (), neg_body: Iterable[int] = ()) -> "Rule":
        return Rule(tuple(sorted(set(head))), tuple(sorted(set(pos_body))), tuple(sorted(set(neg_body))))

    @staticmethod
    def from_clause(lits: Sequence[int]) -> "Rule":
        """The constraint ``:- not C`` whose clause reading is ``C``.

        Repeated literals are kept, so the clause reading is the same multiset.
        """
        pos_body = tuple(atom_of(l) for l in lits if not is_positive(l))
        neg_body = tuple(atom_of(l) for l in lits if is_positive(l))
        return Rule((), pos_body, neg_body, clause=tuple(lits))

    def clause_lits(self) -> tuple[int, ...]:
        """The rule read as a clause: head atoms or complements of the body."""
        if self.clause is not None:
            return self.clause
        return (
            tuple(pos(a) for a in self.head)
            + tuple(neg(a) for a in self.pos)
            + tuple(pos(a) for a in self.neg)
        )

    def body_lits(self) -> tuple[int, ...]:
        return tuple(pos(a) for a in self.pos) + tuple(neg(a) for a in self.neg)

    def atoms(self) -> set[int]:
        return set(self.head) | set(self.pos) | set(self.neg)

    def is_disjunctive(self) -> bool:
        return len(self.head) > 1

    def key(self) -> tuple:
        return (self.head, self.pos, self.neg)


class Program:
    """A finite set of rules over a shared :class:`AtomTable`.

    Rule order is kept (it decides clause order in transforms) but duplicate
    rules are dropped. Derived indexes are computed lazily and cached; a
    program is never mutated after construction.
    """

    def __init__(self, rules: Iterable[Rule], table: AtomTable, clause_mode: bool = False):
        seen: set[Rule] = set()
        kept: list[Rule] = []
        for r in rules:
            if clause_mode or r not in seen:
                seen.add(r)
                kept.append(r)
        self.rules: tuple[Rule, ...] = tuple(kept)
        self.table = table
        self.clause_mode = clause_mode
        self._atoms: tuple[int, ...] | None = None
        self._by_head: dict[int, tuple[int, ...]] | None = None
        self._clauses: tuple[tuple[int, ...], ...] | None = None

    @staticmethod
    def from_clauses(clauses: Iterable[Sequence[int]], table: AtomTable) -> "Program":
        return Program((Rule.from_clause(c) for c in clauses), table, clause_mode=True)

    def atoms(self) -> tuple[int, ...]:
        if self._atoms is None:
            found: set[int] = set()
            for r in self.rules:
                found |= r.atoms()
            self._atoms = tuple(sorted(found))
        return self._atoms

    def rules_with_head(self, a: int) -> tuple[int, ...]:
        """Indexes of the rules whose head contains ``a``."""
        if self._by_head is None:
            idx: dict[int, list[int]] = {}
            for i, r in enumerate(self.rules):
                for h in r.head:
                    idx.setdefault(h, []).append(i)
            self._by_head = {a: tuple(v) for a, v in idx.items()}
        return self._by_head.get(a, ())

    def clauses(self) -> tuple[tuple[int, ...], ...]:
        if self._clauses is None:
            self._clauses = tuple(r.clause_lits() for r in self.rules)
        return self._clauses

    def is_disjunctive(self) -> bool:
        return any(r.is_disjunctive() for r in self.rules)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules)

    def canonical(self) -> tuple:
        """Name-based canonical form, independent of atom ids and rule order."""
        name = self.table.name

        def rule_form(r: Rule):
            if self.clause_mode:
                return tuple(sorted((is_positive(l), name(atom_of(l))) for l in r.clause_lits()))
            return (tuple(sorted(map(name, r.head))), tuple(sorted(map(name, r.pos))), tuple(sorted(map(name, r.neg))))

        return tuple(sorted(rule_form(r) for r in self.rules))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Program):
            return NotImplemented
        return self.clause_mode == other.clause_mode and self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return f"Program({render_program(self)!r})"


def sorted_rules(program: Program) -> list[Rule]:
    """Rules in canonical order: lexicographic on (head, positive body, negative body)."""
    return sorted(program.rules, key=Rule.key)


# ---------------------------------------------------------------------------
# Parsing and rendering


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>%[^\n]*)|(?P<if>:-)|(?P<dot>\.)|(?P<bar>\|)|(?P<comma>,)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
)


def _tokens(text: str) -> list[tuple[str, str, int, int]]:
    out = []
    i, line, col = 0, 1, 1
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            out.append((kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        i = m.end()
    out.append(("eof", "", line, col))
    return out


def parse_program(text: str, table: AtomTable | None = None, allow_reserved: bool = False) -> Program:
    """Parse ground rules such as ``a | b :- c, not d.``.

    Atoms are interned in order of first occurrence. A missing head makes a
    constraint, a missing body a fact; ``a :- .`` and ``a.`` are the same rule.
    Names containing ``__`` are reserved for generated atoms and rejected
    unless ``allow_reserved`` is set.
    """
    table = AtomTable() if table is None else table
    toks = _tokens(text)
    pos_ = 0
    rules: list[Rule] = []

    def peek():
        return toks[pos_]

    def take(kind: str):
        nonlocal pos_
        tok = toks[pos_]
        if tok[0] != kind:
            what = tok[1] or "end of input"
            raise ParseError(f"expected {kind}, found {what!r}", tok[2], tok[3])
        pos_ += 1
        return tok

    def atom_name():
        tok = take("name")
        name = tok[1]
        if not _NAME_RE.fullmatch(name):
            raise ParseError(f"invalid atom name {name!r}", tok[2], tok[3])
        if "__" in name and not allow_reserved:
            raise ParseError(f"atom name {name!r} uses the reserved '__' infix", tok[2], tok[3])
        return table.intern(name)

    while peek()[0] != "eof":
        head: list[int] = []
        pbody: list[int] = []
        nbody: list[int] = []
        if peek()[0] == "name":
            head.append(atom_name())
            while peek()[0] == "bar":
                take("bar")
                head.append(atom_name())
        if peek()[0] == "if":
            take("if")
            if peek()[0] == "name":
                while True:
                    tok = peek()
                    if tok[1] == "not" and toks[pos_ + 1][0] == "name":
                        take("name")
                        nbody.append(atom_name())
                    else:
                        pbody.append(atom_name())
                    if peek()[0] != "comma":
                        break
                    take("comma")
        take("dot")
        rules.append(Rule.make(head, pbody, nbody))
    return Program(rules, table)


def render_rule(rule: Rule, table: AtomTable) -> str:
    name = table.name
    head = " | ".join(name(a) for a in rule.head)
    body = [name(a) for a in rule.pos] + ["not " + name(a) for a in rule.neg]
    if not body:
        return f"{head}." if head else ":- ."
    return f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}."


def render_clause(lits: Sequence[int], table: AtomTable) -> str:
    if not lits:
        return "⊥"
    return " ∨ ".join(table.lit_str(l) for l in lits)


def render_program(program: Program) -> str:
    if program.clause_mode:
        return "\n".join(render_clause(c, program.table) for c in program.clauses())
    return "\n".join(render_rule(r, program.table) for r in program.rules)


# ---------------------------------------------------------------------------
# Literal-set helpers


def restrict(lits: Iterable[int], atoms: Iterable[int]) -> frozenset[int]:
    """The literals of ``lits`` whose atom is in ``atoms``."""
    keep = set(atoms)
    return frozenset(l for l in lits if l != FALSUM and atom_of(l) in keep)


def covers(lits: Iterable[int], program: Program) -> bool:
    """True when every atom of ``program`` is assigned by ``lits``."""
    assigned = {atom_of(l) for l in lits if l != FALSUM}
    return set(program.atoms()) <= assigned


def consistent(lits: Iterable[int]) -> bool:
    s = set(lits)
    if FALSUM in s:
        return False
    return not any((l ^ 1) in s for l in s)


def positive_atoms(lits: Iterable[int]) -> frozenset[int]:
    return frozenset(atom_of(l) for l in lits if l != FALSUM and is_positive(l))


def interpretation(true_atoms: Iterable[int], universe: Iterable[int]) -> frozenset[int]:
    """The complete literal set over ``universe`` making exactly ``true_atoms`` true."""
    t = set(true_atoms)
    return frozenset(pos(a) if a in t else neg(a) for a in universe)


# ---------------------------------------------------------------------------
# Records and states


class Record:
    """An ordered, repetition-free string of literals with decision marks.

    Immutable; extension returns a new record. The contradiction symbol may
    occur as an entry (it can only be appended once).
    """

    __slots__ = ("entries", "_set", "_hash")

    def __init__(self, entries: Iterable[tuple[int, bool]] = ()):
        self.entries: tuple[tuple[int, bool], ...] = tuple(entries)
        self._set: frozenset[int] | None = None
        self._hash: int | None = None

    @staticmethod
    def of(*items: int | tuple[int, bool]) -> "Record":
        return Record((i, False) if isinstance(i, int) else i for i in items)

    @property
    def lits(self) -> frozenset[int]:
        if self._set is None:
            self._set = frozenset(l for l, _ in self.entries)
        return self._set

    @property
    def has_falsum(self) -> bool:
        return FALSUM in self.lits

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, lit: int) -> bool:
        return lit in self.lits

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Record) and self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.entries)
        return self._hash

    def __repr__(self) -> str:
        return f"Record({self.entries!r})"

    def push(self, lit: int, decision: bool = False) -> "Record":
        if lit in self.lits:
            raise ValueError(f"literal {lit} already occurs in the record")
        return Record(self.entries + ((lit, decision),))

    def is_consistent(self) -> bool:
        s = self.lits
        if FALSUM in s:
            return False
        return not any((l ^ 1) in s for l in s if l & 1)

    def decision_positions(self) -> list[int]:
        return [i for i, (_, d) in enumerate(self.entries) if d]

    def has_decision(self) -> bool:
        return any(d for _, d in self.entries)

    def last_decision(self) -> int | None:
        for i in range(len(self.entries) - 1, -1, -1):
            if self.entries[i][1]:
                return i
        return None

    def prefix(self, n: int) -> "Record":
        return Record(self.entries[:n])

    def backtrack(self) -> "Record":
        """``L l^Δ L'`` becomes ``L ¬l`` for the rightmost decision ``l``."""
        i = self.last_decision()
        if i is None:
            raise ValueError("no decision literal to backtrack on")
        lit = self.entries[i][0]
        return Record(self.entries[:i] + ((lit ^ 1, False),))

    def depth(self) -> tuple[int, ...]:
        """Lengths of the segments delimited by decision literals."""
        out = [0]
        for _, d in self.entries:
            if d:
                out.append(0)
            else:
                out[-1] += 1
        return tuple(out)

    def render(self, table: AtomTable) -> str:
        return " ".join(table.lit_str(l) + ("*" if d else "") for l, d in self.entries)

    @staticmethod
    def parse(text: str, table: AtomTable) -> "Record":
        """Inverse of :meth:`render`: ``"a* c -b"``."""
        entries = []
        for tok in text.split():
            d = tok.endswith("*")
            entries.append((table.lit(tok.rstrip("*")), d))
        return Record(entries)


@dataclass(frozen=True)
class TwoLayer:
    left: Record
    right: Record
    side: str  # "L" or "R"
    index: int = 0  # component index, only used by separate-component checking
    left_learnt: tuple[tuple[int, ...], ...] = ()
    right_learnt: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class Ok:
    record: Record


@dataclass(frozen=True)
class Fail:
    pass


FAILSTATE = Fail()

State = TwoLayer | Ok | Fail | Record


def initial_state() -> TwoLayer:
    return TwoLayer(Record(), Record(), "L")
