"""Positive dependency graph, its strongly connected components, and head-cycle freedom."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import networkx as nx

from .program import Program, is_positive, neg, pos, positive_atoms


@dataclass(frozen=True)
class ComponentAnalysis:
    components: tuple[frozenset[int], ...]
    hcf: frozenset[int]  # indexes into ``components``
    non_hcf: tuple[int, ...]  # indexes, ordered by smallest atom

    def non_hcf_components(self) -> list[frozenset[int]]:
        return [self.components[i] for i in self.non_hcf]

    def hcf_components(self) -> list[frozenset[int]]:
        return [c for i, c in enumerate(self.components) if i in self.hcf]


def dependency_graph(program: Program) -> nx.DiGraph:
    """Edge ``a -> b`` when a rule has ``a`` in its head and ``b`` in its positive body."""
    g = nx.DiGraph()
    g.add_nodes_from(program.atoms())
    for r in program.rules:
        for a in r.head:
            for b in r.pos:
                g.add_edge(a, b)
    return g


def component_analysis(program: Program) -> ComponentAnalysis:
    g = dependency_graph(program)
    comps = sorted((frozenset(c) for c in nx.strongly_connected_components(g)), key=min)
    hcf = set()
    non_hcf = []
    for i, c in enumerate(comps):
        if any(len(c.intersection(r.head)) > 1 for r in program.rules):
            non_hcf.append(i)
        else:
            hcf.add(i)
    return ComponentAnalysis(tuple(comps), frozenset(hcf), tuple(non_hcf))


def has_unfounded_subset_hcf(program: Program, lits: Iterable[int], component: Iterable[int]) -> frozenset[int]:
    """The greatest set of true atoms of a head-cycle-free component that is
    unfounded on the complete assignment ``lits`` (empty if there is none).

    Polynomial: since no rule has two head atoms inside the component, whether
    a rule is cancelled by a true head atom does not depend on the candidate
    set, and the usual founded-atoms fixpoint applies.
    """
    m = frozenset(lits)
    comp = set(component)
    cand = set(positive_atoms(m)) & comp
    founded = {a for a in program.atoms() if a not in cand}
    active = []
    for r in program.rules:
        if any(neg(b) in m for b in r.pos) or any(pos(b) in m for b in r.neg):
            continue
        active.append(r)
    changed = True
    while changed:
        changed = False
        for r in active:
            inner = [h for h in r.head if h in cand and h not in founded]
            if not inner or not founded.issuperset(r.pos):
                continue
            for a in inner:
                if not any(h != a and pos(h) in m for h in r.head):
                    founded.add(a)
                    changed = True
    return frozenset(cand - founded)


def restrict_clauses(program: Program, atoms: Iterable[int]) -> Program:
    """Restrict a clause-mode program to ``atoms`` by making every other atom false.

    Literals over outside atoms that are positive disappear; clauses with a
    negative literal over an outside atom are satisfied and dropped.
    """
    keep = set(atoms)
    out = []
    for c in program.clauses():
        if any(not is_positive(l) and (l >> 1) not in keep for l in c):
            continue
        out.append(tuple(l for l in c if (l >> 1) in keep))
    return Program.from_clauses(out, program.table)
