"""Random ground programs for fuzzing and sampling."""

from __future__ import annotations

import random
import string

from .program import AtomTable, Program, Rule

NAMES = list(string.ascii_lowercase)


def random_program(
    rng: random.Random,
    max_atoms: int = 8,
    max_rules: int = 12,
    max_head: int = 3,
    negation: bool = True,
    min_atoms: int = 1,
    constraint_prob: float = 0.1,
) -> Program:
    """A program over ``a, b, ...`` with at most ``max_atoms`` atoms and ``max_rules`` rules.

    Heads have up to ``max_head`` atoms (empty with ``constraint_prob``);
    bodies draw each atom positively, negatively or not at all.
    """
    n = rng.randint(min_atoms, max_atoms)
    table = AtomTable(NAMES[:n])
    atoms = list(range(n))
    rules = []
    for _ in range(rng.randint(1, max_rules)):
        if rng.random() < constraint_prob:
            head = []
        else:
            head = rng.sample(atoms, rng.randint(1, min(max_head, n)))
        body_size = rng.choice((0, 1, 1, 2, 2, 3))
        picked = rng.sample(atoms, min(body_size, n))
        pos_body, neg_body = [], []
        for a in picked:
            (neg_body if negation and rng.random() < 0.4 else pos_body).append(a)
        rules.append(Rule.make(head, pos_body, neg_body))
    return Program(rules, table)


def corpus(seed: int, count: int, **kwargs) -> list[Program]:
    rng = random.Random(seed)
    return [random_program(rng, **kwargs) for _ in range(count)]
