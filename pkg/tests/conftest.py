import random

import pytest
from hypothesis import settings

from dasp.generate import random_program
from dasp.program import parse_program

settings.register_profile("dasp", max_examples=60, deadline=None)
settings.load_profile("dasp")

PI1 = ":- not a, not b.  :- a, not c."
DL_EXAMPLE = "a :- c.  b :- c.  c :- a, b.  a | b."


def prog(text):
    return parse_program(text)


def names(program, atoms):
    return {program.table.name(a) for a in atoms}


def model_names(program, models):
    return {frozenset(names(program, m)) for m in models}


def lits(program, text):
    """Literal set from ``"a -b c"``."""
    return frozenset(program.table.lit(t) for t in text.split())


def seeded_program(seed, **kw):
    return random_program(random.Random(seed), **kw)


@pytest.fixture
def pi1():
    return prog(PI1)


@pytest.fixture
def dl_example():
    return prog(DL_EXAMPLE)
