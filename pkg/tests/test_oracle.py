"""Brute-force semantics: reduct, classical/supported/stable models, unfounded sets."""

import itertools
import random

from hypothesis import given, strategies as st

from dasp import oracle
from dasp.program import interpretation, positive_atoms, restrict

from conftest import PI1, lits, model_names, names, prog, seeded_program


def test_reduct_drops_blocked_rules_and_negative_bodies():
    p = prog("a :- not b. b :- not a.")
    red = oracle.reduct(p, {p.table.id("a")})
    assert [(names(p, r.head), names(p, r.pos), names(p, r.neg)) for r in red.rules] == [({"a"}, set(), set())]


def test_reduct_of_negation_free_program_is_identity():
    p = prog("a :- b. b | c. :- a, c.")
    assert oracle.reduct(p, {0, 1}).canonical() == p.canonical()


def test_reduct_deletes_self_blocking_rule():
    p = prog("a :- not a.")
    assert oracle.reduct(p, {p.table.id("a")}).rules == ()


def test_classical_models_pi1():
    p = prog(PI1)
    assert model_names(p, oracle.classical_models(p)) == {
        frozenset("b"), frozenset("bc"), frozenset("ac"), frozenset("abc")
    }


def test_classical_models_trivial_cases():
    assert oracle.classical_models(prog("")) == {frozenset()}
    assert oracle.classical_models(prog(":-.")) == set()


def test_supporting_rule_examples():
    p = prog("a :- a.")
    a = p.table.id("a")
    assert oracle.is_supporting_rule(p.rules[0], a, lits(p, "a"))
    q = prog("a | b.")
    assert not oracle.is_supporting_rule(q.rules[0], q.table.id("a"), lits(q, "b"))
    r = prog("a :- not c.")
    assert not oracle.is_supporting_rule(r.rules[0], r.table.id("a"), lits(r, "c"))


def test_supported_models():
    p = prog("a :- a.")
    assert model_names(p, oracle.supported_models(p)) == {frozenset(), frozenset("a")}
    q = prog("a.")
    assert model_names(q, oracle.supported_models(q)) == {frozenset("a")}
    r = prog(":- not a.")
    assert oracle.supported_models(r) == set()


def test_unfounded_examples():
    p = prog("a :- a.")
    assert oracle.is_unfounded({p.table.id("a")}, frozenset(), p)
    q = prog("c :- a, b.")
    assert oracle.is_unfounded({q.table.id("c")}, lits(q, "-b"), q)
    assert oracle.is_unfounded(set(), lits(q, "a"), q)


def test_answer_set_examples():
    p = prog("a | b.")
    a, b = p.table.id("a"), p.table.id("b")
    assert oracle.is_answer_set(p, {a})
    assert not oracle.is_answer_set(p, {a, b})
    q = prog("a :- a.")
    assert not oracle.is_answer_set(q, {0})
    assert oracle.is_answer_set(q, set())
    d = prog("a :- c. b :- c. c :- a, b. a | b.")
    ids = {n: d.table.id(n) for n in "abc"}
    assert oracle.is_answer_set(d, {ids["a"]})
    assert oracle.is_answer_set(d, {ids["b"]})
    assert not oracle.is_answer_set(d, set(ids.values()))


def test_stable_models_examples():
    p = prog("a | b.")
    assert model_names(p, oracle.stable_models(p)) == {frozenset("a"), frozenset("b")}
    assert oracle.stable_models(prog("a :- not a.")) == set()
    pi1 = prog(PI1)
    assert oracle.stable_models(pi1, method="reduct") == oracle.stable_models(pi1, method="unfounded")


def test_cap_exceeded_raises():
    p = prog(" ".join(f"x{i} | y{i}." for i in range(11)))
    try:
        oracle.classical_models(p, cap=20)
    except oracle.CapExceeded:
        return
    raise AssertionError("22 atoms should exceed a cap of 20")


@given(st.integers(0, 10**6))
def test_model_chain(seed):
    p = seeded_program(seed, max_atoms=6, max_rules=8)
    sta = oracle.stable_models(p)
    sup = oracle.supported_models(p)
    cla = oracle.classical_models(p)
    assert sta <= sup <= cla


@given(st.integers(0, 10**6))
def test_two_stable_enumerations_agree(seed):
    p = seeded_program(seed, max_atoms=6, max_rules=8)
    assert oracle.stable_models(p, method="reduct") == oracle.stable_models(p, method="unfounded")


@given(st.integers(0, 10**6))
def test_unfounded_set_excludes_stable_models(seed):
    """An unfounded set on L cannot intersect a stable model extending L."""
    p = seeded_program(seed, max_atoms=5, max_rules=7)
    universe = p.atoms()
    stable = [interpretation(m, universe) for m in oracle.stable_models(p)]
    rng = random.Random(seed)
    for m in stable:
        L = frozenset(l for l in m if rng.random() < 0.5)
        for k in range(1, len(universe) + 1):
            for u in itertools.combinations(universe, k):
                if oracle.is_unfounded(u, L, p):
                    assert not set(u) & positive_atoms(m)


@given(st.integers(0, 10**6))
def test_non_support_is_monotone(seed):
    p = seeded_program(seed, max_atoms=5, max_rules=6)
    rng = random.Random(seed)
    universe = p.atoms()
    for r in p.rules:
        for a in r.head:
            full = interpretation({x for x in universe if rng.random() < 0.5}, universe)
            small = frozenset(l for l in full if rng.random() < 0.5)
            if not oracle.is_supporting_rule(r, a, small):
                assert not oracle.is_supporting_rule(r, a, full)


def test_restrict_examples():
    p = prog("a. b. c.")
    assert restrict(lits(p, "a -b c"), {0, 1}) == lits(p, "a -b")
    assert restrict(frozenset(), {0}) == frozenset()
    assert restrict(lits(p, "-a"), set()) == frozenset()
