"""Generating and witness functions: worked examples and the approximating /
ensuring contracts checked against the brute-force oracle."""

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from dasp import oracle
from dasp.program import Record, interpretation, parse_program, render_program, restrict
from dasp.transforms import (
    GENERATORS,
    WITNESSES,
    cnfcomp,
    common_types,
    completion,
    gen_cmodels,
    gen_dlv,
    gen_gnt,
    test_cmodels as cmodels_witness,
    test_dlv as dlv_witness,
    test_gnt as gnt_witness,
)

from conftest import DL_EXAMPLE, lits, prog, seeded_program


def clause_strings(p):
    return [" | ".join(p.table.lit_str(l) for l in c) for c in p.clauses()]


def rule_set(p):
    return sorted(render_program(p).splitlines())


def test_cnfcomp_keeps_repetitions():
    p = cnfcomp(prog("a :- not a."))
    a = p.table.id("a")
    assert p.clauses() == ((2 * a + 1, 2 * a + 1), (2 * a, 2 * a))
    assert [len(c) for c in p.clauses()] == [2, 2]


def test_cnfcomp_rule_free_atom_is_unit_negative():
    p = prog(":- a.")
    assert clause_strings(cnfcomp(p)) == ["-a", "-a"]


def test_cnfcomp_distributes_conjunctive_support():
    p = prog("a :- b, c.")
    cl = clause_strings(cnfcomp(p))
    assert "-a | b" in cl and "-a | c" in cl


def test_completion_support_formulas():
    p = prog("a :- b. a :- not c.")
    comp = completion(p)
    a, b, c = (p.table.id(n) for n in "abc")
    assert sorted(comp.support[a]) == sorted(((2 * b + 1,), (2 * c,)))
    assert comp.support[b] == ()
    fact = completion(prog("a."))
    assert fact.support[0] == ((),)


@given(st.integers(0, 10**6))
def test_completion_models_are_supported_models(seed):
    p = seeded_program(seed, max_atoms=5, max_rules=6)
    assert oracle.classical_models(cnfcomp(p)) == oracle.supported_models(p)


@given(st.lists(st.lists(st.integers(0, 7), min_size=0, max_size=3), max_size=4), st.integers(0, 15))
def test_dnf_cnf_lemma(dnf, bits):
    """A DNF and its distributed CNF have the same models."""
    assignment = {a: bool(bits >> (a % 4) & 1) for a in range(8)}

    def holds(lit):
        return assignment[lit >> 1] == bool(lit & 1)

    dnf_value = any(all(holds(l) for l in conj) for conj in dnf)
    cnf = list(itertools.product(*dnf))
    cnf_value = all(any(holds(l) for l in clause) for clause in cnf)
    assert dnf_value == cnf_value


def test_gen_cmodels_single_rule():
    p = prog("a :- b.")
    assert clause_strings(gen_cmodels(p)) == ["b__b | -b", "-b__b | b", "-b__b | a", "-a | b__b", "-b"]
    assert gen_cmodels(prog("")).clauses() == ()


def test_gen_cmodels_keeps_same_body_disjunctions_apart():
    p = prog("a | b :- c. a | d :- c. c.")
    g = gen_cmodels(p)
    aux = [n for n in g.table.names() if n.startswith("h__a__")]
    assert len(aux) == 2
    assert {frozenset(m & frozenset(p.atoms())) for m in oracle.stable_models(p)} <= {
        frozenset(m & frozenset(p.atoms())) for m in oracle.classical_models(g)
    }


def test_cmodels_witness_examples():
    p = prog("a | b.")
    w = cmodels_witness(p, lits(p, "a -b"))
    assert oracle.classical_models(w) == set()
    q = prog("a :- a.")
    w = cmodels_witness(q, lits(q, "a"))
    assert oracle.classical_models(w) != set()
    r = prog("a :- b.")
    w = cmodels_witness(r, lits(r, "-a -b"))
    assert () in w.clauses()
    assert oracle.classical_models(w) == set()


def test_gen_gnt_example_program():
    p = prog(DL_EXAMPLE)
    assert rule_set(gen_gnt(p)) == sorted([
        "a :- c.", "b :- c.", "c :- a, b.",
        "a :- not a__r.", "b :- not b__r.",
        "a__r :- not a.", "b__r :- not b.",
        ":- not a, not b.",
        "a__s :- c.", "a__s :- not b.", "b__s :- c.", "b__s :- not a.",
        ":- a, not a__s.", ":- b, not b__s.",
    ])


def test_gen_gnt_normal_program_is_identity():
    p = prog("a :- not b. b :- a, not c.")
    assert rule_set(gen_gnt(p)) == rule_set(p)


def test_test_gnt_example_program():
    p = prog(DL_EXAMPLE)
    g = gen_gnt(p)
    L = Record.parse("-a__r* a a__s -b* b__r -c", g.table)
    w = gnt_witness(p, restrict(L.lits, p.atoms()))
    assert rule_set(w) == sorted(["a :- not a__r.", "a__r :- not a.", ":- not a, not b.", ":- a, not c, not b."])
    assert oracle.stable_models(w) == set()


def test_gnt_witness_of_least_model():
    p = prog("a. b :- a. c :- b, d.")
    least = oracle.least_model(p)
    m = interpretation(least, p.atoms())
    assert oracle.stable_models(gnt_witness(p, m)) == set()


def test_gen_dlv_is_identity():
    p = prog(DL_EXAMPLE)
    assert gen_dlv(p) is p


def test_dlv_witness_example_clauses():
    p = prog(DL_EXAMPLE)
    w = dlv_witness(p, lits(p, "a b c"))
    got = {frozenset(c.split(" | ")) for c in clause_strings(w)}
    want = {frozenset(c.split(" | ")) for c in ["c | -a", "c | -b", "a | b | -c", "-a | -b", "a | b | c"]}
    assert got == want
    w2 = dlv_witness(p, lits(p, "a -b -c"))
    assert oracle.classical_models(w2) == set()


def test_dlv_witness_disjunctive_fact():
    p = prog("a | b.")
    assert oracle.classical_models(dlv_witness(p, lits(p, "a -b"))) == set()
    assert oracle.classical_models(dlv_witness(p, lits(p, "a b"))) != set()


def test_dlv_witness_empty_candidate_has_falsum_block():
    p = prog("a :- b.")
    w = dlv_witness(p, lits(p, "-a -b"))
    assert () in w.clauses()


def test_witness_rejects_non_covering_candidate():
    p = prog("a | b.")
    with pytest.raises(ValueError):
        dlv_witness(p, lits(p, "a"))


@pytest.mark.parametrize("name", sorted(GENERATORS))
@given(seed=st.integers(0, 10**6))
def test_approximating_contract(name, seed):
    gen = GENERATORS[name]
    p = seeded_program(seed, max_atoms=4, max_rules=5)
    g = gen.apply(p)
    atoms = frozenset(p.atoms())
    gen_models = oracle.models(g, gen.approx_type)
    projected = {m & atoms for m in gen_models}
    assert oracle.stable_models(p) <= projected
    for w in gen.with_respect_to:
        assert projected <= oracle.models(p, w)


@pytest.mark.parametrize("name", sorted(WITNESSES))
@given(seed=st.integers(0, 10**6))
def test_ensuring_contract(name, seed):
    test = WITNESSES[name]
    p = seeded_program(seed, max_atoms=5, max_rules=6)
    universe = p.atoms()
    stable = oracle.stable_models(p)
    for w in test.with_respect_to:
        for m in oracle.models(p, w):
            witness = test.apply(p, interpretation(m, universe))
            refuted = bool(oracle.models(witness, test.ensure_type))
            assert (m in stable) == (not refuted)


@given(st.integers(0, 10**6))
def test_generate_then_test_enumerates_stable_models(seed):
    """Any approximating generator with any ensuring witness for a shared type
    filters the generator's models down to exactly the stable models."""
    p = seeded_program(seed, max_atoms=4, max_rules=5)
    atoms = frozenset(p.atoms())
    stable = oracle.stable_models(p)
    rng = random.Random(seed)
    gen = GENERATORS[rng.choice(sorted(GENERATORS))]
    tests = [t for t in WITNESSES.values() if common_types(gen, t)]
    test = rng.choice(tests)
    found = set()
    for m in oracle.models(gen.apply(p), gen.approx_type):
        cand = m & atoms
        if not oracle.models(test.apply(p, interpretation(cand, p.atoms())), test.ensure_type):
            found.add(cand)
    assert found == stable
