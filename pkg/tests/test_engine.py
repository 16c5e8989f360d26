import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from dasp import engine, oracle, propagators
from dasp.engine import (
    CONFIGS,
    SingleLayerGraph,
    Strategy,
    TwoLayerGraph,
    compare_graphs,
    config,
    explore_graph,
    make_config,
    replay,
    run,
    run_single,
)
from dasp.program import FAILSTATE, Ok, Record, TwoLayer

from conftest import DL_EXAMPLE, PI1, model_names, prog, seeded_program

DP_PATH = ["Decide", "Unit", "Decide", "Success"]


def test_dp_graph_initial_state_offers_only_decisions(pi1):
    moves = SingleLayerGraph(pi1, unit_name="Unit").moves(Record())
    assert {m.rule for m in moves} == {"Decide"}
    assert len(moves) == 6


def test_dp_graph_backtrack_has_priority(pi1):
    g = SingleLayerGraph(pi1, unit_name="Unit")
    state = Record.parse("a* -c* c", pi1.table)
    moves = g.moves(state)
    back = [m for m in moves if m.rule == "Backtrack"]
    assert len(back) == 1 and back[0].target.render(pi1.table) == "a* c"
    assert g.moves(state, False)[0].rule == "Backtrack"


def test_terminal_states_have_no_moves(pi1):
    g = SingleLayerGraph(pi1)
    assert g.moves(Ok(Record())) == []
    two = TwoLayerGraph(pi1, CONFIGS["cmodels"])
    assert two.transitions(FAILSTATE) == []


def test_dp_left_path(pi1):
    res = run_single(pi1, unit_name="Unit", trace=True)
    steps = [e for e in res.trace if "step" in e]
    assert [e["rule"] for e in steps] == DP_PATH
    assert steps[-1]["left"] == "a* c b*"
    assert model_names(pi1, [res.model]) == {frozenset("abc")}


def test_dlv_backtrack_rl(dl_example):
    g = TwoLayerGraph(dl_example, CONFIGS["dlv"])
    t = dl_example.table
    state = TwoLayer(Record.parse("c* a b", t), Record.parse("a* -b c", t), "R")
    moves = g.transitions(state)
    assert [m.rule for m in moves] == ["Backtrack_RL"]
    target = moves[0].target
    assert target.side == "L" and target.left.render(t) == "-c" and len(target.right) == 0


def test_gnt_crossing_offers_right_decisions(dl_example):
    g = TwoLayerGraph(dl_example, CONFIGS["gnt"])
    t = g.gen.table
    L = Record.parse("-a__r* a a__s -b* b__r -c", t)
    moves = g.transitions(TwoLayer(L, Record(), "R"))
    assert any(m.rule == "Decide_R" for m in moves)


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_configs_solve_example(name, dl_example):
    res = run(dl_example, config(name), check_invariants=True)
    assert res.verdict == "SAT"
    assert model_names(dl_example, [res.model]) <= {frozenset("a"), frozenset("b")}


def test_config_validation():
    with pytest.raises(ValueError):
        make_config("bad", "dlvGen", "up", "dlvTest", "up").validate()
    make_config("bad", "dlvGen", "up", "dlvTest", "up").validate(unsafe=True)
    with pytest.raises(ValueError):
        config("cmodels", early_test=True)
    with pytest.raises(ValueError):
        config("gnt", separate=True)
    with pytest.raises(ValueError):
        config("dlv", separate=True, learning=True)
    with pytest.raises(KeyError):
        config("nope")


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_strategy_independence(seed):
    p = seeded_program(seed, max_atoms=4, max_rules=6)
    stable = oracle.stable_models(p)
    name = random.Random(seed).choice(sorted(CONFIGS))
    cfg = CONFIGS[name]
    verdicts = set()
    for k in range(21):
        strat = Strategy() if k == 0 else Strategy("random", "random", seed=seed + k)
        res = run(p, cfg, strat, check_invariants=True)
        verdicts.add(res.verdict)
        if res.model is not None:
            assert res.model in stable
    assert verdicts == ({"SAT"} if stable else {"UNSAT"})


def test_step_failsafe(dl_example):
    with pytest.raises(engine.StepLimitExceeded):
        run(dl_example, CONFIGS["gnt"], max_steps=3)


def test_scripted_step_must_be_applicable(dl_example):
    with pytest.raises(engine.EngineError):
        run(dl_example, CONFIGS["dlv"], Strategy("scripted", script=[("Cross_LR", None)]))


def test_trace_replay_round_trip(tmp_path, dl_example):
    for name in ("cmodels", "gnt", "dlv"):
        res = run(dl_example, CONFIGS[name], Strategy("random", seed=5), trace=True)
        path = tmp_path / f"{name}.jsonl"
        engine.write_trace(str(path), res)
        lines = engine.read_trace(str(path))
        assert lines[-1] == engine.terminal_entry(res, dl_example.table)
        out = replay(dl_example, CONFIGS[name], lines)
        assert out.ok, out.message
        assert out.result.terminal == res.terminal


def test_replay_detects_tampering(tmp_path, dl_example):
    res = run(dl_example, CONFIGS["dlv"], trace=True)
    lines = [dict(e) for e in res.trace]
    for e in lines:
        if e.get("rule") == "Decide_L":
            e["literal"] = "-" + e["literal"] if not e["literal"].startswith("-") else e["literal"][1:]
            break
    assert not replay(dl_example, CONFIGS["dlv"], lines).ok


def test_trace_schema(dl_example):
    res = run(dl_example, CONFIGS["dlv"], trace=True)
    for e in res.trace[:-1]:
        assert set(e) >= {"step", "rule", "pcondition", "literal", "left", "right", "side"}
        json.dumps(e)
    assert res.trace[-1] == {"terminal": "ok", "model": sorted(dl_example.table.name(a) for a in res.model)}


def test_explore_dp_graph_pi1(pi1):
    rep = explore_graph(pi1, None, members=propagators.PSETS["up"])
    assert rep.holds, rep.violations
    assert rep.ok_models == oracle.classical_models(pi1)


def test_explore_cmodels_disjunctive_fact():
    p = prog("a | b.")
    rep = explore_graph(p, CONFIGS["cmodels"])
    assert rep.holds
    assert model_names(p, rep.ok_models) == {frozenset("a"), frozenset("b")}


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_explore_self_blocking_rule(name):
    rep = explore_graph(prog("a :- not a."), CONFIGS[name])
    assert rep.holds
    assert rep.fail_reachable and not rep.ok_models


@pytest.mark.parametrize("text", ["a | b.", "a :- not a.", "a :- b. b :- a. a | b.", ":- not a. a | b."])
@pytest.mark.parametrize("name", ["cnfcomp", "dlv", "dlvgen-cmodelstest"])
def test_summary_exploration_matches_exact(text, name):
    p = prog(text)
    fast = explore_graph(p, CONFIGS[name])
    exact = explore_graph(p, CONFIGS[name], quotient=False)
    assert (fast.verdict, fast.ok_models, fast.fail_reachable) == (exact.verdict, exact.ok_models, exact.fail_reachable)


def test_explore_detects_a_wrong_graph():
    """gntTest needs the sm conditions on the right; with only UnitPropagate the
    right layer cannot refute the witness and non-stable models get through."""
    p = prog("a :- a.")
    cfg = make_config("unsafe", "cnfcomp", "up", "gntTest", "up")
    rep = explore_graph(p, cfg)
    assert rep.verdict == "violated"


def test_explore_reports_cap(dl_example):
    rep = explore_graph(dl_example, CONFIGS["gnt"], max_states=5)
    assert rep.verdict == "inconclusive"


def test_compare_identical_graphs(dl_example):
    left = make_config("l", "cnfcomp", "up", "cmodelsTest", "up")
    right = make_config("r", "dlvGen", "sd", "cmodelsTest", "up")
    assert compare_graphs(dl_example, left, right).verdict == "IDENTICAL"
    assert compare_graphs(dl_example, left, left).verdict == "IDENTICAL"


def test_compare_differing_graphs():
    p = prog("a :- a.")
    left = make_config("l", "cnfcomp", "up", "cmodelsTest", "up")
    right = make_config("r", "dlvGen", "sm", "cmodelsTest", "up")
    diff = compare_graphs(p, left, right)
    assert diff.verdict == "DIFFERS"
    assert diff.first_difference


def test_compare_needs_shared_witness(dl_example):
    with pytest.raises(ValueError):
        compare_graphs(dl_example, CONFIGS["cmodels"], CONFIGS["dlv"])
