import json

import pytest

from dasp.cli import EXIT_INCONCLUSIVE, EXIT_SAT, EXIT_UNSAT, EXIT_USAGE, EXIT_VIOLATION, main

from conftest import DL_EXAMPLE


@pytest.fixture
def ex(tmp_path):
    path = tmp_path / "ex.lp"
    path.write_text(DL_EXAMPLE + "\n")
    return str(path)


@pytest.fixture
def unsat(tmp_path):
    path = tmp_path / "unsat.lp"
    path.write_text("a :- not a.\n")
    return str(path)


def test_solve_dlv(ex, capsys):
    assert main(["solve", ex, "--solver", "dlv"]) == EXIT_SAT
    assert capsys.readouterr().out.strip() in ("a", "b")


def test_solve_unsat(unsat, capsys):
    assert main(["solve", unsat, "--solver", "gnt"]) == EXIT_UNSAT
    assert capsys.readouterr().out.strip() == "UNSATISFIABLE"


def test_solve_json_schema(ex, capsys):
    assert main(["solve", ex, "--solver", "cmodels", "--format", "json"]) == EXIT_SAT
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == 1 and out["verdict"] == "SAT"
    assert out["model"] in (["a"], ["b"])
    assert set(out["stats"]) == {"decisions", "propagations", "backtracks", "crossings", "learntCount"}


def test_solve_is_deterministic(ex, capsys):
    runs = []
    for _ in range(2):
        main(["solve", ex, "--solver", "gnt", "--strategy", "random", "--seed", "7", "--format", "json"])
        runs.append(capsys.readouterr().out)
    assert runs[0] == runs[1]


@pytest.mark.parametrize(
    "flags",
    [["--learning"], ["--learning", "reasons"], ["--solver", "gnt", "--early-test"], ["--solver", "dlv", "--separate-components"]],
)
def test_solve_with_extensions(ex, flags, capsys):
    assert main(["solve", ex, *flags, "--check-invariants"]) == EXIT_SAT


def test_custom_solver(ex, capsys):
    argv = ["solve", ex, "--solver", "custom", "--gen", "cnfcomp", "--left", "up", "--test", "gntTest", "--right", "sm"]
    assert main(argv) == EXIT_SAT


def test_usage_errors(ex, tmp_path, capsys):
    assert main(["solve", ex, "--solver", "cmodels", "--early-test"]) == EXIT_USAGE
    assert main(["solve", ex, "--solver", "gnt", "--separate-components"]) == EXIT_USAGE
    assert main(["solve", ex, "--solver", "custom", "--gen", "cnfcomp"]) == EXIT_USAGE
    assert main(["solve", ex, "--solver", "custom", "--gen", "cnfcomp", "--left", "up", "--test", "gntTest", "--right", "up"]) == EXIT_USAGE
    bad = tmp_path / "bad.lp"
    bad.write_text("a :- b\n")
    assert main(["solve", str(bad)]) == EXIT_USAGE
    assert main(["solve", str(tmp_path / "missing.lp")]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_unsafe_pairs_are_allowed_on_request(ex, capsys):
    argv = ["solve", ex, "--solver", "custom", "--gen", "cnfcomp", "--left", "up", "--test", "gntTest", "--right", "up"]
    assert main(argv + ["--unsafe-pairs"]) in (EXIT_SAT, EXIT_UNSAT)


def test_oracle_stable(ex, capsys):
    assert main(["oracle", ex, "--enumerate", "stable"]) == EXIT_SAT
    assert capsys.readouterr().out == "{a}\n{b}\n"


def test_oracle_methods_agree(ex, capsys):
    main(["oracle", ex, "--method", "unfounded"])
    assert capsys.readouterr().out == "{a}\n{b}\n"


def test_oracle_no_models(unsat, capsys):
    assert main(["oracle", unsat]) == EXIT_UNSAT
    assert capsys.readouterr().out == ""


def test_oracle_cap(ex, capsys):
    assert main(["oracle", ex, "--brute-cap", "2"]) == EXIT_USAGE


def test_compare_identical(ex, capsys):
    argv = ["compare", ex, "--left", "cnfcomp:up", "--right", "dlvgen:sd", "--test", "cmodelsTest:up", "--max-states", "200000"]
    assert main(argv) == 0
    assert capsys.readouterr().out.strip() == "IDENTICAL"


def test_compare_differs(tmp_path, capsys):
    path = tmp_path / "loop.lp"
    path.write_text("a :- a.\n")
    argv = ["compare", str(path), "--left", "dlvgen:sm", "--right", "dlvgen:up", "--unsafe-pairs"]
    assert main(argv) == EXIT_VIOLATION
    assert capsys.readouterr().out.startswith("DIFFERS")


def test_compare_cap(ex, capsys):
    argv = ["compare", ex, "--left", "cnfcomp:up", "--right", "dlvgen:sd", "--max-states", "3"]
    assert main(argv) == EXIT_INCONCLUSIVE


def test_verify_checks_files(ex, capsys):
    assert main(["verify-checks", ex, "--solver", "dlv"]) == 0
    assert main(["verify-checks", ex, "--dp"]) == 0


def test_verify_checks_random_json(capsys):
    assert main(["verify-checks", "--solver", "dlv", "--random", "5", "--seed", "3", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == 1


def test_verify_checks_extension_fuzzing(capsys):
    assert main(["verify-checks", "--solver", "gnt", "--early-test", "--random", "5"]) == 0


def test_verify_checks_inconclusive(ex, capsys):
    assert main(["verify-checks", ex, "--solver", "gnt", "--max-states", "3"]) == EXIT_INCONCLUSIVE


def test_trace_and_replay(ex, tmp_path, capsys):
    trace = str(tmp_path / "t.jsonl")
    assert main(["solve", ex, "--solver", "gnt", "--strategy", "random", "--seed", "4", "--trace", trace]) == EXIT_SAT
    with open(trace) as fh:
        header = json.loads(fh.readline())["header"]
    assert header["schema"] == 1 and header["gen"] == "gntGen"
    assert main(["replay", trace, "--program", ex]) == 0
    assert capsys.readouterr().out.splitlines()[-1].startswith("REPRODUCED")


def test_replay_detects_tampering(ex, tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    main(["solve", ex, "--solver", "dlv", "--trace", str(trace)])
    lines = trace.read_text().splitlines()
    step = json.loads(lines[1])
    step["left"] = "tampered"
    lines[1] = json.dumps(step)
    trace.write_text("\n".join(lines) + "\n")
    assert main(["replay", str(trace), "--program", ex]) == EXIT_VIOLATION


def test_module_entry_point(ex):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "dasp", "solve", ex, "--solver", "dlv"], capture_output=True, text=True)
    assert proc.returncode == EXIT_SAT
