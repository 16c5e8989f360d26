"""Walk the two-layer graphs of several solvers on a small disjunctive program.

Run with ``python3 demos/solver_walkthrough.py``. For each solver the
script prints the path the priority strategy takes, one transition per line,
and the stable model it ends in, next to the brute-force answer.
"""

from dasp import oracle
from dasp.engine import CONFIGS, run
from dasp.program import parse_program

PROGRAM = """
a :- c.
b :- c.
c :- a, b.
a | b.
"""


def show(program, name):
    cfg = CONFIGS[name]
    res = run(program, cfg, trace=True, check_invariants=True)
    print(f"== {cfg.describe()}")
    for entry in res.trace:
        if "rule" not in entry:
            continue
        lit = f" {entry['literal']}" if entry["literal"] else ""
        print(f"  {entry['rule']:<13}{lit:<8} L={entry['left'] or '∅'}  R={entry['right'] or '∅'}")
    model = sorted(program.table.name(a) for a in res.model) if res.model is not None else None
    print(f"  -> {res.verdict} {model} after {res.steps} steps\n")


def main():
    program = parse_program(PROGRAM)
    stable = sorted(sorted(program.table.name(a) for a in m) for m in oracle.stable_models(program))
    print(f"stable models by brute force: {stable}\n")
    for name in ("cmodels", "gnt", "dlv"):
        show(program, name)


if __name__ == "__main__":
    main()
