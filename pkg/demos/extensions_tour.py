"""Early minimality tests, separate component checks and learning.

Each extension is run with random search orders on a handful of programs
and compared with the brute-force stable models; the script also shows the
clauses learnt while searching a small program with conflicts.
"""

from dasp import oracle
from dasp.engine import Strategy, config, run
from dasp.extensions import component_analysis
from dasp.program import parse_program, render_clause

PROGRAMS = [
    "a | b.",
    "a :- a, b. b. a | b.",
    "a :- c. b :- c. c :- a, b. a | b.",
    "a :- c. b :- c. c :- a, b. a | b. x :- z. y :- z. z :- x, y. x | y.",
    "a :- not a.",
]


def main():
    for text in PROGRAMS:
        p = parse_program(text)
        stable = oracle.stable_models(p)
        ca = component_analysis(p)
        print(f"{text}\n  components={len(ca.components)} non-HCF={len(ca.non_hcf)} stable models={len(stable)}")
        for label, cfg in (
            ("early", config("gnt", early_test=True)),
            ("separate", config("dlv", separate=True)),
            ("learning", config("cmodels", learning="reasons")),
        ):
            agree = 0
            for seed in range(10):
                res = run(p, cfg, Strategy("priority", "random", seed=seed), check_invariants=True)
                agree += (res.model in stable) if res.verdict == "SAT" else not stable
            print(f"  {label:<9} agrees with the oracle in {agree}/10 runs")

    p = parse_program("a | b. c | d. :- a, c. :- a, d.")
    cfg = config("cmodels", learning="reasons")
    res = run(p, cfg, trace=True)
    print("\nlearnt on 'a | b. c | d. :- a, c. :- a, d.':")
    for rule, clause, _ in res.learnt:
        print(f"  {rule}: {render_clause(clause, p.table)}")


if __name__ == "__main__":
    main()
