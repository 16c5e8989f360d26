"""Explore whole graphs and compare two of them.

``explore_graph`` visits every reachable state of a graph and checks that it
is acyclic, that no non-terminal state is stuck, that every reachable Ok
state is a stable model, and that Failstate is reachable exactly when there
is none. ``compare_graphs`` checks whether two configurations induce the
same graph.
"""

from dasp import propagators
from dasp.engine import CONFIGS, compare_graphs, explore_graph, make_config
from dasp.program import parse_program


def main():
    pi1 = parse_program(":- not a, not b.  :- a, not c.")
    rep = explore_graph(pi1, None, members=propagators.PSETS["up"])
    print(f"DP graph on {{:- not a, not b. :- a, not c.}}: {rep.verdict}, {rep.states} states")

    for text in ("a | b.", "a :- not a.", "a :- b. b :- a. a | b."):
        p = parse_program(text)
        for name in ("gnt", "dlv"):
            rep = explore_graph(p, CONFIGS[name])
            print(f"{name:<5} on {text!r:<26} {rep.verdict:<8} states={rep.states}")

    completion = make_config("cnfcomp/up", "cnfcomp", "up", "cmodelsTest", "up")
    dlv_left = make_config("dlvGen/sd", "dlvGen", "sd", "cmodelsTest", "up")
    dlv_strong = make_config("dlvGen/sm", "dlvGen", "sm", "cmodelsTest", "up")
    p = parse_program("a :- b.  b :- a.  a | c.")
    print("completion+UP vs program+sd:", compare_graphs(p, completion, dlv_left).verdict)
    diff = compare_graphs(p, dlv_left, dlv_strong)
    print("program+sd vs program+sm:   ", diff.verdict, "-", diff.first_difference)


if __name__ == "__main__":
    main()
