"""``dasp`` command line: solve, oracle, verify-checks, compare, replay.

Exit codes: 10 satisfiable, 20 unsatisfiable, 0 success of a check,
2 a check found a violation/difference, 30 inconclusive (state cap), 1 usage
or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from . import engine, oracle, propagators
from .generate import corpus
from .program import ParseError, Program, parse_program
from .transforms import generator, witness

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_INCONCLUSIVE = 30
EXIT_VIOLATION = 2
EXIT_USAGE = 1

SCHEMA = 1
STABLE_CAP = 12

log = logging.getLogger("dasp")


class UsageError(Exception):
    pass


def _read_program(path: str) -> Program:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    try:
        return parse_program(text)
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _pair(text: str) -> tuple[str, str]:
    if ":" not in text:
        raise UsageError(f"expected TRANSFORM:PROPAGATORS, got {text!r}")
    name, props = text.split(":", 1)
    return name, props


def _config_from_args(args) -> engine.SolverConfig:
    learning = args.learning
    try:
        if args.solver == "custom":
            missing = [f for f in ("gen", "test", "left", "right") if not getattr(args, f)]
            if missing:
                raise UsageError("--solver custom needs " + ", ".join("--" + m for m in missing))
            cfg = engine.SolverConfig(
                "custom",
                generator(args.gen),
                propagators.pset(args.left),
                witness(args.test),
                propagators.pset(args.right),
                args.early_test,
                args.separate_components,
                learning,
            )
        else:
            if any(getattr(args, f) for f in ("gen", "test", "left", "right")):
                raise UsageError("--gen/--test/--left/--right are only allowed with --solver custom")
            base = engine.CONFIGS[args.solver]
            cfg = base.with_flags(args.early_test, args.separate_components, learning)
        cfg.validate(unsafe=args.unsafe_pairs)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip('"')) from exc
    if args.unsafe_pairs and not cfg.compatible_types():
        log.warning("running with pairs that are not declared compatible; results may be wrong")
    return cfg


def _strategy(args) -> engine.Strategy:
    return engine.Strategy(args.strategy, args.decide, args.seed)


def _names(program: Program, atoms) -> list[str]:
    return [program.table.name(a) for a in sorted(atoms)]


def cmd_solve(args) -> int:
    program = _read_program(args.file)
    cfg = _config_from_args(args)
    try:
        res = engine.run(
            program,
            cfg,
            _strategy(args),
            max_steps=args.max_steps,
            trace=bool(args.trace),
            check_invariants=args.check_invariants,
        )
    except engine.EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.trace:
        header = {"header": {"schema": SCHEMA, "program": args.file, **_config_header(cfg)}}
        engine.write_trace(args.trace, res, header)
    model = _names(program, res.model) if res.model is not None else None
    if args.format == "json":
        print(json.dumps({"schema": SCHEMA, "verdict": res.verdict, "model": model, "steps": res.steps, "stats": res.stats}))
    elif res.verdict == "SAT":
        print(" ".join(model))
    else:
        print("UNSATISFIABLE")
    return EXIT_SAT if res.verdict == "SAT" else EXIT_UNSAT


def _config_header(cfg: engine.SolverConfig) -> dict:
    return {
        "gen": cfg.gen.name,
        "left": sorted(cfg.left),
        "test": cfg.test.name,
        "right": sorted(cfg.right),
        "early_test": cfg.early_test,
        "separate": cfg.separate,
        "learning": cfg.learning,
    }


def _config_from_header(h: dict) -> engine.SolverConfig:
    return engine.SolverConfig(
        "replay",
        generator(h["gen"]),
        frozenset(h["left"]),
        witness(h["test"]),
        frozenset(h["right"]),
        h.get("early_test", False),
        h.get("separate", False),
        h.get("learning"),
    )


def cmd_oracle(args) -> int:
    program = _read_program(args.file)
    kinds = {"classical": "cla", "supported": "sup", "stable": "sta"}
    cap = args.brute_cap
    if cap is None:
        cap = STABLE_CAP if args.enumerate == "stable" else oracle.DEFAULT_CAP
    try:
        if args.enumerate == "stable":
            found = oracle.stable_models(program, cap=cap, method=args.method)
        else:
            found = oracle.models(program, kinds[args.enumerate], cap=cap)
    except oracle.CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rows = sorted((sorted(m) for m in found), key=lambda m: (len(m), m))
    if args.format == "json":
        print(json.dumps({"schema": SCHEMA, "kind": args.enumerate, "models": [_names(program, m) for m in rows]}))
    else:
        for m in rows:
            print("{" + ",".join(_names(program, m)) + "}")
    return EXIT_SAT if found else EXIT_UNSAT


def _verify_one(job) -> dict:
    text, solver, dp, max_states, flags = job
    program = parse_program(text)
    out = {"program": text}
    if dp:
        rep = engine.explore_graph(program, None, max_states, members=propagators.PSETS["up"])
    else:
        cfg = engine.config(solver, **flags) if any(flags.values()) else engine.CONFIGS[solver]
        if any(flags.values()):
            # extensions are checked by oracle agreement over many strategies
            sm = oracle.stable_models(program)
            bad = []
            for seed in range(20):
                strat = engine.Strategy("priority" if seed == 0 else "random", seed=seed)
                res = engine.run(program, cfg, strat, check_invariants=True)
                if (res.verdict == "SAT") != bool(sm) or (res.model is not None and res.model not in sm):
                    bad.append(f"seed {seed}: {res.verdict}")
            out.update(verdict="violated" if bad else "holds", violations=bad, states=0)
            return out
        rep = engine.explore_graph(program, cfg, max_states)
    out.update(verdict=rep.verdict, violations=rep.violations, states=rep.states)
    return out


def cmd_verify(args) -> int:
    if args.files:
        texts = [open(f, encoding="utf-8").read() if f != "-" else sys.stdin.read() for f in args.files]
        for f, t in zip(args.files, texts):
            try:
                parse_program(t)
            except ParseError as exc:
                raise UsageError(f"{f}: {exc}") from exc
    else:
        from .program import render_program

        texts = [render_program(p) for p in corpus(args.seed, args.random, max_atoms=args.max_atoms, max_rules=args.max_rules)]
    if args.solver not in engine.CONFIGS:
        raise UsageError(f"unknown solver {args.solver!r}")
    flags = {"early_test": args.early_test, "separate": args.separate_components, "learning": args.learning}
    jobs = [(t, args.solver, args.dp, args.max_states, flags) for t in texts]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_verify_one, jobs))
    else:
        results = [_verify_one(j) for j in jobs]
    counts = {"holds": 0, "violated": 0, "inconclusive": 0}
    for r in results:
        counts[r["verdict"]] += 1
        if r["verdict"] != "holds" and args.format == "text":
            print(f"{r['verdict'].upper()}: {r['program']!r} {r['violations']}")
    if args.format == "json":
        print(json.dumps({"schema": SCHEMA, "counts": counts, "results": results}))
    else:
        print(f"checked {len(results)} programs: {counts['holds']} hold, {counts['violated']} violated, {counts['inconclusive']} inconclusive")
    if counts["violated"]:
        return EXIT_VIOLATION
    if counts["inconclusive"]:
        return EXIT_INCONCLUSIVE
    return 0


def _config_from_pairs(left: str, right: str) -> engine.SolverConfig:
    g, lp = _pair(left)
    t, rp = _pair(right)
    return engine.SolverConfig(f"{g}:{lp}", generator(g), propagators.pset(lp), witness(t), propagators.pset(rp))


def cmd_compare(args) -> int:
    program = _read_program(args.file)
    try:
        a = _config_from_pairs(args.left, args.test)
        b = _config_from_pairs(args.right, args.test)
        for cfg in (a, b):
            cfg.validate(unsafe=args.unsafe_pairs)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip('"')) from exc
    diff = engine.compare_graphs(program, a, b, args.max_states)
    if args.format == "json":
        print(json.dumps({"schema": SCHEMA, "verdict": diff.verdict, "first_difference": diff.first_difference, "edges": diff.edges}))
    else:
        print(diff.verdict)
        if diff.first_difference:
            print(diff.first_difference)
    return {"IDENTICAL": 0, "DIFFERS": EXIT_VIOLATION}.get(diff.verdict, EXIT_INCONCLUSIVE)


def cmd_replay(args) -> int:
    program = _read_program(args.program)
    try:
        lines = engine.read_trace(args.trace)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read trace {args.trace}: {exc}") from exc
    headers = [l["header"] for l in lines if "header" in l]
    if headers:
        cfg = _config_from_header(headers[0])
    else:
        cfg = _config_from_args(args)
    res = engine.replay(program, cfg, lines)
    print(("REPRODUCED" if res.ok else "MISMATCH") + f" after {res.steps} steps: {res.message}")
    return 0 if res.ok else EXIT_VIOLATION


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", default="cmodels", choices=sorted(engine.CONFIGS) + ["custom"])
    p.add_argument("--gen", help="generating function (custom solver)")
    p.add_argument("--test", help="witness function (custom solver)")
    p.add_argument("--left", help="left propagator set, e.g. up, sd, sm or UP,ARC (custom solver)")
    p.add_argument("--right", help="right propagator set (custom solver)")
    p.add_argument("--early-test", action="store_true", help="early minimality tests (gnt)")
    p.add_argument("--separate-components", action="store_true", help="check non-HCF components separately (dlv)")
    p.add_argument(
        "--learning", nargs="?", const="decisions", choices=["decisions", "reasons"], default=None,
        help="backjumping and learning; the clause negates all decisions or only the relevant ones",
    )
    p.add_argument("--unsafe-pairs", action="store_true", help="skip the pair compatibility check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dasp", description="abstract generate-and-test solvers for disjunctive programs")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="search for a stable model")
    p.add_argument("file")
    _add_solver_flags(p)
    p.add_argument("--strategy", default="priority", choices=["priority", "random"])
    p.add_argument("--decide", default="lex", choices=["lex", "random"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=engine.DEFAULT_MAX_STEPS)
    p.add_argument("--trace", help="write the path as JSON lines to this file")
    p.add_argument("--check-invariants", action="store_true")
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="enumerate models by brute force")
    p.add_argument("file")
    p.add_argument("--enumerate", default="stable", choices=["classical", "supported", "stable"])
    p.add_argument("--method", default="reduct", choices=["reduct", "unfounded"])
    p.add_argument("--brute-cap", type=int, default=None, help="atom cap (default 20, or 12 for stable models)")
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify-checks", help="explore graphs exhaustively and check them against the oracle")
    p.add_argument("files", nargs="*")
    p.add_argument("--solver", default="cmodels")
    p.add_argument("--dp", action="store_true", help="explore the single-layer DP graph instead")
    p.add_argument("--early-test", action="store_true")
    p.add_argument("--separate-components", action="store_true")
    p.add_argument("--learning", nargs="?", const="decisions", choices=["decisions", "reasons"], default=None)
    p.add_argument("--random", type=int, default=20, help="number of random programs when no file is given")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-atoms", type=int, default=3)
    p.add_argument("--max-rules", type=int, default=4)
    p.add_argument("--max-states", type=int, default=200_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="compare the reachable edges of two graphs")
    p.add_argument("file")
    p.add_argument("--left", required=True, help="GEN:PROPS of the first graph, e.g. cnfcomp:up")
    p.add_argument("--right", required=True, help="GEN:PROPS of the second graph, e.g. dlvGen:sd")
    p.add_argument("--test", default="cmodelsTest:up", help="shared TEST:PROPS")
    p.add_argument("--max-states", type=int, default=200_000)
    p.add_argument("--unsafe-pairs", action="store_true")
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("replay", help="re-run a recorded trace and compare every step")
    p.add_argument("trace")
    p.add_argument("--program", required=True)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
