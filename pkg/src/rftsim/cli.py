"""Command line front end.

Subcommands: ``validate``, ``compile``, ``check``, ``simulate``.  Exit
codes are a stable contract: 0 success, 1 analysis negative (violations
found, model not certified), 2 I/O or syntax failure, 64 usage error.

Reports end with a machine-readable section delimited by ``---`` lines,
one ``key=value`` per line.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from rftsim.compiler import compile_tree, emit_iosa
from rftsim.determinism import DeterminismReport, check_model, verdict
from rftsim.errors import ParseError, ToolError
from rftsim.iosa.symbolic import parse_model
from rftsim.rft import dangling_leaves, parse_rft, validate_rft
from rftsim.simulator import estimate_unavailability, estimate_unreliability

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_IO = 2
EXIT_USAGE = 64


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; remap to the documented code
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


def _build_parser():
    p = argparse.ArgumentParser(
        prog="rftsim",
        description="Repairable fault tree toolchain: validate, compile to "
                    "stochastic automata, check weak determinism, simulate.")
    sub = p.add_subparsers(required=True, metavar="command")

    v = sub.add_parser("validate", help="check tree well-formedness")
    v.add_argument("file")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("compile", help="compile a tree to a symbolic model")
    c.add_argument("file")
    c.add_argument("-o", "--output", help="output path (default: <file>.iosa)")
    c.set_defaults(func=cmd_compile)

    k = sub.add_parser("check", help="weak-determinism verdict")
    k.add_argument("file", help="a .rft tree or a raw .iosa model")
    k.add_argument("--max-states", type=int, default=1_500_000)
    k.set_defaults(func=cmd_check)

    s = sub.add_parser("simulate", help="Monte Carlo dependability estimation")
    s.add_argument("file", help="a .rft tree")
    s.add_argument("--metric", choices=("unreliability", "unavailability"),
                   required=True)
    s.add_argument("--horizon", type=float, required=True)
    s.add_argument("--runs", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--confidence", type=float, default=0.95)
    s.add_argument("--tiebreak", choices=("lex", "revlex", "random"), default="lex")
    s.add_argument("--trace", help="write an event trace to this path")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--force", action="store_true",
                   help="simulate even when the determinism check fails")
    s.set_defaults(func=cmd_simulate)
    return p


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _first_word(text):
    for line in text.splitlines():
        line = line.split("//", 1)[0].strip()
        if line:
            return line.split()[0]
    return ""


def _machine(pairs):
    lines = ["---"]
    lines += [f"{k}={v}" for k, v in pairs]
    lines.append("---")
    return "\n".join(lines)


def cmd_validate(args):
    tree = parse_rft(_read(args.file))
    violations = validate_rft(tree)
    for w in dangling_leaves(tree):
        print(f"warning: {w}")
    for v in violations:
        print(v)
    print(_machine([
        ("file", args.file),
        ("vertices", len(tree.vertices)),
        ("violations", len(violations)),
        ("valid", str(not violations).lower()),
    ]))
    return EXIT_OK if not violations else EXIT_ANALYSIS


def cmd_compile(args):
    tree = parse_rft(_read(args.file))
    violations = validate_rft(tree)
    if violations:
        for v in violations:
            print(v)
        print(_machine([("valid", "false"), ("violations", len(violations))]))
        return EXIT_ANALYSIS
    compiled = compile_tree(tree)
    out = args.output or os.path.splitext(args.file)[0] + ".iosa"
    text = emit_iosa(compiled)
    # atomic write: no partial file on failure
    d = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    print(f"wrote {out}")
    print(_machine([
        ("output", out),
        ("modules", len(compiled.modules)),
        ("actions", len(compiled.table.urgent)),
    ]))
    return EXIT_OK


def _check_report(rep: DeterminismReport):
    for note in rep.notes:
        print(note)
    if rep.counterexample is not None:
        print(f"counterexample: {rep.counterexample}")
    for state, a, b in rep.composed_witnesses[:5]:
        print(f"non-confluent ({a}, {b}) at composed state:\n  {state}")
    pairs = []
    for comp in rep.components:
        for (a, b) in comp.confluence.pairs:
            pairs.append(f"{comp.name}:{a}/{b}")
    kv = [
        ("weakly_deterministic", str(rep.weakly_deterministic).lower()),
        ("certified_by", rep.certified_by),
        ("component_pairs", ";".join(pairs)),
        ("clusters", ";".join(name for name, _, _ in rep.clusters)),
        ("composed_states", rep.composed_states),
    ]
    if rep.counterexample is not None:
        kv.append(("counterexample", str(rep.counterexample)))
    print(_machine(kv))


def cmd_check(args):
    text = _read(args.file)
    if args.file.endswith(".iosa") or (not args.file.endswith(".rft")
                                       and _first_word(text) == "module"):
        modules = parse_model(text)
        rep = verdict(modules, max_states=args.max_states)
    else:
        tree = parse_rft(text)
        violations = validate_rft(tree)
        if violations:
            for v in violations:
                print(v)
            return EXIT_ANALYSIS
        rep = check_model(compile_tree(tree), max_states=args.max_states)
    _check_report(rep)
    return EXIT_OK if rep.weakly_deterministic else EXIT_ANALYSIS


def cmd_simulate(args):
    if args.runs < 2:
        print("error: --runs must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    if args.horizon <= 0 and args.metric == "unavailability":
        print("error: --horizon must be positive", file=sys.stderr)
        return EXIT_USAGE
    if args.horizon < 0:
        print("error: --horizon must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    if not 0 < args.confidence < 1:
        print("error: --confidence must be in (0, 1)", file=sys.stderr)
        return EXIT_USAGE
    tree = parse_rft(_read(args.file))
    violations = validate_rft(tree)
    if violations:
        for v in violations:
            print(v)
        return EXIT_ANALYSIS
    compiled = compile_tree(tree)
    rep = check_model(compiled)
    if not rep.weakly_deterministic and not args.force:
        print("determinism check failed; use --force to simulate anyway")
        _check_report(rep)
        return EXIT_ANALYSIS
    estimator = (estimate_unreliability if args.metric == "unreliability"
                 else estimate_unavailability)
    trace = open(args.trace, "w", encoding="utf-8") if args.trace else None
    try:
        est = estimator(compiled, args.horizon, args.runs, args.seed,
                        confidence=args.confidence, policy=args.tiebreak,
                        jobs=args.jobs, trace=trace)
    finally:
        if trace is not None:
            trace.close()
    lo, hi = est.interval
    print(f"{est.metric} = {est.value:.6g}  "
          f"[{lo:.6g}, {hi:.6g}] at {est.confidence:.0%} confidence")
    print(f"runs={est.runs} events={est.events} seed={est.seed} "
          f"policy={est.policy} elapsed={est.elapsed:.2f}s")
    print(_machine([
        ("metric", est.metric),
        ("estimate", repr(est.value)),
        ("half_width", repr(est.half_width)),
        ("confidence", est.confidence),
        ("runs", est.runs),
        ("seed", est.seed),
        ("horizon", repr(est.horizon)),
        ("policy", est.policy),
        ("events", est.events),
        ("weakly_deterministic", str(rep.weakly_deterministic).lower()),
    ]))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
