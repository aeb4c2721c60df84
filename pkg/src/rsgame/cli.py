"""Command-line front end: ``rsgame {run,enumerate,fip,bounds,gen}``.

Exit codes: 0 success, 1 a property or expectation failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Optional

from . import analysis, bounds, dynamics, instances
from .core import AccessibilityGraph, GameError, UtilitySpec, as_rational, format_rational

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Refusal(Exception):
    """Raised to abort a command with exit code 2 and a message."""


def instance_summary(g: AccessibilityGraph, spec: UtilitySpec) -> dict:
    delta = g.max_resource_degree
    return {
        "n": g.n,
        "k": g.k,
        "max_resource_degree": delta,
        "lambda": format_rational(spec.lam),
        "p_shape": "abstract" if spec.slope is None else {"linear": format_rational(spec.slope)},
        "regime": bounds.regime(spec.lam, delta).value if delta >= 2 else None,
    }


def _moves_json(g: AccessibilityGraph, moves) -> list[dict]:
    return [
        {"agent": g.agent_names[m.agent], "from": g.resource_names[m.source], "to": g.resource_names[m.target]}
        for m in moves
    ]


def _emit(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    return instances.load(path)


# -- commands ---------------------------------------------------------------


def cmd_run(args) -> int:
    g, spec, initial = _load(args.instance)
    mode = dynamics.Mode.parse(args.mode)
    if args.random_start:
        s0 = instances.random_profile(g, random.Random(args.seed))
    else:
        s0 = initial if initial is not None else g.default_profile()

    if args.audit == "phi-lex":
        if mode is not dynamics.Mode.IMPACT_BLIND:
            raise Refusal("refusing phi-lex audit: it applies to impact-blind dynamics only")
        try:
            analysis.require_phi_lex_preconditions(g, spec)
        except analysis.PreconditionError as exc:
            raise Refusal(f"refusing phi-lex audit: {exc}") from None
    elif args.audit == "phi-majority":
        if mode is not dynamics.Mode.IMPACT_AWARE:
            raise Refusal("refusing phi-majority audit: it applies to impact-aware dynamics only")
        try:
            analysis.require_phi_majority_preconditions(g, spec)
        except analysis.PreconditionError as exc:
            raise Refusal(f"refusing phi-majority audit: {exc}") from None

    scheduler = dynamics.make_scheduler(args.scheduler, args.seed)
    trace = dynamics.run(g, s0, spec, mode, scheduler, args.max_steps)

    audit = None
    violation = None
    if args.audit == "phi-lex":
        violation = analysis.audit_phi_lex(g, trace, spec)
    elif args.audit == "phi-majority":
        violation = analysis.audit_phi_majority(g, trace, spec)
    if args.audit != "none":
        audit = {"potential": args.audit, "result": "ok" if violation is None else "violation"}
        if violation is not None:
            audit["violation"] = violation.to_json()

    witness = None
    if trace.outcome is dynamics.Outcome.EQUILIBRIUM:
        witness = {"equilibrium": g.profile_names(trace.final)}
    elif trace.outcome is dynamics.Outcome.PROFILE_REVISITED:
        cycle = [st.move for st in trace.steps[trace.revisit_index:]]
        witness = {"cycle": _moves_json(g, cycle)}

    report = {
        "command": "run",
        "instance": instance_summary(g, spec),
        "parameters": {
            "mode": mode.value,
            "scheduler": args.scheduler,
            "seed": args.seed,
            "max_steps": args.max_steps,
            "audit": args.audit,
            "random_start": args.random_start,
        },
        "outcome": trace.outcome.value,
        "steps": len(trace.steps),
        "revisit_index": trace.revisit_index,
        "witness": witness,
        "audit": audit,
        "trace": dynamics.trace_to_json(g, trace),
    }
    if args.trace_log:
        Path(args.trace_log).write_text(dynamics.trace_to_text(g, trace))
    _emit(report, args.output)

    if violation is not None:
        return EXIT_FAIL
    expected = {
        "equilibrium": dynamics.Outcome.EQUILIBRIUM,
        "revisit": dynamics.Outcome.PROFILE_REVISITED,
        "step-limit": dynamics.Outcome.STEP_LIMIT,
    }
    if args.expect and trace.outcome is not expected[args.expect]:
        return EXIT_FAIL
    return EXIT_OK


def cmd_enumerate(args) -> int:
    g, spec, _ = _load(args.instance)
    mode = dynamics.Mode.parse(args.mode)
    if args.jobs > 1:
        dg = analysis.build_digraph(g, spec, mode, args.budget, args.jobs)
        found = [dg.profile(u) for u in dg.sinks()]
    else:
        found = analysis.find_equilibria(g, spec, mode, args.budget)
    report = {
        "command": "enumerate",
        "instance": instance_summary(g, spec),
        "parameters": {"mode": mode.value},
        "profiles": g.profile_count,
        "outcome": "equilibria-found" if found else "no-equilibrium",
        "count": len(found),
        "equilibria": [g.profile_names(s) for s in found],
    }
    _emit(report, args.output)
    if args.expect == "equilibrium" and not found:
        return EXIT_FAIL
    if args.expect == "no-equilibrium" and found:
        return EXIT_FAIL
    return EXIT_OK


def cmd_fip(args) -> int:
    g, spec, _ = _load(args.instance)
    mode = dynamics.Mode.parse(args.mode)
    result = analysis.fip_check(g, spec, mode, args.budget, args.jobs)
    dg = result.digraph
    if args.emit_digraph:
        Path(args.emit_digraph).write_text(dg.to_dot())
    report = {
        "command": "fip",
        "instance": instance_summary(g, spec),
        "parameters": {"mode": mode.value},
        "profiles": dg.node_count,
        "edges": dg.edge_count,
        "sinks": len(dg.sinks()),
        "outcome": "holds" if result.holds else "fails",
        "witness": None
        if result.holds
        else {
            "cycle": _moves_json(g, result.cycle),
            "profiles": [g.profile_names(s) for s in result.cycle_profiles],
        },
    }
    _emit(report, args.output)
    if args.expect == "holds" and not result.holds:
        return EXIT_FAIL
    if args.expect == "fails" and result.holds:
        return EXIT_FAIL
    return EXIT_OK


def bounds_report(delta: int) -> dict:
    low, up = bounds.lower_bound_L(delta), bounds.upper_bound_U(delta)
    return {
        "delta": delta,
        "L": format_rational(low),
        "U": format_rational(up),
        "increasing": f"lambda >= {format_rational(low)}",
        "decreasing": f"lambda <= {format_rational(up)}",
    }


def cmd_bounds(args) -> int:
    report = bounds_report(args.delta)
    if args.json:
        _emit(report, None)
        return EXIT_OK
    low, up = bounds.lower_bound_L(args.delta), bounds.upper_bound_U(args.delta)
    print(f"delta {args.delta}")
    print(f"L = {report['L']}  (≈ {float(low):.6f})")
    print(f"U = {report['U']}  (≈ {float(up):.6f})")
    print(f"increasing regime: {report['increasing']}")
    print(f"decreasing regime: {report['decreasing']}")
    if low > up:
        print(f"mixed regime:      {report['U']} < lambda < {report['L']}")
    return EXIT_OK


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "no-ibe":
        g = instances.gen_no_ibe(args.degree)
    elif fam == "no-iae-tree":
        g = instances.gen_no_iae_binary_tree()
    elif fam == "chaser":
        g = instances.gen_no_iae_chaser(args.degree)
    elif fam == "cycle":
        coloring = args.coloring
        if coloring is not None:
            coloring = ["red" if ch in "rR" else "blue" if ch in "bB" else ch for ch in coloring]
        else:
            coloring = args.seed
        g = instances.gen_cycle(args.size, coloring)
    elif fam == "random-bintree":
        g = instances.gen_random_binary_tree(args.seed, args.max_resources, args.max_agents, args.red_fraction)
    else:  # pragma: no cover - argparse restricts choices
        raise Refusal(f"unknown family {fam}")
    spec = UtilitySpec(as_rational(args.lam), None if args.abstract else as_rational(args.slope))
    text = instances.dumps(g, spec)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rsgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def analysis_flags(p):
        p.add_argument("instance")
        p.add_argument("--mode", choices=["ib", "ia"], required=True)
        p.add_argument("--budget", type=int, default=analysis.DEFAULT_BUDGET)
        p.add_argument("--jobs", type=int, default=1, help="worker processes for digraph construction")
        p.add_argument("-o", "--output", help="write the JSON report here instead of stdout")

    p = sub.add_parser("run", help="simulate best-response dynamics")
    p.add_argument("instance")
    p.add_argument("--mode", choices=["ib", "ia"], required=True)
    p.add_argument("--scheduler", choices=["first", "round-robin", "random"], default="first")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=10_000)
    p.add_argument("--audit", choices=["phi-lex", "phi-majority", "none"], default="none")
    p.add_argument("--random-start", action="store_true", help="seeded random initial profile")
    p.add_argument("--trace-log", help="write the line-oriented trace log here")
    p.add_argument("--expect", choices=["equilibrium", "revisit", "step-limit"])
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("enumerate", help="list all equilibria")
    analysis_flags(p)
    p.add_argument("--expect", choices=["equilibrium", "no-equilibrium"])
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("fip", help="check the finite improvement property")
    analysis_flags(p)
    p.add_argument("--emit-digraph", help="write the improvement digraph as DOT")
    p.add_argument("--expect", choices=["holds", "fails"])
    p.set_defaults(func=cmd_fip)

    p = sub.add_parser("bounds", help="print the lambda thresholds for a maximum degree")
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gen", help="write an instance file for a generator family")
    p.add_argument("--family", choices=["no-ibe", "no-iae-tree", "chaser", "cycle", "random-bintree"], required=True)
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--size", type=int, default=4)
    p.add_argument("--coloring", help="cycle colours as a string of r/b, e.g. rbrb")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-resources", type=int, default=5)
    p.add_argument("--max-agents", type=int, default=8)
    p.add_argument("--red-fraction", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", default="1/2")
    p.add_argument("--slope", default="1/1")
    p.add_argument("--abstract", action="store_true", help="comparison-only p")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (Refusal, GameError) as exc:
        print(f"rsgame {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
