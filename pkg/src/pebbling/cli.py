"""Command-line front end.

Every subcommand prints one JSON document on stdout and a short human
summary on stderr.  Exit status: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction

from . import acceptance
from .construct import ExpansionError, chain_upper_distribution, construct_solvable
from .engine import (Distribution, PebblingError, classify, format_moves, is_k_reachable,
                     is_k_solvable, parse_distribution)
from .graphs import (ChainSpec, ChainVariant, Graph, GraphError, build_chain, circulant_graph,
                     circulant_special, collapse_chain, complement_km_km, complete_graph, cycle_graph,
                     diameter, girth, has_dominating_edge, homogeneous_chain, is_special, parse_graph,
                     path_graph, small_special, star_graph, wheel_graph)
from .lab import GirthParams, LabError, chain_witness, diameter2_witness, girth_experiment, load_fixture
from .solver import automorphisms, pi_star


class UsageError(Exception):
    code = "usage"


class DomainError(Exception):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


# -- generator mini-language -----------------------------------------------------

_SIMPLE = {
    "complete": (complete_graph, 1),
    "path": (path_graph, 1),
    "cycle": (cycle_graph, 1),
    "star": (star_graph, 1),
    "wheel": (wheel_graph, 1),
    "complement-km-km": (complement_km_km, 1),
    "circulant-special": (circulant_special, 1),
    "small-special": (small_special, 0),
}


def _ints(params: list[str], name: str) -> list[int]:
    try:
        return [int(p) for p in params]
    except ValueError:
        raise UsageError(f"{name}: parameters must be integers") from None


def parse_chain(text: str) -> ChainSpec:
    """``BLOCK,l=3,variant=plain`` where BLOCK is itself a generator spec."""
    parts = text.split(",")
    block_parts, opts = [], {}
    for p in parts:
        if "=" in p:
            key, _, val = p.partition("=")
            opts[key.strip()] = val.strip()
        else:
            block_parts.append(p)
    if not block_parts:
        raise UsageError("chain: missing block generator")
    unknown = set(opts) - {"l", "variant"}
    if unknown:
        raise UsageError(f"chain: unknown options {sorted(unknown)}")
    block = generate(",".join(block_parts))
    length = _ints([opts.get("l", "1")], "chain")[0]
    variant = opts.get("variant", "plain")
    if variant not in {v.value for v in ChainVariant}:
        raise UsageError(f"chain: unknown variant {variant}")
    try:
        return homogeneous_chain(block, length, variant)
    except GraphError as exc:
        raise DomainError("not-special", str(exc)) from None


def generate(text: str) -> Graph:
    name, _, rest = text.strip().partition(":")
    params = [p for p in rest.split(",") if p] if rest else []
    try:
        if name in _SIMPLE:
            fn, arity = _SIMPLE[name]
            if len(params) != arity:
                raise UsageError(f"{name} takes {arity} parameter(s)")
            return fn(*_ints(params, name))
        if name == "circulant":
            vals = _ints(params, name)
            if len(vals) < 2:
                raise UsageError("circulant takes n followed by jumps")
            return circulant_graph(vals[0], vals[1:])
        if name == "fixture":
            if len(params) != 1:
                raise UsageError("fixture takes one name")
            return load_fixture(params[0])
        if name == "gnp":
            if len(params) != 3:
                raise UsageError("gnp takes n,p,seed")
            n, p, seed = int(params[0]), float(params[1]), int(params[2])
            rng = random.Random(seed)
            return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p])
        if name == "chain":
            spec = parse_chain(rest)
            return build_chain(spec)
    except (GraphError, LabError) as exc:
        raise DomainError("generator", str(exc)) from None
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from None
    raise UsageError(f"unknown generator {name!r}")


def load_graph(args) -> tuple[Graph, str]:
    if getattr(args, "gen", None):
        return generate(args.gen), args.gen
    if getattr(args, "graph", None):
        path = args.graph
        if not os.path.exists(path):
            if os.sep in path or path.endswith(".txt"):
                raise UsageError(f"cannot read {path}: no such file")
            # a bare generator spec is accepted as well
            return generate(path), path
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc}") from None
        try:
            return parse_graph(text), path
        except GraphError as exc:
            raise DomainError("graph-format", str(exc)) from None
    raise UsageError("a graph is required: --graph FILE or --gen SPEC")


def load_distribution(g: Graph, text: str | None) -> Distribution:
    if text is None:
        raise UsageError("--dist is required")
    if text == "-":
        text = sys.stdin.read()
    elif os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    stripped = text.strip()
    if stripped.startswith("{"):
        # a report from another subcommand carrying a distribution
        doc = json.loads(stripped)
        text = doc.get("distribution", "")
        if isinstance(text, dict):
            text = ",".join(f"{v}:{c}" for v, c in text.items())
    try:
        return parse_distribution(g, text)
    except PebblingError as exc:
        raise DomainError("distribution", str(exc)) from None


def inline(d: Distribution) -> str:
    return ",".join(f"{v}:{c}" for v, c in d.items())


# -- subcommands -------------------------------------------------------------------


def cmd_generate(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    rep = {
        "graph": desc,
        "n": g.n,
        "m": g.m,
        "min_degree": g.min_degree,
        "connected": g.is_connected,
        "diameter": diameter(g) if g.is_connected else None,
        "girth": None if girth(g) == float("inf") else int(girth(g)),
        "edges": [list(e) for e in g.edges],
    }
    return rep, f"{desc}: n={g.n} m={g.m} delta={g.min_degree}"


def cmd_reach(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    d = load_distribution(g, args.dist)
    if args.target is None:
        raise UsageError("--target is required")
    try:
        ok, moves = is_k_reachable(g, d, args.target, args.k)
    except (PebblingError, GraphError) as exc:
        raise DomainError("precondition", str(exc)) from None
    rep = {"graph": desc, "k": args.k, "target": args.target, "distribution": inline(d),
           "reachable": ok, "moves": format_moves(moves).split() if ok else None}
    return rep, f"target {args.target} {'is' if ok else 'is not'} {args.k}-reachable"


def cmd_solvable(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    d = load_distribution(g, args.dist)
    try:
        ok, bad = is_k_solvable(g, d, args.k)
    except (PebblingError, GraphError) as exc:
        raise DomainError("precondition", str(exc)) from None
    rep = {"graph": desc, "k": args.k, "size": d.size, "distribution": inline(d),
           "solvable": ok, "failing_vertex": bad}
    return rep, f"size {d.size}: {'solvable' if ok else f'vertex {bad} unreachable'}"


def cmd_classify(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    d = load_distribution(g, args.dist)
    try:
        r = classify(g, d)
    except (PebblingError, GraphError) as exc:
        raise DomainError("precondition", str(exc)) from None
    rep = {"graph": desc, "distribution": inline(d), "T": sorted(r.t_set), "H": sorted(r.h_set),
           "U": sorted(r.u_set), "U_components": [sorted(c) for c in r.u_components]}
    return rep, f"|T|={len(r.t_set)} |H|={len(r.h_set)} |U|={len(r.u_set)}"


def _solve(g: Graph, desc: str, args) -> tuple[dict, str]:
    autos = automorphisms(g) if args.symmetry else None
    try:
        res = pi_star(g, args.k, args.budget, automorphism_list=autos, shards=args.threads,
                      time_limit=args.time_limit)
    except (PebblingError, GraphError) as exc:
        raise DomainError("precondition", str(exc)) from None
    rep = res.report(desc)
    if not args.timings:
        rep.pop("wall_time")
    summary = (f"pi*_{args.k} = {res.pi_star}" if res.pi_star is not None
               else "budget exceeded, partial certificate reported")
    return rep, f"{summary} ({res.wall_time:.2f}s)"


def cmd_pistar(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    return _solve(g, desc, args)


def _chain_from_args(args) -> tuple[ChainSpec, str]:
    if args.blocks is None:
        if args.gen and args.gen.startswith("chain:"):
            return parse_chain(args.gen[len("chain:"):]), args.gen
        raise UsageError("--blocks SPEC (or --gen chain:...) is required")
    desc = f"chain:{args.blocks},l={args.l},variant={args.variant}"
    return parse_chain(f"{args.blocks},l={args.l},variant={args.variant}"), desc


def cmd_chain_pistar(args) -> tuple[dict, str]:
    spec, desc = _chain_from_args(args)
    return _solve(build_chain(spec), desc, args)


def cmd_chain_dist(args) -> tuple[dict, str]:
    spec, desc = _chain_from_args(args)
    if spec.variant is not ChainVariant.PLAIN:
        raise DomainError("precondition", "chain distribution needs a plain chain")
    d = chain_upper_distribution(spec)
    rep = {"graph": desc, "size": d.size, "distribution": inline(d)}
    return rep, f"chain distribution of size {d.size}"


def cmd_collapse(args) -> tuple[dict, str]:
    spec, desc = _chain_from_args(args)
    try:
        q = collapse_chain(spec)
    except GraphError as exc:
        raise DomainError("precondition", str(exc)) from None
    rep = {"graph": desc, "path_length": q.target.n, "phi": list(q.phi)}
    if args.dist is not None:
        d = load_distribution(q.source, args.dist)
        dphi = Distribution(q.target, q.collapse(d.counts))
        rep["distribution"] = inline(d)
        rep["collapsed"] = inline(dphi)
        if args.target is not None:
            src = is_k_reachable(q.source, d, args.target, args.k)[0]
            img = is_k_reachable(q.target, dphi, q.phi[args.target], args.k)[0]
            rep.update({"target": args.target, "image": q.phi[args.target],
                        "source_reachable": src, "image_reachable": img})
    return rep, f"collapsed onto P_{q.target.n}"


def cmd_construct(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    try:
        c = construct_solvable(g)
    except GraphError as exc:
        raise DomainError("precondition", str(exc)) from None
    except ExpansionError as exc:
        raise DomainError("expansion", f"{exc} {exc.diagnostics}") from None
    rep = {"graph": desc, "n": g.n, "min_degree": g.min_degree, **c.summary(),
           "distribution": inline(c.distribution), "d0": inline(c.d0),
           "steps_detail": [s.record() for s in c.steps]}
    return rep, f"|D| = {c.distribution.size} <= {c.bound} = 15n/(4(delta+1))"


def cmd_special_check(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    try:
        r = is_special(g)
        dom, edge = has_dominating_edge(g)
    except GraphError as exc:
        raise DomainError("precondition", str(exc)) from None
    rep = {"graph": desc, "is_special": r.is_special,
           "witness_pair": list(r.witness_pair) if r.witness_pair else None,
           "failure_reason": r.failure_reason.value if r.failure_reason else None,
           "dominating_edge": list(edge) if dom else None}
    return rep, "special" if r.is_special else f"not special: {r.failure_reason.value}"


def cmd_witness(args) -> tuple[dict, str]:
    try:
        eps = Fraction(args.epsilon)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad epsilon {args.epsilon!r}") from None
    try:
        if args.family == "diameter2":
            _, rec = diameter2_witness(eps)
        else:
            _, rec = chain_witness(eps, args.d)
    except LabError as exc:
        raise DomainError("witness", str(exc)) from None
    return rec, rec["inequality"]


def cmd_girth_exp(args) -> tuple[dict, str]:
    g, desc = load_graph(args)
    k = args.k if args.k is not None else g.min_degree
    try:
        params = GirthParams(k=k, t=args.t, trials=args.trials, seed=args.seed)
        rep = girth_experiment(g, params, desc)
    except (LabError, GraphError) as exc:
        raise DomainError("precondition", str(exc)) from None
    d = rep.to_dict()
    return d, f"mean {rep.mean:.3f} +- {rep.stderr:.3f}, analytic bound {rep.analytic:.3f}"


def cmd_verify_all(args) -> tuple[dict, str]:
    only = None
    if args.only:
        only = _ints(args.only.split(","), "--only")
        unknown = set(only) - set(acceptance.CHECKS)
        if unknown:
            raise UsageError(f"--only: no criteria {sorted(unknown)}")
    results = acceptance.run_all(args.scale, only, echo=lambda s: print(s, file=sys.stderr))
    rep = {"scale": args.scale, "results": [r.to_dict() for r in results],
           "passed": all(r.passed for r in results)}
    if not args.timings:
        for r in rep["results"]:
            r.pop("seconds")
    failed = [r.number for r in results if not r.passed]
    if failed:
        raise _Reported(rep, f"failed criteria: {failed}")
    return rep, "all criteria pass"


class _Reported(Exception):
    """A domain failure that still carries a full report."""

    def __init__(self, report: dict, summary: str) -> None:
        super().__init__(summary)
        self.report = report


# -- parser ------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        # one machine-parsable line instead of the usage block
        self.exit(2, f"error: usage: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pebbling", description="Optimal pebbling toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_opts(sp):
        sp.add_argument("--graph", help="graph file ('n m' header, then 'u v' lines)")
        sp.add_argument("--gen", help="generator spec, e.g. complement-km-km:4")

    def solver_opts(sp):
        sp.add_argument("--k", type=int, default=1)
        sp.add_argument("--budget", type=int)
        sp.add_argument("--time-limit", type=float)
        sp.add_argument("--threads", type=int, default=1, help="number of enumeration shards")
        sp.add_argument("--no-symmetry", dest="symmetry", action="store_false")
        sp.add_argument("--timings", action="store_true", help="include wall time in the report")

    def chain_opts(sp):
        sp.add_argument("--blocks", help="block generator spec")
        sp.add_argument("--l", type=int, default=1)
        sp.add_argument("--variant", default="plain", choices=[v.value for v in ChainVariant])
        sp.add_argument("--gen", help="alternatively chain:BLOCK,l=..,variant=..")

    sp = sub.add_parser("generate", help="build a graph and describe it")
    graph_opts(sp)
    sp.set_defaults(fn=cmd_generate)

    for name, fn, help_ in (("reach", cmd_reach, "decide k-reachability of one vertex"),
                            ("solvable", cmd_solvable, "decide k-solvability"),
                            ("classify", cmd_classify, "T/H/U partition")):
        sp = sub.add_parser(name, help=help_)
        graph_opts(sp)
        sp.add_argument("--dist", help="distribution file, '-' for stdin, or inline v:c,v:c")
        sp.add_argument("--k", type=int, default=1)
        if name == "reach":
            sp.add_argument("--target", type=int)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("pistar", help="exact optimal k-pebbling number")
    graph_opts(sp)
    solver_opts(sp)
    sp.set_defaults(fn=cmd_pistar)

    sp = sub.add_parser("chain-pistar", help="exact value on a block chain")
    chain_opts(sp)
    solver_opts(sp)
    sp.set_defaults(fn=cmd_chain_pistar)

    sp = sub.add_parser("chain-dist", help="explicit solvable chain distribution")
    chain_opts(sp)
    sp.set_defaults(fn=cmd_chain_dist)

    sp = sub.add_parser("collapse", help="collapse a chain onto a path")
    chain_opts(sp)
    sp.add_argument("--dist")
    sp.add_argument("--target", type=int)
    sp.add_argument("--k", type=int, default=1)
    sp.set_defaults(fn=cmd_collapse)

    sp = sub.add_parser("construct", help="constructive 15n/(4(delta+1)) distribution")
    graph_opts(sp)
    sp.set_defaults(fn=cmd_construct)

    sp = sub.add_parser("special-check", help="test the special-graph definition")
    graph_opts(sp)
    sp.set_defaults(fn=cmd_special_check)

    sp = sub.add_parser("witness", help="lower-bound witness inequalities")
    sp.add_argument("--family", choices=["diameter2", "chain"], default="diameter2")
    sp.add_argument("--epsilon", required=True, help="rational, e.g. 1 or 1/2")
    sp.add_argument("--d", type=int, default=1)
    sp.set_defaults(fn=cmd_witness)

    sp = sub.add_parser("girth-exp", help="randomized high-girth distribution experiment")
    graph_opts(sp)
    sp.add_argument("--k", type=int)
    sp.add_argument("--t", type=int, default=1)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_girth_exp)

    sp = sub.add_parser("verify-all", help="run the acceptance checks")
    sp.add_argument("--scale", choices=list(acceptance.SCALES), default="quick")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.add_argument("--timings", action="store_true")
    sp.set_defaults(fn=cmd_verify_all)
    return p


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.monotonic()
    try:
        report, summary = args.fn(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except _Reported as exc:
        _emit(exc.report)
        print(f"error: acceptance: {exc}", file=sys.stderr)
        return 1
    _emit(report)
    print(f"{summary} [{time.monotonic() - t0:.2f}s]", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
