"""
cli.py

Command-line front end. Every subcommand prints exactly one JSON document on
standard output: {"manifest", "result"} on success, {"error"} otherwise.

Exit codes:
- 0: a verdict was computed, negative verdicts included
- 2: unreadable or malformed input, failed preconditions, exceeded caps
"""

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from coarsekit import config
from coarsekit.coarse_maps import (
    CoarseMapTable,
    closeness,
    component_routing,
    finite_to_one_bound,
    verify_coarse_equivalence,
)
from coarsekit.constructions import (
    bipartite_double,
    expander_sequence,
    k_stack,
    stack_union,
    unstack_map,
    verify_stacking,
)
from coarsekit.errors import (
    CoarseKitError,
    DisconnectedGraph,
    DomainMismatch,
    InvalidParameter,
    SchemaError,
)
from coarsekit.expansion import (
    DEFAULT_BUDGET,
    bipartite_expansion_exact,
    cheeger_exact,
    expansion_profile,
    verify_expander,
)
from coarsekit.fileio import DocumentLoader, map_to_doc, space_to_doc
from coarsekit.matching import (
    DeficiencyCertificate,
    ball_selection,
    injectivize_minimal,
    injectivize_selection,
    injectivize_selection_scan,
)
from coarsekit.metric_core import GraphSpace, verify_metric
from coarsekit.reporting import RunManifest, render, render_error
from coarsekit.rigidity import (
    SBResult,
    bijectivize_expander,
    bijectivize_nonamenable,
    check_bijective_condition,
    check_injective_condition,
    injectivize_expander,
    sb_bijection,
    whyte_threshold,
)
from coarsekit.uf_homology import (
    build_target_set,
    fill_chain,
    injectivity_obstruction,
    whyte_check_exact,
    whyte_falsify,
)

log = logging.getLogger(__name__)

Outcome = Tuple[Any, Optional[int]]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidParameter(message)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: '{text}'")


def _sizes(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got '{text}'")


# ---------------------------------------------------------------------------
# handlers: (args, loader) -> (result, truncation length)
# ---------------------------------------------------------------------------

def _edge_violations(edges) -> Tuple[List[Dict[str, Any]], List[Tuple[int, int]]]:
    """Loops and repeated edges as violations, plus the simple edges that remain."""
    violations: List[Dict[str, Any]] = []
    simple: List[Tuple[int, int]] = []
    seen = set()
    for edge in edges:
        if not (isinstance(edge, list) and len(edge) == 2 and all(type(p) is int for p in edge)):
            raise SchemaError(f"space: edge {edge!r} is not a pair of integers")
        u, v = edge
        if u == v:
            violations.append({"kind": "loop", "points": [u, v]})
            continue
        key = (min(u, v), max(u, v))
        if key in seen:
            violations.append({"kind": "parallel", "points": list(key)})
            continue
        seen.add(key)
        simple.append(key)
    return violations, simple


def cmd_verify_space(args, loader: DocumentLoader) -> Outcome:
    doc = loader.read(args.space)
    if not isinstance(doc, dict) or not isinstance(doc.get("components"), list):
        raise SchemaError("space: missing 'components' list")
    components = []
    for i, comp in enumerate(doc["components"]):
        entry: Dict[str, Any] = {"index": i}
        if isinstance(comp, dict) and "dist" in comp:
            try:
                matrix = np.asarray(comp["dist"])
            except ValueError:
                matrix = np.zeros((0,))
            entry["violations"] = [{"kind": v.kind, "points": list(v.points)} for v in verify_metric(matrix)]
        elif isinstance(comp, dict) and "edges" in comp:
            if not isinstance(comp["edges"], list) or type(comp.get("n")) is not int:
                raise SchemaError(f"space.components[{i}]: needs an integer 'n' and an 'edges' list")
            violations, simple = _edge_violations(comp["edges"])
            try:
                GraphSpace.from_edges(comp.get("n", 0), simple)
            except DisconnectedGraph as exc:
                violations.append({"kind": "disconnected", "points": list(exc.pair)})
            entry["violations"] = violations
        else:
            raise SchemaError(f"space.components[{i}]: needs 'dist' or 'n' and 'edges'")
        components.append(entry)
    valid = all(not entry["violations"] for entry in components)
    return {"valid": valid, "components": components}, len(components)


def cmd_cheeger(args, loader) -> Outcome:
    space = loader.space(args.space)
    return cheeger_exact(space.graph(args.component), cap=args.exact_cap), len(space.union)


def cmd_verify_expander(args, loader) -> Outcome:
    space = loader.space(args.space)
    verdict = verify_expander(
        space.graph(args.component),
        args.k,
        args.h,
        cap=args.exact_cap,
        mode=args.mode,
        budget=args.budget,
        seed=args.seed,
    )
    return verdict, len(space.union)


def cmd_profile(args, loader) -> Outcome:
    space = loader.space(args.space)
    return expansion_profile(space.metric(args.component), args.r, cap=args.exact_cap), len(space.union)


def cmd_analyze_map(args, loader) -> Outcome:
    f = loader.map(args.map)
    result: Dict[str, Any] = {
        "truncation": f.truncation,
        "fiber_bound": finite_to_one_bound(f),
        "injective": f.is_injective(),
        "bijective": f.is_bijective(),
        "moduli": f.moduli,
        "routing": component_routing(f),
    }
    if args.inverse:
        g = loader.map(args.inverse)
        radius = args.radius if args.radius is not None else f.domain.as_space().diameter()
        result["equivalence"] = verify_coarse_equivalence(f, g, radius)
    return result, f.truncation


def _injectivization(outcome) -> Dict[str, Any]:
    if isinstance(outcome, DeficiencyCertificate):
        return {"result": "deficient", "certificate": outcome}
    return {"result": "ok", "map": outcome.map, "closeness": outcome.closeness}


def cmd_injectivize(args, loader) -> Outcome:
    f = loader.map(args.map)
    if args.variant == "selection":
        outcome = injectivize_selection_scan(f) if args.r is None else injectivize_selection(f, args.r)
        result = _injectivization(outcome)
        if not isinstance(outcome, DeficiencyCertificate):
            result["radius"] = outcome.radius
        return result, f.truncation
    if args.r is None:
        minimal = injectivize_minimal(f)
        result = {"result": "ok", "map": minimal.map, "closeness": minimal.closeness, "s_star": minimal.s_star}
        return result, f.truncation
    outcome = ball_selection(f, args.r)
    if isinstance(outcome, DeficiencyCertificate):
        return {"result": "deficient", "certificate": outcome}, f.truncation
    table = CoarseMapTable(f.domain, f.codomain, tuple(outcome.assignment[x] for x in f.domain.points()))
    return {"result": "ok", "map": table, "closeness": closeness(table, f)}, f.truncation


def cmd_check_injective(args, loader) -> Outcome:
    f = loader.map(args.map)
    report = check_injective_condition(f)
    result: Dict[str, Any] = {"condition": report}
    if args.construct and report.passed:
        result["construction"] = injectivize_expander(f, report)
    return result, f.truncation


def cmd_check_bijective(args, loader) -> Outcome:
    f = loader.map(args.map)
    return check_bijective_condition(f), f.truncation


def cmd_bijectivize(args, loader) -> Outcome:
    f = loader.map(args.map)
    report = check_bijective_condition(f)
    if not report.passed:
        return {"passed": False, "condition": report}, f.truncation
    return {"passed": True, "condition": report, "construction": bijectivize_expander(f, report)}, f.truncation


def cmd_bijectivize_sb(args, loader) -> Outcome:
    f = loader.map(args.map)
    g = loader.map(args.inverse)
    outcome = bijectivize_nonamenable(f, g)
    if isinstance(outcome, DeficiencyCertificate):
        return {"result": "deficient", "certificate": outcome}, f.truncation
    if isinstance(outcome, SBResult):
        return {"result": "partial", "sb": outcome}, f.truncation
    return {"result": "ok", "construction": outcome}, f.truncation


def cmd_sb(args, loader) -> Outcome:
    g = loader.partial_map(args.first)
    h = loader.partial_map(args.second)
    if h.domain != g.codomain or h.codomain != g.domain:
        raise DomainMismatch("the second injection must map the codomain of the first back to its domain")
    outcome = sb_bijection(g.mapping, h.mapping, g.domain.points(), g.codomain.points())
    return {"is_bijection": outcome.is_bijection, "sb": outcome}, len(g.domain)


def _whyte_for_chain(args, loader) -> Outcome:
    a = loader.chain(args.chain)
    if args.falsify is not None:
        witness = whyte_falsify(a, args.t, args.falsify, budget=args.budget, seed=args.seed, component=args.component)
        return {"constant": args.falsify, "refuted": witness is not None, "witness": witness}, len(a.ambient)
    return whyte_check_exact(a, args.t, args.component, cap=args.exact_cap), len(a.ambient)


def cmd_whyte_check(args, loader) -> Outcome:
    if args.map is None:
        if args.chain is None:
            raise InvalidParameter("whyte-check needs a chain file or --map")
        return _whyte_for_chain(args, loader)
    f = loader.map(args.map)
    Z = loader.points(args.z) if args.z else sorted(build_target_set(f, args.n0))
    result: Dict[str, Any] = {
        "Z": Z,
        "obstruction": injectivity_obstruction(f, Z, args.t, args.component, cap=args.exact_cap),
    }
    if args.k is not None and args.h is not None:
        result["threshold"] = whyte_threshold(args.k, args.h, f.fiber_bound)
    return result, f.truncation


def cmd_fill_chain(args, loader) -> Outcome:
    a = loader.chain(args.chain)
    return fill_chain(a, args.t), len(a.ambient)


def cmd_stack(args, loader) -> Outcome:
    space = loader.space(args.space)
    union = space.union
    checks = []
    for component in union.components:
        stacked = k_stack(component, args.k)
        checks.append(verify_stacking(component, stacked.metric, args.k))
    return {"space": space_to_doc(stack_union(union, args.k)), "stacking": checks}, len(union)


def cmd_double(args, loader) -> Outcome:
    space = loader.space(args.space)
    double = bipartite_double(space.graph(args.component))
    result: Dict[str, Any] = {
        "graph": double.graph,
        "left": double.left,
        "right": double.right,
        "max_degree": double.graph.max_degree,
    }
    if args.expansion:
        result["bipartite_h"] = bipartite_expansion_exact(double.graph, double.left, double.right, cap=args.exact_cap)
        # equals the half-restricted statistic of the base, not its h_star
        base = cheeger_exact(space.graph(args.component), cap=args.exact_cap)
        result["base_h_star"] = base.h_star
        result["base_h_half"] = base.h_half
    return result, len(space.union)


def cmd_unstack(args, loader) -> Outcome:
    fbar = loader.map(args.map)
    domain = loader.space(args.base_domain).union
    codomain = loader.space(args.base_codomain).union
    g = unstack_map(fbar, domain, codomain, args.k)
    return {"map": map_to_doc(g), "moduli": g.moduli}, g.truncation


def cmd_generate(args, loader) -> Outcome:
    sequence = expander_sequence(args.sizes, args.k, args.seed, cap=args.exact_cap, budget=args.budget)
    result = {
        "space": space_to_doc(sequence.union, sequence.graphs),
        "certificates": sequence.certificates,
        "count": sequence.count,
        "min_h": sequence.min_h,
    }
    return result, sequence.count


COMMANDS: Dict[str, Callable] = {
    "verify-space": cmd_verify_space,
    "cheeger": cmd_cheeger,
    "verify-expander": cmd_verify_expander,
    "profile": cmd_profile,
    "analyze-map": cmd_analyze_map,
    "injectivize": cmd_injectivize,
    "check-injective": cmd_check_injective,
    "check-bijective": cmd_check_bijective,
    "bijectivize": cmd_bijectivize,
    "bijectivize-sb": cmd_bijectivize_sb,
    "sb": cmd_sb,
    "whyte-check": cmd_whyte_check,
    "fill-chain": cmd_fill_chain,
    "stack": cmd_stack,
    "double": cmd_double,
    "unstack": cmd_unstack,
    "generate": cmd_generate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coarsekit", description="Coarse geometry on finite truncations.")
    parser.add_argument("--exact-cap", type=int, default=None, help="override COARSEKIT_EXACT_CAP")
    # accepted after the subcommand too; SUPPRESS keeps a value given before it
    common = _Parser(add_help=False)
    common.add_argument("--exact-cap", type=int, default=argparse.SUPPRESS, help="override COARSEKIT_EXACT_CAP")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, *paths, seeded=False):
        p = sub.add_parser(name, parents=[common])
        for path in paths:
            p.add_argument(path)
        if seeded:
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        return p

    command("verify-space", "space")
    command("cheeger", "space").add_argument("--component", type=int, default=0)
    p = command("verify-expander", "space", seeded=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--h", type=_rational, required=True)
    p.add_argument("--mode", choices=["exact", "auto"], default="exact")
    p.add_argument("--component", type=int, default=0)
    p = command("profile", "space")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--component", type=int, default=0)
    p = command("analyze-map", "map")
    p.add_argument("--inverse", default=None)
    p.add_argument("--radius", type=int, default=None)
    p = command("injectivize", "map")
    p.add_argument("--variant", choices=["selection", "ball"], default="selection")
    p.add_argument("--r", type=int, default=None)
    command("check-injective", "map").add_argument("--construct", action="store_true")
    command("check-bijective", "map")
    command("bijectivize", "map")
    command("bijectivize-sb", "map", "inverse")
    command("sb", "first", "second")
    p = command("whyte-check", seeded=True)
    p.add_argument("chain", nargs="?", default=None)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--component", type=int, default=0)
    p.add_argument("--falsify", type=_rational, default=None, help="search for a set refuting this constant")
    p.add_argument("--map", default=None)
    p.add_argument("--z", default=None, help="JSON list of [comp, pt] target points")
    p.add_argument("--n0", type=int, default=0)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--h", type=_rational, default=None)
    command("fill-chain", "chain").add_argument("--t", type=int, default=1)
    command("stack", "space").add_argument("--k", type=int, default=2)
    p = command("double", "space")
    p.add_argument("--component", type=int, default=0)
    p.add_argument("--expansion", action="store_true")
    p = command("unstack", "map")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--base-domain", required=True)
    p.add_argument("--base-codomain", required=True)
    p = command("generate", seeded=True)
    p.add_argument("--sizes", type=_sizes, required=True)
    p.add_argument("--k", type=int, default=3)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse, dispatch, print one JSON document; return the exit code."""
    loader = DocumentLoader()
    try:
        args = build_parser().parse_args(argv)
        cap = config.exact_cap(args.exact_cap)
        result, truncation = COMMANDS[args.command](args, loader)
        options = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "exact_cap")}
        manifest = RunManifest(
            command=args.command,
            inputs=dict(sorted(loader.hashes.items())),
            seed=options.pop("seed", None),
            exact_cap=cap,
            truncation=truncation,
            options={k: _option(v) for k, v in options.items()},
        )
        print(render(manifest, result))
        return 0
    except (CoarseKitError, OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        log.info("[cli] input error: %s", exc)
        print(render_error(exc))
        return 2


def _option(value: Any) -> Any:
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    return value


def main() -> None:
    config.configure_logging()
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
