"""Command-line interface: instance files in, JSON reports out.

Instance files are JSON documents::

    {
      "nodes": 2,
      "edges": [{"id": "e0", "from": 0, "to": 0}, ...],
      "potential": {"e0": "1", "e1": "0", "e2": "3"},
      "blocks": {"0,1": "1/2", ...},     # optional, for `recode`
      "k": 3                              # required with "blocks"
    }

Rationals are ``"p/q"`` strings.  Every subcommand prints a JSON object
with deterministic key order.  Exit codes: 0 success, 1 usage or input
errors, 2 property violations (a failed check that would falsify one of
the verified theorems).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import convexity, typicality, verify
from .core import (
    Graph,
    Potential,
    build_graph,
    format_rational,
    higher_block_recode,
    parse_rational,
)
from .errors import ErgoptError, MalformedEdge, NoCycle, ParseError, ValidationError
from .optimize import beta, critical_graph, is_unique, second_gap

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2


@dataclass(frozen=True)
class Instance:
    """A parsed instance file: graph, optional potential, optional blocks."""

    graph: Graph
    potential: Potential | None
    blocks: dict[tuple[int, ...], Fraction] | None
    k: int | None


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep usage failures on exit code 1
        raise _UsageError(message)


def parse_instance(path: str) -> Instance:
    """Parse and validate an instance file.

    Raises
    ------
    ParseError
        On malformed JSON or malformed rational literals.
    ValidationError
        On structural problems: missing keys, unknown or missing edge
        weights, acyclic graphs, bad node counts.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("instance file must hold a JSON object")
    if not isinstance(data.get("nodes"), int):
        raise ValidationError("'nodes' must be an integer")
    raw_edges = data.get("edges")
    if not isinstance(raw_edges, list) or not raw_edges:
        raise ValidationError("'edges' must be a non-empty list")
    triples = []
    for entry in raw_edges:
        if not isinstance(entry, dict) or not {"id", "from", "to"} <= entry.keys():
            raise ValidationError(f"edge entry {entry!r} needs id/from/to")
        if not isinstance(entry["from"], int) or not isinstance(entry["to"], int):
            raise ValidationError(f"edge {entry.get('id')!r}: endpoints must be ints")
        triples.append((str(entry["id"]), entry["from"], entry["to"]))
    try:
        graph = build_graph(data["nodes"], triples)
    except (MalformedEdge, NoCycle) as exc:
        raise ValidationError(str(exc)) from exc

    potential = None
    if "potential" in data:
        table = data["potential"]
        if not isinstance(table, dict):
            raise ValidationError("'potential' must map edge ids to rationals")
        ids = [e.id for e in graph.edges]
        missing = [i for i in ids if i not in table]
        if missing:
            raise ValidationError(f"potential omits edge {missing[0]!r}")
        unknown = [i for i in table if i not in set(ids)]
        if unknown:
            raise ValidationError(f"potential names unknown edge {unknown[0]!r}")
        potential = Potential(tuple(parse_rational(table[i]) for i in ids))

    blocks = None
    k = None
    if "blocks" in data:
        if not isinstance(data.get("k"), int):
            raise ValidationError("'k' (an integer >= 2) is required with 'blocks'")
        k = data["k"]
        blocks = {}
        for key, value in data["blocks"].items():
            try:
                indices = tuple(graph.edge_index(part) for part in key.split(","))
            except KeyError as exc:
                raise ValidationError(f"block {key!r} names an unknown edge") from exc
            blocks[indices] = parse_rational(value)
    elif "k" in data:
        raise ValidationError("'k' given without 'blocks'")
    if potential is None and blocks is None:
        raise ValidationError("instance needs a 'potential' or a block table")
    return Instance(graph, potential, blocks, k)


def _require_potential(instance: Instance) -> Potential:
    if instance.potential is None:
        raise ValidationError("this command needs a 'potential' in the instance")
    return instance.potential


def _load_direction(path: str, graph: Graph) -> Potential:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("direction file must map edge ids to rationals")
    ids = [e.id for e in graph.edges]
    missing = [i for i in ids if i not in data]
    if missing:
        raise ValidationError(f"direction omits edge {missing[0]!r}")
    return Potential(tuple(parse_rational(data[i]) for i in ids))


def _measure_json(graph: Graph, frequencies) -> dict:
    return {
        e.id: format_rational(v) for e, v in zip(graph.edges, frequencies)
    }


def _instance_json(graph: Graph, potential: Potential) -> dict:
    return {
        "nodes": graph.node_count,
        "edges": [
            {"id": e.id, "from": e.src, "to": e.dst} for e in graph.edges
        ],
        "potential": {
            e.id: format_rational(w) for e, w in zip(graph.edges, potential.weights)
        },
    }


def _build_parser() -> _Parser:
    parser = _Parser(prog="ergopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("instance", help="instance JSON file")
        p.add_argument("--format", choices=["json"], default="json")
        return p

    add("beta", "maximum ergodic average")
    add("critical", "critical graph supporting all maximizing measures")
    add("unique", "decide uniqueness of the maximizing measure")

    p = add("derivative", "one-sided directional derivatives")
    p.add_argument("--dir", required=True, help="direction potential file")

    p = add("sandwich", "difference-quotient sandwich check")
    p.add_argument("--dir", required=True, help="direction potential file")
    p.add_argument("--tau", default="1", help="positive rational step")

    add("witness", "lower semic-continuity failure witness (non-unique inputs)")
    add("hyperplanes", "cycle-measure difference hyperplane arrangement")
    add("covering", "hyperplane covering check for this potential")

    p = add("montecarlo", "random-potential uniqueness experiment")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound", type=int, default=2**30)

    p = add("perturb", "perturb to a unique maximizing measure")
    p.add_argument("--eps", default="1/10", help="positive rational radius")
    p.add_argument("--seed", type=int, default=0)

    p = add("usc", "critical-set stability under small perturbations")
    p.add_argument("--delta", required=True, help="positive rational radius")
    p.add_argument("--trials", type=int, default=100, help="sample count")
    p.add_argument("--seed", type=int, default=0)

    p = add("recode", "higher-block recoding of a block-table instance")
    p.add_argument("--k", type=int, default=None, help="override block length")

    p = add("verify", "run the full invariant suite on the instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100, help="samples per probe")

    return parser


def _dispatch(args) -> tuple[dict, int]:
    instance = parse_instance(args.instance)
    graph = instance.graph

    if args.command == "beta":
        f = _require_potential(instance)
        return {"beta": format_rational(beta(graph, f))}, EXIT_OK

    if args.command == "critical":
        f = _require_potential(instance)
        cg = critical_graph(graph, f)
        return {
            "beta": format_rational(cg.beta_value),
            "edges": [graph.edges[i].id for i in sorted(cg.edge_set)],
        }, EXIT_OK

    if args.command == "unique":
        f = _require_potential(instance)
        return {
            "unique": is_unique(graph, f),
            "beta": format_rational(beta(graph, f)),
        }, EXIT_OK

    if args.command == "derivative":
        f = _require_potential(instance)
        g = _load_direction(args.dir, graph)
        left = convexity.directional_derivative(graph, f, g, "left")
        right = convexity.directional_derivative(graph, f, g, "right")
        return {
            "left": format_rational(left),
            "right": format_rational(right),
            "two_sided": left == right,
        }, EXIT_OK

    if args.command == "sandwich":
        f = _require_potential(instance)
        g = _load_direction(args.dir, graph)
        tau = parse_rational(args.tau)
        holds = convexity.sandwich_check(graph, f, g, tau)
        return {"holds": holds}, EXIT_OK if holds else EXIT_VIOLATION

    if args.command == "witness":
        f = _require_potential(instance)
        g, excluded = convexity.witness_discontinuity(graph, f)
        return {
            "direction": {
                e.id: format_rational(w) for e, w in zip(graph.edges, g.weights)
            },
            "excluded_cycle": [graph.edges[i].id for i in excluded.cycle],
            "excluded_measure": _measure_json(graph, excluded.measure.frequencies),
        }, EXIT_OK

    if args.command == "hyperplanes":
        planes = typicality.build_hyperplanes(graph)
        return {
            "count": len(planes),
            "normals": [[str(c) for c in p.normal] for p in planes],
        }, EXIT_OK

    if args.command == "covering":
        f = _require_potential(instance)
        ok = typicality.covering_check(graph, f)
        return {
            "covering": ok,
            "unique": is_unique(graph, f),
        }, EXIT_OK if ok else EXIT_VIOLATION

    if args.command == "montecarlo":
        report = typicality.monte_carlo(graph, args.trials, args.seed, args.bound)
        code = EXIT_OK if report.covering_violations == 0 else EXIT_VIOLATION
        return report.to_json_dict(), code

    if args.command == "perturb":
        f = _require_potential(instance)
        eps = parse_rational(args.eps)
        result = typicality.perturb_to_unique(graph, f, eps, args.seed)
        return {
            "potential": {
                e.id: format_rational(w)
                for e, w in zip(graph.edges, result.potential.weights)
            },
            "retries": result.retries,
        }, EXIT_OK

    if args.command == "usc":
        f = _require_potential(instance)
        delta = parse_rational(args.delta)
        gap = second_gap(graph, f)
        holds = typicality.usc_inclusion_check(
            graph, f, delta, args.trials, args.seed
        )
        return {
            "holds": holds,
            "gap": format_rational(gap),
            "delta": format_rational(delta),
            "samples": args.trials,
        }, EXIT_OK if holds else EXIT_VIOLATION

    if args.command == "recode":
        if instance.blocks is None:
            raise ValidationError("instance has no block table to recode")
        k = args.k if args.k is not None else instance.k
        recoded, weights = higher_block_recode(graph, instance.blocks, k)
        return _instance_json(recoded, weights), EXIT_OK

    if args.command == "verify":
        f = _require_potential(instance)
        checks = verify.run_invariant_suite(
            graph, f, seed=args.seed, samples=args.trials
        )
        all_ok = all(c.ok for c in checks)
        return {
            "all_ok": all_ok,
            "checks": [
                {"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks
            ],
        }, EXIT_OK if all_ok else EXIT_VIOLATION

    raise _UsageError(f"unknown command {args.command!r}")


def run(argv: list[str]) -> int:
    """Execute one CLI invocation; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        payload, code = _dispatch(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ErgoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    print(json.dumps(payload, indent=2))
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))
