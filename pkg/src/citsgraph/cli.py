"""Command-line front end.

Subcommands: ``validate-env``, ``validate-scenario``, ``plan``, ``kb``.
Exit codes are a stable contract: 0 success, 1 domain failure (violations
or a failed scenario), 2 input error, 3 planner saturation (no path).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from citsgraph.env import parse_environment, validate_environment
from citsgraph.errors import CitsGraphError, ParseError
from citsgraph.kb import TARGET_CLASSES, cves_for_target, load_kb, techniques_for_tactic
from citsgraph.planner import PlanQuery, export_graph, plan
from citsgraph.scenario import load_scenario, render_trace, validate_scenario
from citsgraph.state import Condition, WorldState, condition_from_json

EXIT_OK = 0
EXIT_DOMAIN_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_SATURATED = 3


def _read_file(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def parse_goal(text: str) -> Condition:
    """Accept a JSON condition object or the shorthand ``kind:arg:arg``."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return condition_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"goal: invalid JSON: {exc.msg}") from exc
    parts = text.split(":")
    if len(parts) < 2:
        raise ParseError("goal: expected JSON object or 'kind:arg[:arg...]'")
    return Condition(kind=parts[0], args=tuple(parts[1:]))


def _cmd_validate_env(args) -> int:
    warnings: list[str] = []
    env = parse_environment(_read_file(args.env), strict=args.strict, warnings=warnings)
    for message in warnings:
        print(f"warning: {message}")
    report = validate_environment(env)
    for violation in report:
        print(f"{violation.level}: {violation.entity_id}.{violation.field}: {violation.message}")
    if report:
        return EXIT_DOMAIN_FAILURE
    print("environment valid")
    return EXIT_OK


def _load_triple(args):
    env = parse_environment(_read_file(args.env), strict=args.strict)
    kb = load_kb(_read_file(args.kb))
    return env, kb


def _cmd_validate_scenario(args) -> int:
    env, kb = _load_triple(args)
    scenario = load_scenario(_read_file(args.scenario), kb)
    trace = validate_scenario(scenario, kb, WorldState(env=env))
    print(render_trace(trace))
    return EXIT_OK if trace.valid else EXIT_DOMAIN_FAILURE


def _cmd_plan(args) -> int:
    env, kb = _load_triple(args)
    library = load_scenario(_read_file(args.library), kb).steps
    goal = parse_goal(args.goal)
    query = PlanQuery(
        initial=WorldState(env=env),
        library=library,
        goal=goal,
        max_depth=args.max_depth,
        max_paths=args.max_paths,
    )
    result = plan(query, kb)
    if args.format == "text":
        lines = [f"paths found: {len(result.paths)}"]
        for path in result.paths:
            lines.append("  " + (" -> ".join(path) if path else "(goal already satisfied)"))
        lines.append(
            f"graph: {len(result.graph.nodes)} node(s), {len(result.graph.edges)} edge(s)"
        )
        payload = ("\n".join(lines) + "\n").encode("utf-8")
    else:
        payload = export_graph(result.graph, args.format)
    if args.output:
        Path(args.output).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    if result.saturated and not result.paths:
        return EXIT_SATURATED
    return EXIT_OK


def _cmd_kb(args) -> int:
    kb = load_kb(_read_file(args.kb))
    if args.tactic:
        for technique in techniques_for_tactic(kb, args.tactic):
            print(f"{technique.technique_id}\t{technique.name}\t{technique.description}")
        return EXIT_OK
    if args.target:
        if args.target not in TARGET_CLASSES:
            raise ParseError(f"unknown target class {args.target!r}")
        for record in cves_for_target(kb, args.target):
            print(f"{record.cve_id}\t{record.target_class}\t{record.target_info}")
        return EXIT_OK
    print(f"tactics: {len(kb.tactics)}")
    print(f"techniques: {len(kb.techniques)}")
    print(f"cves: {len(kb.cves)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citsgraph",
        description="C-ITS threat modeling: validate environments and attack "
        "scenarios, search attack paths, export attack graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_env = sub.add_parser("validate-env", help="check an environment document")
    p_env.add_argument("--env", required=True)
    p_env.add_argument("--strict", action="store_true", help="reject unknown keys")
    p_env.set_defaults(func=_cmd_validate_env)

    p_scn = sub.add_parser("validate-scenario", help="execute a scenario step by step")
    p_scn.add_argument("--env", required=True)
    p_scn.add_argument("--kb", required=True)
    p_scn.add_argument("--scenario", required=True)
    p_scn.add_argument("--strict", action="store_true")
    p_scn.set_defaults(func=_cmd_validate_scenario)

    p_plan = sub.add_parser("plan", help="search attack paths toward a goal condition")
    p_plan.add_argument("--env", required=True)
    p_plan.add_argument("--kb", required=True)
    p_plan.add_argument("--library", required=True, help="scenario file used as step library")
    p_plan.add_argument("--goal", required=True, help="JSON condition or kind:arg[:arg...]")
    p_plan.add_argument("--format", choices=("dot", "json", "text"), default="dot")
    p_plan.add_argument("--max-depth", type=int, default=8)
    p_plan.add_argument("--max-paths", type=int, default=100)
    p_plan.add_argument("--output", help="write the export here instead of stdout")
    p_plan.add_argument("--strict", action="store_true")
    p_plan.set_defaults(func=_cmd_plan)

    p_kb = sub.add_parser("kb", help="list catalog contents")
    p_kb.add_argument("--kb", required=True)
    p_kb.add_argument("--tactic", help="list techniques of this tactic")
    p_kb.add_argument("--target", help="list CVEs of this target class")
    p_kb.set_defaults(func=_cmd_kb)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CitsGraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
