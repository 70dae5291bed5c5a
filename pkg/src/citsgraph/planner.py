"""Forward search over attack steps, producing minimal paths and a graph.

Nodes are canonical world states; edges are applicable attack steps
labeled with their TTP tags.  Search is breadth-first with state
deduplication, stops at the first depth where the goal is reached, and
returns every minimal-length step sequence to a goal state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from citsgraph.errors import ParseError
from citsgraph.kb import KnowledgeBase
from citsgraph.scenario import AttackStep, step_applicable
from citsgraph.state import Condition, WorldState, apply_effects, eval_condition, state_diff


@dataclass(frozen=True)
class PlanQuery:
    initial: WorldState
    library: tuple[AttackStep, ...]
    goal: Condition
    max_depth: int = 8
    max_paths: int = 100

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.max_paths < 1:
            raise ValueError("max_paths must be >= 1")
        step_ids = [s.step_id for s in self.library]
        if len(set(step_ids)) != len(step_ids):
            raise ValueError("library step_ids must be unique")


@dataclass(frozen=True)
class GraphNode:
    index: int
    key: tuple  # canonical state key (nested tuples)
    label: str  # diff summary relative to the initial state
    initial: bool
    goal: bool


@dataclass(frozen=True)
class GraphEdge:
    src: int
    dst: int
    step_id: str
    tactic: str
    technique: str
    cves: tuple[str, ...]


@dataclass(frozen=True)
class AttackGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]

    @property
    def goal_nodes(self) -> tuple[GraphNode, ...]:
        return tuple(n for n in self.nodes if n.goal)


@dataclass(frozen=True)
class PlanResult:
    graph: AttackGraph
    paths: tuple[tuple[str, ...], ...]
    saturated: bool  # budget or frontier exhausted without reaching the goal


def plan(query: PlanQuery, kb: KnowledgeBase) -> PlanResult:
    """Breadth-first expansion of the step library from the initial state."""
    initial = query.initial
    library = sorted(query.library, key=lambda s: s.step_id)

    goal_at_start = eval_condition(initial, query.goal).ok
    init_key = initial.canonical_key()

    node_index: dict[tuple, int] = {init_key: 0}
    nodes = [
        GraphNode(index=0, key=init_key, label="initial", initial=True, goal=goal_at_start)
    ]
    edges: list[GraphEdge] = []
    goal_flags = {0: goal_at_start}

    if goal_at_start:
        return PlanResult(
            graph=_build_graph(nodes, edges, goal_flags),
            paths=((),),
            saturated=False,
        )

    # frontier entries: state key -> (state, node index, list of step-id paths)
    frontier: dict[tuple, tuple[WorldState, int, list[tuple[str, ...]]]] = {
        init_key: (initial, 0, [()])
    }
    depth_of: dict[tuple, int] = {init_key: 0}
    goal_paths: list[tuple[str, ...]] = []

    for depth in range(1, query.max_depth + 1):
        next_frontier: dict[tuple, tuple[WorldState, int, list[tuple[str, ...]]]] = {}
        for _key, (state, src_index, paths) in frontier.items():
            for step in library:
                if not step_applicable(step, kb, state).ok:
                    continue
                successor = apply_effects(state, step.effects)
                succ_key = successor.canonical_key()
                if succ_key == state.canonical_key():
                    continue  # no-op transition, pruned
                seen_depth = depth_of.get(succ_key)
                if seen_depth is not None and seen_depth < depth:
                    # already reachable faster; record the edge, skip expansion
                    edges.append(_edge(src_index, node_index[succ_key], step, kb))
                    continue
                if succ_key not in node_index:
                    node_index[succ_key] = len(nodes)
                    nodes.append(
                        GraphNode(
                            index=len(nodes),
                            key=succ_key,
                            label=state_diff(initial, successor).summary(),
                            initial=False,
                            goal=False,
                        )
                    )
                    depth_of[succ_key] = depth
                dst_index = node_index[succ_key]
                edge = _edge(src_index, dst_index, step, kb)
                if edge not in edges:
                    edges.append(edge)
                new_paths = [path + (step.step_id,) for path in paths]
                if eval_condition(successor, query.goal).ok:
                    goal_flags[dst_index] = True
                    goal_paths.extend(new_paths)
                elif succ_key in next_frontier:
                    next_frontier[succ_key][2].extend(new_paths)
                else:
                    next_frontier[succ_key] = (successor, dst_index, new_paths)
        if goal_paths:
            paths = tuple(sorted(set(goal_paths)))[: query.max_paths]
            return PlanResult(
                graph=_build_graph(nodes, edges, goal_flags),
                paths=paths,
                saturated=False,
            )
        if not next_frontier:
            break
        frontier = next_frontier

    return PlanResult(
        graph=_build_graph(nodes, edges, goal_flags),
        paths=(),
        saturated=True,
    )


def _edge(src: int, dst: int, step: AttackStep, kb: KnowledgeBase) -> GraphEdge:
    return GraphEdge(
        src=src,
        dst=dst,
        step_id=step.step_id,
        tactic=kb.tactic(step.tactic_id).name,
        technique=kb.technique(step.technique_id).name,
        cves=step.cve_ids,
    )


def _build_graph(nodes, edges, goal_flags) -> AttackGraph:
    final_nodes = tuple(
        GraphNode(n.index, n.key, n.label, n.initial, goal_flags.get(n.index, False))
        for n in nodes
    )
    ordered = tuple(sorted(edges, key=lambda e: (e.src, e.dst, e.step_id)))
    return AttackGraph(nodes=final_nodes, edges=ordered)


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_graph(graph: AttackGraph, fmt: str) -> bytes:
    """Render the graph as DOT or JSON; byte-deterministic for a fixed graph."""
    if fmt == "dot":
        lines = ["digraph attack_graph {", "  rankdir=LR;"]
        for node in graph.nodes:
            attrs = [f"label={_dot_quote(node.label)}"]
            if node.initial:
                attrs.append("shape=box")
            if node.goal:
                attrs.append("peripheries=2")
            lines.append(f"  s{node.index} [{', '.join(attrs)}];")
        for edge in graph.edges:
            label = f"{edge.tactic} / {edge.technique}"
            lines.append(f"  s{edge.src} -> s{edge.dst} [label={_dot_quote(label)}];")
        lines.append("}")
        return ("\n".join(lines) + "\n").encode("utf-8")
    if fmt == "json":
        doc = {
            "nodes": [
                {
                    "index": n.index,
                    "key": _jsonable(n.key),
                    "label": n.label,
                    "initial": n.initial,
                    "goal": n.goal,
                }
                for n in graph.nodes
            ],
            "edges": [
                {
                    "src": e.src,
                    "dst": e.dst,
                    "step_id": e.step_id,
                    "tactic": e.tactic,
                    "technique": e.technique,
                    "cves": list(e.cves),
                }
                for e in graph.edges
            ],
        }
        return (json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n").encode(
            "utf-8"
        )
    raise ValueError(f"unknown export format {fmt!r}")


def import_graph(document: bytes | str) -> AttackGraph:
    """Inverse of the JSON export; round-trips to an equal graph."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict) or "nodes" not in raw or "edges" not in raw:
        raise ParseError("graph document must carry 'nodes' and 'edges'")
    nodes = tuple(
        GraphNode(
            index=n["index"],
            key=_tupled(n["key"]),
            label=n["label"],
            initial=n["initial"],
            goal=n["goal"],
        )
        for n in raw["nodes"]
    )
    edges = tuple(
        GraphEdge(
            src=e["src"],
            dst=e["dst"],
            step_id=e["step_id"],
            tactic=e["tactic"],
            technique=e["technique"],
            cves=tuple(e["cves"]),
        )
        for e in raw["edges"]
    )
    return AttackGraph(nodes=nodes, edges=edges)


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    return value


def _tupled(value):
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value
