"""Threat-modeling engine for C-ITS deployments.

Loads a typed environment model (OBUs, RSUs, devices, networks, roads), a
tactic/technique/CVE knowledge base and attack-step definitions, validates
attack scenarios step by step and searches for attack paths, exporting the
result as an attack graph.
"""

from citsgraph.bundled import bundled_environment, bundled_kb, bundled_scenario
from citsgraph.env import (
    Environment,
    can_communicate,
    parse_environment,
    serialize_environment,
    shared_protocols,
    validate_environment,
)
from citsgraph.errors import CitsGraphError, ConditionError, ParseError, UnknownIdError
from citsgraph.kb import (
    KnowledgeBase,
    applicable_cves,
    cves_for_target,
    load_kb,
    techniques_for_tactic,
)
from citsgraph.planner import PlanQuery, export_graph, import_graph, plan
from citsgraph.scenario import (
    AttackScenario,
    AttackStep,
    load_scenario,
    step_applicable,
    validate_scenario,
)
from citsgraph.state import (
    Condition,
    Effect,
    WorldState,
    apply_effects,
    eval_condition,
    state_diff,
)

__all__ = [
    "AttackScenario",
    "AttackStep",
    "CitsGraphError",
    "Condition",
    "ConditionError",
    "Effect",
    "Environment",
    "KnowledgeBase",
    "ParseError",
    "PlanQuery",
    "UnknownIdError",
    "WorldState",
    "applicable_cves",
    "apply_effects",
    "bundled_environment",
    "bundled_kb",
    "bundled_scenario",
    "can_communicate",
    "cves_for_target",
    "eval_condition",
    "export_graph",
    "import_graph",
    "load_kb",
    "load_scenario",
    "parse_environment",
    "plan",
    "serialize_environment",
    "shared_protocols",
    "state_diff",
    "step_applicable",
    "techniques_for_tactic",
    "validate_environment",
    "validate_scenario",
]

__version__ = "0.1.0"
