"""Loaders for the example data shipped with the package."""

from __future__ import annotations

from importlib import resources

from citsgraph.env import Environment, parse_environment
from citsgraph.kb import KnowledgeBase, load_kb
from citsgraph.scenario import AttackScenario, load_scenario


def _read(name: str) -> bytes:
    return resources.files("citsgraph.data").joinpath(name).read_bytes()


def bundled_environment_bytes() -> bytes:
    return _read("environment.json")


def bundled_kb_bytes() -> bytes:
    return _read("knowledge_base.json")


def bundled_scenario_bytes() -> bytes:
    return _read("scenario.json")


def bundled_environment() -> Environment:
    return parse_environment(bundled_environment_bytes())


def bundled_kb() -> KnowledgeBase:
    return load_kb(bundled_kb_bytes())


def bundled_scenario(kb: KnowledgeBase | None = None) -> AttackScenario:
    return load_scenario(bundled_scenario_bytes(), kb or bundled_kb())
