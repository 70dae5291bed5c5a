"""Attack steps and scenarios: loading, applicability checks, execution.

A scenario file is a UTF-8 JSON object
``{scenario_id, overview, steps: [...]}`` where each step carries its TTP
tags (tactic, technique, CVE list), an actor and target entity, the
pre-condition list, a free-text command and the effect list.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from citsgraph.errors import ParseError
from citsgraph.kb import KnowledgeBase, Requirement
from citsgraph.state import (
    Condition,
    Effect,
    EvalResult,
    StateDiff,
    WorldState,
    apply_effects,
    condition_from_json,
    condition_to_json,
    effect_from_json,
    effect_to_json,
    eval_condition,
    state_diff,
)


@dataclass(frozen=True)
class AttackStep:
    step_id: str
    name: str
    tactic_id: str
    technique_id: str
    cve_ids: tuple[str, ...]
    actor: str
    target: str
    pre_conditions: tuple[Condition, ...]
    command: str
    effects: tuple[Effect, ...]


@dataclass(frozen=True)
class AttackScenario:
    scenario_id: str
    overview: str
    steps: tuple[AttackStep, ...]


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one applicability check of a step."""

    source: str  # "pre" | "cve"
    description: str
    ok: bool
    explanation: str


@dataclass(frozen=True)
class StepRecord:
    step_id: str
    name: str
    tactic: str
    technique: str
    cve_ids: tuple[str, ...]
    checks: tuple[CheckResult, ...]
    applied: bool
    diff: StateDiff | None


@dataclass(frozen=True)
class ScenarioTrace:
    records: tuple[StepRecord, ...]
    valid: bool
    failed_step: str | None
    failed_check: str | None
    final_state: WorldState

    def verdict(self) -> str:
        if self.valid:
            return "valid"
        return f"failed-at({self.failed_step}, {self.failed_check})"


def load_scenario(document: bytes | str, kb: KnowledgeBase) -> AttackScenario:
    """Parse a scenario file and resolve every TTP reference against the kb."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise ParseError("top level: expected an object")
    for key in ("scenario_id", "overview", "steps"):
        if key not in raw:
            raise ParseError(f"top level: missing required key {key!r}")
    if not isinstance(raw["steps"], list) or not raw["steps"]:
        raise ParseError("steps: expected a non-empty array")

    steps = []
    for i, obj in enumerate(raw["steps"]):
        where = f"steps[{i}]"
        if not isinstance(obj, dict):
            raise ParseError(f"{where}: expected an object")
        for key in ("step_id", "name", "tactic", "technique", "cves", "actor",
                    "target", "pre", "command", "effects"):
            if key not in obj:
                raise ParseError(f"{where}: missing required key {key!r}")
        step_id = obj["step_id"]
        try:
            tactic = kb.tactic(obj["tactic"])
            technique = kb.technique(obj["technique"])
            for cve_id in obj["cves"]:
                kb.cve(cve_id)
        except Exception as exc:
            raise ParseError(f"step {step_id!r}: {exc}") from exc
        if technique.tactic_id != tactic.tactic_id:
            raise ParseError(
                f"step {step_id!r}: technique {technique.name!r} does not belong "
                f"to tactic {tactic.name!r}"
            )
        steps.append(
            AttackStep(
                step_id=step_id,
                name=obj["name"],
                tactic_id=tactic.tactic_id,
                technique_id=technique.technique_id,
                cve_ids=tuple(obj["cves"]),
                actor=obj["actor"],
                target=obj["target"],
                pre_conditions=tuple(condition_from_json(c) for c in obj["pre"]),
                command=obj["command"],
                effects=tuple(effect_from_json(e) for e in obj["effects"]),
            )
        )
    step_ids = [s.step_id for s in steps]
    if len(set(step_ids)) != len(step_ids):
        raise ParseError("duplicate step_id in scenario")
    return AttackScenario(
        scenario_id=raw["scenario_id"],
        overview=raw["overview"],
        steps=tuple(steps),
    )


def serialize_scenario(scenario: AttackScenario, kb: KnowledgeBase) -> bytes:
    doc = {
        "scenario_id": scenario.scenario_id,
        "overview": scenario.overview,
        "steps": [
            {
                "step_id": s.step_id,
                "name": s.name,
                "tactic": kb.tactic(s.tactic_id).name,
                "technique": kb.technique(s.technique_id).name,
                "cves": list(s.cve_ids),
                "actor": s.actor,
                "target": s.target,
                "pre": [condition_to_json(c) for c in s.pre_conditions],
                "command": s.command,
                "effects": [effect_to_json(e) for e in s.effects],
            }
            for s in scenario.steps
        ],
    }
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def _cve_checks(step: AttackStep, kb: KnowledgeBase, state: WorldState) -> list[CheckResult]:
    """Check each listed CVE against the participant matching its class.

    OBU-class CVEs exploited from the attacker's own vehicle sit on the
    actor side; RSU-class ones on the target side, so the check binds to
    whichever participant has the CVE's target class (target first).
    """
    checks = []
    for cve_id in step.cve_ids:
        record = kb.cve(cve_id)
        entity_id = None
        for candidate in (step.target, step.actor):
            if state.env.kind_of(candidate) == record.target_class:
                entity_id = candidate
                break
        if entity_id is None:
            checks.append(
                CheckResult(
                    "cve",
                    cve_id,
                    False,
                    f"{cve_id} targets {record.target_class}, but neither "
                    f"{step.actor} nor {step.target} is one",
                )
            )
            continue
        entity = state.env.entity(entity_id)
        failed: Requirement | None = None
        for req in record.applicability:
            if not req.matches(entity.system_env, entity.description):
                failed = req
                break
        if failed is None:
            checks.append(CheckResult("cve", cve_id, True, f"{cve_id} applies to {entity_id}"))
        elif failed.kind == "system_env":
            checks.append(
                CheckResult(
                    "cve",
                    cve_id,
                    False,
                    f"{cve_id} does not apply to {entity_id}: system env lacks "
                    f"{failed.token!r}",
                )
            )
        else:
            checks.append(
                CheckResult(
                    "cve",
                    cve_id,
                    False,
                    f"{cve_id} does not apply to {entity_id}: description "
                    f"{entity.description!r} matches none of {list(failed.patterns)}",
                )
            )
    return checks


def _step_checks(step: AttackStep, kb: KnowledgeBase, state: WorldState) -> list[CheckResult]:
    checks = [
        CheckResult("pre", cond.describe(), *_unpack(eval_condition(state, cond)))
        for cond in step.pre_conditions
    ]
    checks.extend(_cve_checks(step, kb, state))
    return checks


def _unpack(result: EvalResult):
    return result.ok, result.explanation


def step_applicable(step: AttackStep, kb: KnowledgeBase, state: WorldState) -> EvalResult:
    """True iff every pre-condition holds and every listed CVE applies."""
    state.env.lookup(step.actor)
    state.env.lookup(step.target)
    for check in _step_checks(step, kb, state):
        if not check.ok:
            return EvalResult(False, f"{check.description}: {check.explanation}")
    return EvalResult(True, "all pre-conditions hold and all CVEs apply")


def validate_scenario(
    scenario: AttackScenario, kb: KnowledgeBase, initial: WorldState
) -> ScenarioTrace:
    """Fold the world state through the steps in order.

    A step executes iff all its checks pass; the first failure stops
    execution and the trace ends at the failing step.
    """
    for step in scenario.steps:
        initial.env.lookup(step.actor)
        initial.env.lookup(step.target)
        kb.tactic(step.tactic_id)
        kb.technique(step.technique_id)
        for cve_id in step.cve_ids:
            kb.cve(cve_id)

    state = initial
    records: list[StepRecord] = []
    for step in scenario.steps:
        checks = tuple(_step_checks(step, kb, state))
        tactic = kb.tactic(step.tactic_id).name
        technique = kb.technique(step.technique_id).name
        failing = next((c for c in checks if not c.ok), None)
        if failing is not None:
            records.append(
                StepRecord(
                    step_id=step.step_id,
                    name=step.name,
                    tactic=tactic,
                    technique=technique,
                    cve_ids=step.cve_ids,
                    checks=checks,
                    applied=False,
                    diff=None,
                )
            )
            return ScenarioTrace(
                records=tuple(records),
                valid=False,
                failed_step=step.step_id,
                failed_check=failing.description,
                final_state=state,
            )
        new_state = apply_effects(state, step.effects)
        records.append(
            StepRecord(
                step_id=step.step_id,
                name=step.name,
                tactic=tactic,
                technique=technique,
                cve_ids=step.cve_ids,
                checks=checks,
                applied=True,
                diff=state_diff(state, new_state),
            )
        )
        state = new_state

    return ScenarioTrace(
        records=tuple(records),
        valid=True,
        failed_step=None,
        failed_check=None,
        final_state=state,
    )


def render_trace(trace: ScenarioTrace) -> str:
    """Human-readable per-step report with TTP tags."""
    lines = []
    for record in trace.records:
        tags = f"{record.tactic} / {record.technique}"
        if record.cve_ids:
            tags += " / " + ", ".join(record.cve_ids)
        status = "ok" if record.applied else "FAILED"
        lines.append(f"[{status}] {record.step_id} ({tags}): {record.name}")
        for check in record.checks:
            mark = "+" if check.ok else "-"
            lines.append(f"    {mark} {check.description}: {check.explanation}")
        if record.diff is not None:
            lines.append(f"    => {record.diff.summary()}")
    lines.append(f"verdict: {trace.verdict()}")
    return "\n".join(lines)
