"""ATT&CK tactic/technique and CVE catalog.

The catalog file is a UTF-8 JSON object with keys ``tactics``,
``techniques`` and ``cves``.  Applicability of a CVE to an entity is
authored explicitly per record as a list of requirements, never inferred
from the CVE prose:

* ``{"kind": "system_env", "token": "USB"}`` — the entity's System_Env
  must contain the token (whole-token, case-sensitive).
* ``{"kind": "description", "patterns": ["BMW X", ...]}`` — the entity's
  Description must start with one of the patterns.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from citsgraph.env import Environment
from citsgraph.errors import ParseError, UnknownIdError

TARGET_CLASSES = ("Device", "OBU", "RSU")

_CVE_ID_RE = re.compile(r"^CVE-\d{4}-\d{4,}$")


@dataclass(frozen=True)
class Tactic:
    tactic_id: str
    name: str
    description: str


@dataclass(frozen=True)
class Technique:
    technique_id: str
    name: str
    tactic_id: str
    description: str


@dataclass(frozen=True)
class Requirement:
    """One applicability clause of a CVE record."""

    kind: str  # "system_env" | "description"
    token: str = ""
    patterns: tuple[str, ...] = ()

    def matches(self, system_env: tuple[str, ...], description: str) -> bool:
        if self.kind == "system_env":
            return self.token in system_env
        return any(description.startswith(p) for p in self.patterns)


@dataclass(frozen=True)
class CveRecord:
    cve_id: str
    description: str
    references: tuple[str, ...]
    assigning_cna: str
    date_created: str
    target_class: str
    target_info: str
    applicability: tuple[Requirement, ...]


@dataclass(frozen=True)
class KnowledgeBase:
    tactics: tuple[Tactic, ...]
    techniques: tuple[Technique, ...]
    cves: tuple[CveRecord, ...]

    def tactic(self, ref: str) -> Tactic:
        """Resolve a tactic by id (slug) or display name."""
        for tactic in self.tactics:
            if ref in (tactic.tactic_id, tactic.name):
                return tactic
        raise UnknownIdError(f"unknown tactic: {ref!r}")

    def technique(self, ref: str) -> Technique:
        for technique in self.techniques:
            if ref in (technique.technique_id, technique.name):
                return technique
        raise UnknownIdError(f"unknown technique: {ref!r}")

    def cve(self, cve_id: str) -> CveRecord:
        for record in self.cves:
            if record.cve_id == cve_id:
                return record
        raise UnknownIdError(f"unknown CVE: {cve_id!r}")


def slugify(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", name.lower()).strip("-")


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ParseError(f"{where}: missing required key {key!r}")
    return obj[key]


def _string(obj: dict, key: str, where: str) -> str:
    value = _require(obj, key, where)
    if not isinstance(value, str):
        raise ParseError(f"{where}: key {key!r} must be a string")
    return value


def _parse_requirement(obj, where: str) -> Requirement:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    kind = _string(obj, "kind", where)
    if kind == "system_env":
        return Requirement(kind="system_env", token=_string(obj, "token", where))
    if kind == "description":
        patterns = _require(obj, "patterns", where)
        if not isinstance(patterns, list) or not all(isinstance(p, str) for p in patterns):
            raise ParseError(f"{where}: 'patterns' must be an array of strings")
        return Requirement(kind="description", patterns=tuple(patterns))
    raise ParseError(f"{where}: unknown requirement kind {kind!r}")


def load_kb(document: bytes | str) -> KnowledgeBase:
    """Load and reference-check a catalog document."""
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
    for key in ("tactics", "techniques", "cves"):
        if key not in raw or not isinstance(raw[key], list):
            raise ParseError(f"top level: missing or non-array key {key!r}")

    tactics = []
    for i, obj in enumerate(raw["tactics"]):
        where = f"tactics[{i}]"
        tactics.append(
            Tactic(
                tactic_id=_string(obj, "id", where),
                name=_string(obj, "name", where),
                description=_string(obj, "description", where),
            )
        )
    tactic_ids = [t.tactic_id for t in tactics]
    if len(set(tactic_ids)) != len(tactic_ids):
        raise ParseError("duplicate tactic id in catalog")
    by_id = {t.tactic_id: t for t in tactics}
    by_name = {t.name: t for t in tactics}

    techniques = []
    for i, obj in enumerate(raw["techniques"]):
        where = f"techniques[{i}]"
        name = _string(obj, "name", where)
        tactic_ref = _string(obj, "tactic", where)
        tactic = by_id.get(tactic_ref) or by_name.get(tactic_ref)
        if tactic is None:
            raise ParseError(f"{where}: dangling tactic reference {tactic_ref!r}")
        techniques.append(
            Technique(
                technique_id=obj.get("id", slugify(name)),
                name=name,
                tactic_id=tactic.tactic_id,
                description=_string(obj, "description", where),
            )
        )
    pairs = [(t.tactic_id, t.name) for t in techniques]
    if len(set(pairs)) != len(pairs):
        raise ParseError("duplicate (tactic, technique name) pair in catalog")

    cves = []
    for i, obj in enumerate(raw["cves"]):
        where = f"cves[{i}]"
        cve_id = _string(obj, "id", where)
        if not _CVE_ID_RE.match(cve_id):
            raise ParseError(f"{where}: malformed CVE id {cve_id!r}")
        target_class = _string(obj, "target_class", where)
        if target_class not in TARGET_CLASSES:
            raise ParseError(f"{where}: invalid target class {target_class!r}")
        references = obj.get("references", [])
        if not isinstance(references, list) or not all(isinstance(r, str) for r in references):
            raise ParseError(f"{where}: 'references' must be an array of strings")
        applicability = obj.get("applicability", [])
        if not isinstance(applicability, list):
            raise ParseError(f"{where}: 'applicability' must be an array")
        cves.append(
            CveRecord(
                cve_id=cve_id,
                description=_string(obj, "description", where),
                references=tuple(references),
                assigning_cna=_string(obj, "assigning_cna", where),
                date_created=_string(obj, "date_created", where),
                target_class=target_class,
                target_info=_string(obj, "target_info", where),
                applicability=tuple(
                    _parse_requirement(req, f"{where}.applicability[{j}]")
                    for j, req in enumerate(applicability)
                ),
            )
        )
    cve_ids = [c.cve_id for c in cves]
    if len(set(cve_ids)) != len(cve_ids):
        raise ParseError("duplicate CVE id in catalog")

    return KnowledgeBase(tactics=tuple(tactics), techniques=tuple(techniques), cves=tuple(cves))


def techniques_for_tactic(kb: KnowledgeBase, tactic_ref: str) -> list[Technique]:
    """All techniques owned by the tactic, in catalog order."""
    tactic = kb.tactic(tactic_ref)
    return [t for t in kb.techniques if t.tactic_id == tactic.tactic_id]


def cves_for_target(kb: KnowledgeBase, target_class: str) -> list[CveRecord]:
    """All records of the given target class, sorted by CVE id."""
    if target_class not in TARGET_CLASSES:
        raise UnknownIdError(f"invalid target class: {target_class!r}")
    return sorted(
        (c for c in kb.cves if c.target_class == target_class),
        key=lambda c: c.cve_id,
    )


def applicable_cves(kb: KnowledgeBase, entity_id: str, env: Environment) -> list[CveRecord]:
    """Records whose class matches the entity's kind and whose
    applicability requirements all hold on the entity."""
    kind, entity = env.lookup(entity_id)
    return [
        record
        for record in cves_for_target(kb, kind)
        if all(req.matches(entity.system_env, entity.description) for req in record.applicability)
    ]
