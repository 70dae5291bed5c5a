"""C-ITS environment model.

Parses and validates the environment document (OBUs, RSUs, devices, roads,
networks) and answers topology / protocol-compatibility queries.  The file
format is a UTF-8 JSON object with top-level keys ``roads``, ``networks``,
``bridges`` (optional), ``physical_access`` (optional), ``obus``, ``rsus``
and ``devices``.  Entity objects use the original key spelling
(``Loc_Road``, ``Con_Network``, ``System_Env``, ...).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from citsgraph.errors import ParseError, UnknownIdError

OBU_KIND = "OBU"
RSU_KIND = "RSU"
DEVICE_KIND = "Device"

_OBU_KEYS = {
    "id": str,
    "Loc_Road": str,
    "Con_Network": str,
    "Description": str,
    "Destination": str,
    "System_Env": list,
    "Command": list,
    "Protocol": list,
}
_RSU_KEYS = {
    "id": str,
    "Loc_Road": str,
    "Con_Network": str,
    "Groups": str,
    "Description": str,
    "System_Env": list,
    "Command": list,
    "Protocol": list,
}
_DEVICE_KEYS = {
    "id": str,
    "sub_id": str,
    "Con_Network": str,
    "Groups": str,
    "Description": str,
    "System_Env": list,
    "Command": list,
    "Protocol": list,
}


@dataclass(frozen=True)
class Obu:
    id: str
    loc_road: str
    con_network: str
    description: str
    destination: str
    system_env: tuple[str, ...]
    command: tuple[str, ...]
    protocol: tuple[str, ...]


@dataclass(frozen=True)
class Rsu:
    id: str
    loc_road: str
    con_network: str
    groups: str
    description: str
    system_env: tuple[str, ...]
    command: tuple[str, ...]
    protocol: tuple[str, ...]


@dataclass(frozen=True)
class Device:
    id: str
    sub_id: str
    con_network: str
    groups: str
    description: str
    system_env: tuple[str, ...]
    command: tuple[str, ...]
    protocol: tuple[str, ...]


@dataclass(frozen=True)
class Environment:
    """Immutable snapshot of one C-ITS deployment.

    ``bridges`` lists pairs of network ids reachable through a gateway;
    by default distinct networks cannot communicate.  ``physical_access``
    lists (actor id, entity id) pairs with out-of-band physical reach.
    """

    roads: tuple[str, ...]
    networks: tuple[str, ...]
    bridges: tuple[tuple[str, str], ...] = ()
    physical_access: tuple[tuple[str, str], ...] = ()
    obus: tuple[Obu, ...] = ()
    rsus: tuple[Rsu, ...] = ()
    devices: tuple[Device, ...] = ()

    def entities(self):
        """Yield (kind, entity) for every entity, OBUs first."""
        for obu in self.obus:
            yield OBU_KIND, obu
        for rsu in self.rsus:
            yield RSU_KIND, rsu
        for device in self.devices:
            yield DEVICE_KIND, device

    def lookup(self, entity_id: str):
        """Return (kind, entity) for ``entity_id`` or raise UnknownIdError."""
        for kind, entity in self.entities():
            if entity.id == entity_id:
                return kind, entity
        raise UnknownIdError(f"unknown entity id: {entity_id!r}")

    def entity(self, entity_id: str):
        return self.lookup(entity_id)[1]

    def kind_of(self, entity_id: str) -> str:
        return self.lookup(entity_id)[0]

    def networks_bridged(self, a: str, b: str) -> bool:
        pair = frozenset((a, b))
        return any(frozenset(bridge) == pair for bridge in self.bridges)

    def has_physical_access(self, actor: str, entity: str) -> bool:
        return (actor, entity) in self.physical_access


@dataclass(frozen=True, order=True)
class Violation:
    entity_id: str
    field: str
    level: str  # "error" | "warning"
    message: str


def _string_array(value, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ParseError(f"{where}: expected an array of strings")
    return tuple(value)


def _parse_entity(obj, schema, where: str, strict: bool, warnings: list[str]):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    values = {}
    for key, expected in schema.items():
        if key not in obj:
            raise ParseError(f"{where}: missing required key {key!r}")
        value = obj[key]
        if expected is str:
            if not isinstance(value, str):
                raise ParseError(f"{where}: key {key!r} must be a string")
            values[key] = value
        else:
            values[key] = _string_array(value, f"{where}.{key}")
    for key in obj:
        if key not in schema:
            if strict:
                raise ParseError(f"{where}: unknown key {key!r}")
            warnings.append(f"{where}: unknown key {key!r} ignored")
    return values


def _parse_pairs(value, where: str) -> tuple[tuple[str, str], ...]:
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected an array of [a, b] pairs")
    pairs = []
    for i, item in enumerate(value):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(v, str) for v in item)
        ):
            raise ParseError(f"{where}[{i}]: expected a pair of strings")
        pairs.append((item[0], item[1]))
    return tuple(pairs)


def parse_environment(
    document: bytes | str,
    *,
    strict: bool = True,
    warnings: list[str] | None = None,
) -> Environment:
    """Parse an environment document into an :class:`Environment`.

    In strict mode unknown keys are rejected; otherwise they are collected
    into ``warnings`` (when a list is supplied) and ignored.
    """
    if warnings is None:
        warnings = []
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

    known = {"roads", "networks", "bridges", "physical_access", "obus", "rsus", "devices"}
    for key in ("roads", "networks", "obus", "rsus", "devices"):
        if key not in raw:
            raise ParseError(f"top level: missing required key {key!r}")
    for key in raw:
        if key not in known:
            if strict:
                raise ParseError(f"top level: unknown key {key!r}")
            warnings.append(f"top level: unknown key {key!r} ignored")

    roads = _string_array(raw["roads"], "roads")
    networks = _string_array(raw["networks"], "networks")
    bridges = _parse_pairs(raw.get("bridges", []), "bridges")
    physical = _parse_pairs(raw.get("physical_access", []), "physical_access")

    if not isinstance(raw["obus"], list):
        raise ParseError("obus: expected an array")
    if not isinstance(raw["rsus"], list):
        raise ParseError("rsus: expected an array")
    if not isinstance(raw["devices"], list):
        raise ParseError("devices: expected an array")

    obus = []
    for i, obj in enumerate(raw["obus"]):
        v = _parse_entity(obj, _OBU_KEYS, f"obus[{i}]", strict, warnings)
        obus.append(
            Obu(
                id=v["id"],
                loc_road=v["Loc_Road"],
                con_network=v["Con_Network"],
                description=v["Description"],
                destination=v["Destination"],
                system_env=v["System_Env"],
                command=v["Command"],
                protocol=v["Protocol"],
            )
        )
    rsus = []
    for i, obj in enumerate(raw["rsus"]):
        v = _parse_entity(obj, _RSU_KEYS, f"rsus[{i}]", strict, warnings)
        rsus.append(
            Rsu(
                id=v["id"],
                loc_road=v["Loc_Road"],
                con_network=v["Con_Network"],
                groups=v["Groups"],
                description=v["Description"],
                system_env=v["System_Env"],
                command=v["Command"],
                protocol=v["Protocol"],
            )
        )
    devices = []
    for i, obj in enumerate(raw["devices"]):
        v = _parse_entity(obj, _DEVICE_KEYS, f"devices[{i}]", strict, warnings)
        devices.append(
            Device(
                id=v["id"],
                sub_id=v["sub_id"],
                con_network=v["Con_Network"],
                groups=v["Groups"],
                description=v["Description"],
                system_env=v["System_Env"],
                command=v["Command"],
                protocol=v["Protocol"],
            )
        )

    return Environment(
        roads=roads,
        networks=networks,
        bridges=bridges,
        physical_access=physical,
        obus=tuple(obus),
        rsus=tuple(rsus),
        devices=tuple(devices),
    )


def serialize_environment(env: Environment) -> bytes:
    """Serialize to the canonical file form; parse(serialize(e)) == e."""
    doc = {
        "roads": list(env.roads),
        "networks": list(env.networks),
        "bridges": [list(pair) for pair in env.bridges],
        "physical_access": [list(pair) for pair in env.physical_access],
        "obus": [
            {
                "id": o.id,
                "Loc_Road": o.loc_road,
                "Con_Network": o.con_network,
                "Description": o.description,
                "Destination": o.destination,
                "System_Env": list(o.system_env),
                "Command": list(o.command),
                "Protocol": list(o.protocol),
            }
            for o in env.obus
        ],
        "rsus": [
            {
                "id": r.id,
                "Loc_Road": r.loc_road,
                "Con_Network": r.con_network,
                "Groups": r.groups,
                "Description": r.description,
                "System_Env": list(r.system_env),
                "Command": list(r.command),
                "Protocol": list(r.protocol),
            }
            for r in env.rsus
        ],
        "devices": [
            {
                "id": d.id,
                "sub_id": d.sub_id,
                "Con_Network": d.con_network,
                "Groups": d.groups,
                "Description": d.description,
                "System_Env": list(d.system_env),
                "Command": list(d.command),
                "Protocol": list(d.protocol),
            }
            for d in env.devices
        ],
    }
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def validate_environment(env: Environment) -> list[Violation]:
    """Check every invariant; an empty report means the environment is valid.

    Violations are returned sorted by (entity id, field) so reports are
    deterministic.
    """
    violations: list[Violation] = []
    roads = set(env.roads)
    networks = set(env.networks)

    seen: set[str] = set()
    for kind, entity in env.entities():
        if entity.id in seen:
            violations.append(
                Violation(entity.id, "id", "error", f"duplicate entity id {entity.id!r}")
            )
        seen.add(entity.id)

        if kind in (OBU_KIND, RSU_KIND) and entity.loc_road not in roads:
            violations.append(
                Violation(
                    entity.id,
                    "Loc_Road",
                    "error",
                    f"dangling road reference {entity.loc_road!r}",
                )
            )
        if kind == OBU_KIND and entity.destination not in roads:
            violations.append(
                Violation(
                    entity.id,
                    "Destination",
                    "error",
                    f"dangling road reference {entity.destination!r}",
                )
            )
        if entity.con_network not in networks:
            violations.append(
                Violation(
                    entity.id,
                    "Con_Network",
                    "error",
                    f"dangling network reference {entity.con_network!r}",
                )
            )
        if not entity.protocol:
            violations.append(
                Violation(entity.id, "Protocol", "warning", "empty protocol set")
            )

    for a, b in env.bridges:
        for net in (a, b):
            if net not in networks:
                violations.append(
                    Violation("<bridges>", net, "error", f"dangling network reference {net!r}")
                )
    for actor, entity_id in env.physical_access:
        for eid in (actor, entity_id):
            if eid not in seen:
                violations.append(
                    Violation(
                        "<physical_access>", eid, "error", f"dangling entity reference {eid!r}"
                    )
                )

    return sorted(violations)


def shared_protocols(a: str, b: str, env: Environment) -> set[str]:
    """Protocols both entities support; communication requires at least one."""
    ea = env.entity(a)
    eb = env.entity(b)
    return set(ea.protocol) & set(eb.protocol)


@dataclass(frozen=True)
class CommResult:
    ok: bool
    reason: str | None = None  # failing clause: "protocol" or "network"

    def __bool__(self) -> bool:
        return self.ok


def can_communicate(a: str, b: str, env: Environment) -> CommResult:
    """Two entities can communicate iff they share a protocol and a network.

    Networks count as shared when equal or explicitly bridged.  The result
    names the failing clause; the check is symmetric in its arguments.
    """
    if a == b:
        raise ValueError("can_communicate requires two distinct entities")
    ea = env.entity(a)
    eb = env.entity(b)
    if not (set(ea.protocol) & set(eb.protocol)):
        return CommResult(False, "protocol")
    if ea.con_network != eb.con_network and not env.networks_bridged(
        ea.con_network, eb.con_network
    ):
        return CommResult(False, "network")
    return CommResult(True)
