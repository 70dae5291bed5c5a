"""Condition/effect vocabulary and the world state they act on.

A :class:`WorldState` is the immutable snapshot an attack step transforms:
the base environment plus accumulated facts, a privilege map and per-entity
overlays.  Conditions are a closed set of eight predicate kinds; effects
are a closed set of four mutators.  Evaluation is pure and application
always returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from citsgraph.env import (
    DEVICE_KIND,
    OBU_KIND,
    RSU_KIND,
    Environment,
    can_communicate,
    shared_protocols,
)
from citsgraph.errors import ConditionError

PRIVILEGE_LEVELS = ("none", "user", "root")
_PRIV_RANK = {level: rank for rank, level in enumerate(PRIVILEGE_LEVELS)}

ACCESS_FACT = "access"  # reserved fact name backing has_access
PHYSICAL_ACCESS_FACT = "physical_access"

CONDITION_KINDS = (
    "physical_access",
    "model_matches",
    "has_system_env",
    "shared_protocol",
    "can_communicate",
    "has_privilege",
    "has_access",
    "fact",
)
EFFECT_KINDS = ("grant_privilege", "add_fact", "append_command", "set_field")

# Fields an attack step may overwrite or extend, per entity kind.  id and
# protocol/topology fields stay fixed; System_Env grows monotonically.
_SETTABLE_FIELDS = {
    OBU_KIND: {"Loc_Road", "Con_Network", "Description", "Destination", "System_Env"},
    RSU_KIND: {"Loc_Road", "Con_Network", "Groups", "Description", "System_Env"},
    DEVICE_KIND: {"sub_id", "Con_Network", "Groups", "Description", "System_Env"},
}


def _check_arity(kind: str, args: tuple, minimum: int, maximum: int | None = None):
    if maximum is None:
        maximum = minimum
    if not (minimum <= len(args) and (maximum < 0 or len(args) <= maximum)):
        raise ConditionError(f"{kind}: wrong arity, got {len(args)} argument(s)")


@dataclass(frozen=True)
class Condition:
    """One atomic predicate over a world state.

    ``label`` distinguishes the two annotation flavours scenario authors
    use ("Condition" vs "Property"); both evaluate identically.
    ``extension`` flags predicates added beyond the source scenario prose.
    """

    kind: str
    args: tuple[str, ...]
    label: str = "Condition"
    extension: bool = False

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ConditionError(f"unknown condition kind {self.kind!r}")
        if self.label not in ("Condition", "Property"):
            raise ConditionError(f"unknown condition label {self.label!r}")
        args = tuple(self.args)
        object.__setattr__(self, "args", args)
        if self.kind == "model_matches":
            _check_arity(self.kind, args, 2, -1)
        elif self.kind == "fact":
            _check_arity(self.kind, args, 1, -1)
        elif self.kind in ("has_privilege", "has_access"):
            _check_arity(self.kind, args, 3)
        else:
            _check_arity(self.kind, args, 2)
        if self.kind == "has_privilege" and args[2] not in PRIVILEGE_LEVELS:
            raise ConditionError(f"unknown privilege level {args[2]!r}")

    def describe(self) -> str:
        return f"{self.kind}({', '.join(self.args)})"


@dataclass(frozen=True)
class Effect:
    kind: str
    args: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in EFFECT_KINDS:
            raise ConditionError(f"unknown effect kind {self.kind!r}")
        args = tuple(self.args)
        object.__setattr__(self, "args", args)
        if self.kind == "grant_privilege":
            _check_arity(self.kind, args, 3)
            if args[2] not in ("user", "root"):
                raise ConditionError(f"grant_privilege level must be user or root, got {args[2]!r}")
        elif self.kind == "add_fact":
            _check_arity(self.kind, args, 1, -1)
        elif self.kind == "append_command":
            _check_arity(self.kind, args, 2)
        else:  # set_field
            _check_arity(self.kind, args, 3)

    def describe(self) -> str:
        return f"{self.kind}({', '.join(self.args)})"


def condition_to_json(cond: Condition) -> dict:
    obj = {"kind": cond.kind, "args": list(cond.args), "label": cond.label}
    if cond.extension:
        obj["extension"] = True
    return obj


def condition_from_json(obj) -> Condition:
    if not isinstance(obj, dict) or "kind" not in obj or "args" not in obj:
        raise ConditionError("condition must be an object with 'kind' and 'args'")
    return Condition(
        kind=obj["kind"],
        args=tuple(obj["args"]),
        label=obj.get("label", "Condition"),
        extension=bool(obj.get("extension", False)),
    )


def effect_to_json(effect: Effect) -> dict:
    return {"kind": effect.kind, "args": list(effect.args)}


def effect_from_json(obj) -> Effect:
    if not isinstance(obj, dict) or "kind" not in obj or "args" not in obj:
        raise ConditionError("effect must be an object with 'kind' and 'args'")
    return Effect(kind=obj["kind"], args=tuple(obj["args"]))


@dataclass(frozen=True)
class Overlay:
    """Additions layered over one entity's base fields."""

    system_env: tuple[str, ...] = ()
    command: tuple[str, ...] = ()
    fields: tuple[tuple[str, str], ...] = ()  # sorted (key, value) overrides


_EMPTY_OVERLAY = Overlay()


@dataclass(frozen=True)
class WorldState:
    """Environment snapshot plus facts, privileges and overlays.

    All collections are stored sorted, so equal states compare and hash
    equal regardless of the order mutations happened in.
    """

    env: Environment
    facts: frozenset[tuple[str, ...]] = frozenset()
    privileges: tuple[tuple[str, str, str], ...] = ()  # (actor, entity, level)
    overlays: tuple[tuple[str, Overlay], ...] = ()  # sorted by entity id

    def privilege_of(self, actor: str, entity: str) -> str:
        for a, e, level in self.privileges:
            if (a, e) == (actor, entity):
                return level
        return "none"

    def has_fact(self, name: str, *args: str) -> bool:
        return (name, *args) in self.facts

    def overlay_of(self, entity_id: str) -> Overlay:
        for eid, overlay in self.overlays:
            if eid == entity_id:
                return overlay
        return _EMPTY_OVERLAY

    def system_env_of(self, entity_id: str) -> tuple[str, ...]:
        base = self.env.entity(entity_id).system_env
        return base + self.overlay_of(entity_id).system_env

    def command_of(self, entity_id: str) -> tuple[str, ...]:
        base = self.env.entity(entity_id).command
        return base + self.overlay_of(entity_id).command

    def field_of(self, entity_id: str, key: str) -> str:
        """Scalar field value, overlay override first."""
        for k, v in self.overlay_of(entity_id).fields:
            if k == key:
                return v
        entity = self.env.entity(entity_id)
        attr = {"sub_id": "sub_id"}.get(key, key.lower())
        return getattr(entity, attr)

    def description_of(self, entity_id: str) -> str:
        return self.field_of(entity_id, "Description")

    def canonical_key(self):
        """Hashable, JSON-translatable identity of the mutable part."""
        return (
            tuple(sorted(self.facts)),
            self.privileges,
            tuple(
                (eid, ov.system_env, ov.command, ov.fields) for eid, ov in self.overlays
            ),
        )


@dataclass(frozen=True)
class EvalResult:
    ok: bool
    explanation: str

    def __bool__(self) -> bool:
        return self.ok


def eval_condition(state: WorldState, cond: Condition) -> EvalResult:
    """Evaluate one condition; pure, never mutates the state."""
    kind = cond.kind
    args = cond.args
    if kind == "physical_access":
        actor, entity = args
        state.env.lookup(actor)
        state.env.lookup(entity)
        ok = state.env.has_physical_access(actor, entity) or state.has_fact(
            PHYSICAL_ACCESS_FACT, actor, entity
        )
        return EvalResult(ok, f"{actor} {'has' if ok else 'lacks'} physical access to {entity}")
    if kind == "model_matches":
        entity, patterns = args[0], args[1:]
        state.env.lookup(entity)
        description = state.description_of(entity)
        ok = any(description.startswith(p) for p in patterns)
        return EvalResult(
            ok,
            f"description {description!r} of {entity} "
            f"{'matches' if ok else 'matches none of'} {list(patterns)}",
        )
    if kind == "has_system_env":
        entity, token = args
        ok = token in state.system_env_of(entity)
        return EvalResult(
            ok, f"system env of {entity} {'contains' if ok else 'is missing'} {token!r}"
        )
    if kind == "shared_protocol":
        a, b = args
        shared = shared_protocols(a, b, state.env)
        if shared:
            return EvalResult(True, f"{a} and {b} share protocols {sorted(shared)}")
        return EvalResult(False, f"{a} and {b} share no protocol")
    if kind == "can_communicate":
        a, b = args
        result = can_communicate(a, b, state.env)
        if result.ok:
            return EvalResult(True, f"{a} and {b} can communicate")
        return EvalResult(False, f"{a} and {b} cannot communicate ({result.reason})")
    if kind == "has_privilege":
        actor, entity, level = args
        state.env.lookup(actor)
        state.env.lookup(entity)
        held = state.privilege_of(actor, entity)
        ok = _PRIV_RANK[held] >= _PRIV_RANK[level]
        return EvalResult(
            ok, f"{actor} holds {held!r} on {entity} (needs at least {level!r})"
        )
    if kind == "has_access":
        actor, entity, unit = args
        state.env.lookup(actor)
        state.env.lookup(entity)
        ok = state.has_fact(ACCESS_FACT, actor, entity, unit)
        return EvalResult(
            ok, f"{actor} {'has' if ok else 'lacks'} access to {unit} of {entity}"
        )
    # fact
    ok = tuple(args) in state.facts
    return EvalResult(ok, f"fact {cond.describe()} {'holds' if ok else 'does not hold'}")


def eval_all(state: WorldState, conditions) -> EvalResult:
    """Conjunction: true iff every member holds; reports the first failure."""
    for cond in conditions:
        result = eval_condition(state, cond)
        if not result.ok:
            return EvalResult(False, f"{cond.describe()}: {result.explanation}")
    return EvalResult(True, "all conditions hold")


def apply_effects(state: WorldState, effects) -> WorldState:
    """Apply effects left to right, returning a new state.

    Privilege grants never downgrade; facts are a set, so re-adding is a
    no-op; System_Env set_field appends a token instead of replacing the
    array (base fields are never removed).
    """
    facts = set(state.facts)
    privileges = {(a, e): level for a, e, level in state.privileges}
    overlays = dict(state.overlays)

    for effect in effects:
        args = effect.args
        if effect.kind == "grant_privilege":
            actor, entity, level = args
            state.env.lookup(actor)
            state.env.lookup(entity)
            held = privileges.get((actor, entity), "none")
            if _PRIV_RANK[level] > _PRIV_RANK[held]:
                privileges[(actor, entity)] = level
        elif effect.kind == "add_fact":
            facts.add(tuple(args))
        elif effect.kind == "append_command":
            entity, text = args
            state.env.lookup(entity)
            overlay = overlays.get(entity, _EMPTY_OVERLAY)
            overlays[entity] = replace(overlay, command=overlay.command + (text,))
        else:  # set_field
            entity, key, value = args
            kind, _ = state.env.lookup(entity)
            if key not in _SETTABLE_FIELDS[kind]:
                raise ConditionError(f"set_field: key {key!r} not settable on {kind} {entity!r}")
            overlay = overlays.get(entity, _EMPTY_OVERLAY)
            if key == "System_Env":
                if value not in state.env.entity(entity).system_env + overlay.system_env:
                    overlays[entity] = replace(
                        overlay, system_env=overlay.system_env + (value,)
                    )
            else:
                fields = dict(overlay.fields)
                fields[key] = value
                overlays[entity] = replace(overlay, fields=tuple(sorted(fields.items())))

    return WorldState(
        env=state.env,
        facts=frozenset(facts),
        privileges=tuple(sorted((a, e, lvl) for (a, e), lvl in privileges.items())),
        overlays=tuple(sorted(overlays.items(), key=lambda item: item[0])),
    )


@dataclass(frozen=True)
class StateDiff:
    added_facts: tuple[tuple[str, ...], ...]
    removed_facts: tuple[tuple[str, ...], ...]
    privilege_changes: tuple[tuple[str, str, str, str], ...]  # actor, entity, old, new
    overlay_changes: tuple[tuple[str, str, str], ...]  # entity, slot, value

    @property
    def empty(self) -> bool:
        return not (
            self.added_facts
            or self.removed_facts
            or self.privilege_changes
            or self.overlay_changes
        )

    def summary(self) -> str:
        parts = []
        for fact in self.added_facts:
            parts.append(f"+{fact[0]}({', '.join(fact[1:])})")
        for fact in self.removed_facts:
            parts.append(f"-{fact[0]}({', '.join(fact[1:])})")
        for actor, entity, _old, new in self.privilege_changes:
            parts.append(f"{actor}@{entity}={new}")
        for entity, slot, value in self.overlay_changes:
            parts.append(f"{entity}.{slot}={value}")
        return "; ".join(parts) if parts else "(no change)"


def state_diff(before: WorldState, after: WorldState) -> StateDiff:
    """Structured difference between two states over the same environment."""
    if before.env != after.env:
        raise ValueError("state_diff requires states sharing one base environment")

    added = tuple(sorted(after.facts - before.facts))
    removed = tuple(sorted(before.facts - after.facts))

    before_priv = {(a, e): lvl for a, e, lvl in before.privileges}
    after_priv = {(a, e): lvl for a, e, lvl in after.privileges}
    priv_changes = []
    for key in sorted(set(before_priv) | set(after_priv)):
        old = before_priv.get(key, "none")
        new = after_priv.get(key, "none")
        if old != new:
            priv_changes.append((key[0], key[1], old, new))

    overlay_changes = []
    before_ov = dict(before.overlays)
    after_ov = dict(after.overlays)
    for entity in sorted(set(before_ov) | set(after_ov)):
        old = before_ov.get(entity, _EMPTY_OVERLAY)
        new = after_ov.get(entity, _EMPTY_OVERLAY)
        for token in new.system_env:
            if token not in old.system_env:
                overlay_changes.append((entity, "System_Env", token))
        for text in new.command[len(old.command):]:
            overlay_changes.append((entity, "Command", text))
        old_fields = dict(old.fields)
        for key, value in new.fields:
            if old_fields.get(key) != value:
                overlay_changes.append((entity, f"field:{key}", value))

    return StateDiff(
        added_facts=added,
        removed_facts=removed,
        privilege_changes=tuple(priv_changes),
        overlay_changes=tuple(overlay_changes),
    )
