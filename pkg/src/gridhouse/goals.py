"""Declarative goal checks over a final environment state."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from gridhouse.env import Environment


class UnknownObjectClass(Exception):
    """A predicate references an object id or class absent from the scene."""


@dataclass(frozen=True)
class Predicate:
    """One goal condition.

    kind is one of:
      object_in_state(ref, field, value) -- some object matching ref has
          state field equal to value;
      object_in(ref, receptacle_class)   -- some object matching ref sits
          directly on/in a receptacle of the given class;
      agent_holds(class or None)         -- the hand holds an object of the
          class (None: the hand is empty).

    ref is an object id when it names one, otherwise an object class.
    """

    kind: str
    ref: Optional[str] = None
    field: Optional[str] = None
    value: Optional[bool] = None
    receptacle_class: Optional[str] = None
    holds_class: Optional[str] = None

    def describe(self) -> str:
        if self.kind == "object_in_state":
            return f"{self.ref}.{self.field} == {self.value}"
        if self.kind == "object_in":
            return f"{self.ref} in {self.receptacle_class}"
        return f"agent holds {self.holds_class or 'nothing'}"

    def to_json(self) -> dict:
        if self.kind == "object_in_state":
            return {"kind": self.kind, "ref": self.ref, "field": self.field, "value": self.value}
        if self.kind == "object_in":
            return {"kind": self.kind, "ref": self.ref, "receptacle_class": self.receptacle_class}
        return {"kind": self.kind, "class": self.holds_class}

    @classmethod
    def from_json(cls, doc: dict) -> "Predicate":
        kind = doc.get("kind")
        if kind == "object_in_state":
            return cls(kind=kind, ref=doc["ref"], field=doc["field"], value=doc["value"])
        if kind == "object_in":
            return cls(kind=kind, ref=doc["ref"], receptacle_class=doc["receptacle_class"])
        if kind == "agent_holds":
            return cls(kind=kind, holds_class=doc.get("class"))
        raise ValueError(f"unknown predicate kind {kind!r}")

    @classmethod
    def object_in_state(cls, ref: str, field: str, value: bool) -> "Predicate":
        return cls(kind="object_in_state", ref=ref, field=field, value=value)

    @classmethod
    def object_in(cls, ref: str, receptacle_class: str) -> "Predicate":
        return cls(kind="object_in", ref=ref, receptacle_class=receptacle_class)

    @classmethod
    def agent_holds(cls, holds_class: Optional[str]) -> "Predicate":
        return cls(kind="agent_holds", holds_class=holds_class)


@dataclass(frozen=True)
class GoalSpec:
    predicates: tuple[Predicate, ...]

    def __post_init__(self):
        if not self.predicates:
            raise ValueError("a goal needs at least one predicate")

    def to_json(self) -> list[dict]:
        return [p.to_json() for p in self.predicates]

    @classmethod
    def from_json(cls, doc) -> "GoalSpec":
        if not isinstance(doc, list):
            raise ValueError("goal spec must be a list of predicates")
        return cls(tuple(Predicate.from_json(p) for p in doc))

    def __str__(self) -> str:
        return " and ".join(p.describe() for p in self.predicates)


@dataclass(frozen=True)
class GoalReport:
    ok: bool
    results: tuple[tuple[str, bool], ...]  # (predicate description, holds)

    def __bool__(self) -> bool:
        return self.ok


def _resolve_refs(env: Environment, ref: str) -> list[str]:
    """Object ids matching a ref (id match wins over class match)."""
    ids = [o.id for o in env.scene.objects if o.id == ref]
    if ids:
        return ids
    ids = [o.id for o in env.scene.objects if o.object_class == ref]
    if not ids:
        raise UnknownObjectClass(f"no object or class {ref!r} in scene {env.scene.id}")
    return ids


def _check_predicate(env: Environment, pred: Predicate) -> bool:
    if pred.kind == "object_in_state":
        for oid in _resolve_refs(env, pred.ref):
            if getattr(env.objects[oid].state, pred.field) == pred.value:
                return True
        return False
    if pred.kind == "object_in":
        classes = {o.object_class for o in env.scene.objects}
        if pred.receptacle_class not in classes:
            raise UnknownObjectClass(
                f"no receptacle class {pred.receptacle_class!r} in scene {env.scene.id}"
            )
        for oid in _resolve_refs(env, pred.ref):
            parent = env.objects[oid].parent
            if parent is not None and env.scene.object_by_id(parent).object_class == pred.receptacle_class:
                return True
        return False
    if pred.kind == "agent_holds":
        if pred.holds_class is None:
            return env.held is None
        if pred.holds_class not in {o.object_class for o in env.scene.objects}:
            raise UnknownObjectClass(
                f"no object class {pred.holds_class!r} in scene {env.scene.id}"
            )
        return env.held is not None and (
            env.scene.object_by_id(env.held).object_class == pred.holds_class
        )
    raise ValueError(f"unknown predicate kind {pred.kind!r}")


def check_goal(env: Environment, goal: GoalSpec) -> GoalReport:
    """Evaluate every predicate; the goal holds iff all of them do.

    Raises UnknownObjectClass when a predicate references an id or class the
    scene does not contain.
    """
    results = []
    ok = True
    for pred in goal.predicates:
        holds = _check_predicate(env, pred)
        ok = ok and holds
        results.append((pred.describe(), holds))
    return GoalReport(ok, tuple(results))


def goal_to_text(goal: GoalSpec) -> str:
    return json.dumps(goal.to_json(), indent=2) + "\n"
