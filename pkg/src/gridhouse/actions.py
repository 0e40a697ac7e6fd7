"""Atomic action vocabulary: the directly executable agent commands."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class ActionKind(str, Enum):
    MOVE_AHEAD = "MoveAhead"
    MOVE_BACK = "MoveBack"
    ROTATE_LEFT = "RotateLeft"
    ROTATE_RIGHT = "RotateRight"
    LOOK_UP = "LookUp"
    LOOK_DOWN = "LookDown"
    PICKUP_OBJECT = "PickupObject"
    PUT_OBJECT = "PutObject"
    OPEN_OBJECT = "OpenObject"
    CLOSE_OBJECT = "CloseObject"
    TOGGLE_ON = "ToggleOn"
    TOGGLE_OFF = "ToggleOff"
    DROP_HAND_OBJECT = "DropHandObject"


#: kinds whose target id is mandatory
TARGET_REQUIRED = frozenset(
    {
        ActionKind.PICKUP_OBJECT,
        ActionKind.OPEN_OBJECT,
        ActionKind.CLOSE_OBJECT,
        ActionKind.TOGGLE_ON,
        ActionKind.TOGGLE_OFF,
    }
)

#: kinds that interact with the scene (the rest move the agent)
INTERACTION_KINDS = TARGET_REQUIRED | {ActionKind.PUT_OBJECT, ActionKind.DROP_HAND_OBJECT}

NAVIGATION_KINDS = frozenset(ActionKind) - INTERACTION_KINDS


class ActionError(ValueError):
    """Raised for structurally invalid actions (not runtime step failures)."""


@dataclass(frozen=True)
class AtomicAction:
    kind: ActionKind
    target: Optional[str] = None

    def __post_init__(self):
        if self.kind in TARGET_REQUIRED and not self.target:
            raise ActionError(f"{self.kind.value} requires a target object id")
        if self.kind not in INTERACTION_KINDS and self.target is not None:
            raise ActionError(f"{self.kind.value} takes no target")
        if self.kind is ActionKind.DROP_HAND_OBJECT and self.target is not None:
            raise ActionError("DropHandObject takes no target")

    @property
    def is_interaction(self) -> bool:
        return self.kind in INTERACTION_KINDS

    def label(self) -> str:
        """Human-readable form used in frame manifests and logs."""
        if self.target is not None:
            return f"{self.kind.value}({self.target})"
        return self.kind.value

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.target is not None:
            out["target"] = self.target
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "AtomicAction":
        if not isinstance(doc, dict) or "kind" not in doc:
            raise ActionError(f"expected action record with 'kind', got {doc!r}")
        try:
            kind = ActionKind(doc["kind"])
        except ValueError:
            raise ActionError(f"unknown action kind {doc['kind']!r}") from None
        target = doc.get("target")
        if target is not None:
            target = str(target)
        return cls(kind, target)


def trace_to_json(actions: list[AtomicAction]) -> str:
    """`.trace.json` format: a JSON list of action records."""
    return json.dumps([a.to_json() for a in actions], indent=2) + "\n"


def trace_from_json(text: str) -> list[AtomicAction]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ActionError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, list):
        raise ActionError("trace file must be a JSON list of actions")
    return [AtomicAction.from_json(rec) for rec in doc]


def load_trace_file(path) -> list[AtomicAction]:
    with open(path, "r", encoding="utf-8") as fh:
        return trace_from_json(fh.read())
