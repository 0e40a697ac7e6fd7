"""Deterministic environment state machine.

The step semantics are driven by the versioned action table shipped at
gridhouse/data/action_semantics.json.  A step either succeeds (state updated,
tick advanced) or fails (state untouched, failure recorded as an event).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from importlib import resources
from typing import Optional

from gridhouse.actions import ActionKind, AtomicAction
from gridhouse.scene import (
    Capability,
    Cell,
    ObjectState,
    OccupancyGrid,
    Scene,
    heading_vector,
    occupancy_grid,
)

# failure reasons carried by Failed events
BLOCKED_MOVE = "BlockedMove"
OUT_OF_RANGE = "OutOfRange"
NOT_VISIBLE = "NotVisible"
HANDS_FULL = "HandsFull"
HANDS_EMPTY = "HandsEmpty"
WRONG_CAPABILITY = "WrongCapability"
WRONG_STATE = "WrongState"
UNKNOWN_TARGET = "UnknownTarget"


def _load_semantics() -> dict:
    text = resources.files("gridhouse.data").joinpath("action_semantics.json").read_text()
    return json.loads(text)


SEMANTICS = _load_semantics()
INTERACTION_RANGE: int = SEMANTICS["interaction_range_cells"]


@dataclass(frozen=True)
class Event:
    tick: int
    action: AtomicAction
    ok: bool
    reason: Optional[str] = None
    effects: tuple[tuple[str, dict], ...] = ()

    def to_json(self) -> dict:
        out = {
            "tick": self.tick,
            "action": self.action.to_json(),
            "outcome": "Ok" if self.ok else "Failed",
        }
        if not self.ok:
            out["reason"] = self.reason
        out["effects"] = [{"object": oid, "delta": delta} for oid, delta in self.effects]
        return out


@dataclass
class ObjectDyn:
    """Mutable per-object record: where it is and what state it is in."""

    cell: Optional[Cell]
    parent: Optional[str]
    state: ObjectState


class _Failure(Exception):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(reason)


class Environment:
    """One live episode over a scene.

    Owns mutable agent/object state; a single session drives it at a time.
    """

    def __init__(self, scene: Scene):
        self.scene = scene
        self.agent = scene.agent_start
        self.held: Optional[str] = None
        self.objects: dict[str, ObjectDyn] = {
            o.id: ObjectDyn(cell=o.cell, parent=o.parent_receptacle, state=o.state)
            for o in scene.objects
        }
        self.tick = 0
        self.events: list[Event] = []
        # only non-pickupable objects block, and those never move, so the
        # occupancy grid is fixed for the whole episode
        self._occupancy = occupancy_grid(scene)

    # -- queries ---------------------------------------------------------

    @property
    def occupancy(self) -> OccupancyGrid:
        return self._occupancy

    def object_cell(self, object_id: str) -> Optional[Cell]:
        return self.objects[object_id].cell

    def object_top(self, object_id: str) -> float:
        """Current absolute top of an object's stack in meters."""
        top = 0.0
        seen = set()
        oid: Optional[str] = object_id
        while oid is not None and oid not in seen:
            seen.add(oid)
            top += self.scene.object_by_id(oid).height
            oid = self.objects[oid].parent
        return top

    def _children_of(self, object_id: str) -> list[str]:
        return [oid for oid, dyn in self.objects.items() if dyn.parent == object_id]

    def _hidden_in_closed(self, object_id: str) -> bool:
        """True when some ancestor receptacle is openable and currently closed."""
        seen = {object_id}
        oid = self.objects[object_id].parent
        while oid is not None and oid not in seen:
            seen.add(oid)
            if self.objects[oid].state.is_open is False:
                return True
            oid = self.objects[oid].parent
        return False

    def facing_cells(self, count: int = INTERACTION_RANGE) -> list[Cell]:
        """Cells along the agent's heading, nearest first."""
        dx, dz = heading_vector(self.agent.heading)
        x, z = self.agent.cell
        return [(x + dx * k, z + dz * k) for k in range(1, count + 1)]

    def _check_reach(self, cell: Cell) -> None:
        """Range + line-of-sight check for an interaction target cell."""
        line = self.facing_cells()
        if cell not in line:
            raise _Failure(OUT_OF_RANGE, f"target cell {cell} not within {INTERACTION_RANGE} ahead")
        k = line.index(cell)
        for between in line[:k]:
            if not self._occupancy.is_free(between):
                raise _Failure(NOT_VISIBLE, f"blocked cell {between} in the way")

    def _placement_cell(self) -> Cell:
        """Facing cell for floor placement; must accept a parentless object."""
        cell = self.facing_cells(1)[0]
        if not self.scene.in_bounds(cell) or cell in self.scene.walls:
            raise _Failure(BLOCKED_MOVE, f"cannot place at {cell}")
        for oid, dyn in self.objects.items():
            if dyn.cell == cell and dyn.parent is None:
                raise _Failure(BLOCKED_MOVE, f"cell {cell} already holds {oid}")
        return cell

    # -- stepping --------------------------------------------------------

    def step(self, action: AtomicAction) -> Event:
        """Apply one atomic action; failures become events, never exceptions."""
        try:
            effects = self._apply(action)
        except _Failure as f:
            event = Event(self.tick, action, ok=False, reason=f.reason)
            self.events.append(event)
            return event
        self.tick += 1
        event = Event(self.tick, action, ok=True, effects=tuple(effects))
        self.events.append(event)
        return event

    def _apply(self, action: AtomicAction) -> list[tuple[str, dict]]:
        row = SEMANTICS["actions"][action.kind.value]
        if row["category"] == "movement":
            return self._apply_movement(action)
        return self._apply_interaction(action, row)

    def _apply_movement(self, action: AtomicAction) -> list[tuple[str, dict]]:
        pose = self.agent
        if action.kind in (ActionKind.MOVE_AHEAD, ActionKind.MOVE_BACK):
            dx, dz = heading_vector(pose.heading)
            if action.kind is ActionKind.MOVE_BACK:
                dx, dz = -dx, -dz
            dest = (pose.cell[0] + dx, pose.cell[1] + dz)
            if not self._occupancy.is_free(dest):
                raise _Failure(BLOCKED_MOVE, f"destination {dest} blocked")
            self.agent = replace(pose, cell=dest)
        elif action.kind is ActionKind.ROTATE_LEFT:
            self.agent = replace(pose, heading=(pose.heading - 90) % 360)
        elif action.kind is ActionKind.ROTATE_RIGHT:
            self.agent = replace(pose, heading=(pose.heading + 90) % 360)
        elif action.kind is ActionKind.LOOK_UP:
            if pose.pitch >= 30:
                raise _Failure(WRONG_STATE, "pitch already at +30")
            self.agent = replace(pose, pitch=pose.pitch + 30)
        elif action.kind is ActionKind.LOOK_DOWN:
            if pose.pitch <= -30:
                raise _Failure(WRONG_STATE, "pitch already at -30")
            self.agent = replace(pose, pitch=pose.pitch - 30)
        return []

    def _apply_interaction(self, action: AtomicAction, row: dict) -> list[tuple[str, dict]]:
        # hand precondition
        if row["hand"] == "empty" and self.held is not None:
            raise _Failure(HANDS_FULL, f"already holding {self.held}")
        if row["hand"] == "full" and self.held is None:
            raise _Failure(HANDS_EMPTY, "nothing in hand")

        motion = row.get("motion")
        if motion == "drop" or (motion == "place" and action.target is None):
            return self._place_on_floor(breaks=(motion == "drop"))

        target = action.target
        if target is None:  # table guarantees requires_target for these kinds
            raise _Failure(UNKNOWN_TARGET, "missing target")
        if target not in self.objects:
            raise _Failure(UNKNOWN_TARGET, f"no object {target!r} in scene")
        obj = self.scene.object_by_id(target)
        dyn = self.objects[target]

        cap = row["required_capability"]
        if cap is not None and Capability(cap) not in obj.capabilities:
            raise _Failure(WRONG_CAPABILITY, f"{target} is not {cap}")

        if dyn.cell is None:
            raise _Failure(OUT_OF_RANGE, f"{target} is in hand, not in the scene")
        self._check_reach(dyn.cell)
        if self._hidden_in_closed(target):
            raise _Failure(NOT_VISIBLE, f"{target} is inside a closed receptacle")

        # state preconditions from the table
        for field, wanted in row["target_state"].items():
            if field == "is_open_if_openable":
                if obj.has(Capability.OPENABLE) and dyn.state.is_open is False:
                    raise _Failure(WRONG_STATE, f"{target} is closed")
                continue
            if getattr(dyn.state, field) != wanted:
                raise _Failure(WRONG_STATE, f"{target}.{field} is not {wanted}")

        if motion == "pickup":
            if self._children_of(target):
                raise _Failure(WRONG_STATE, f"{target} supports other objects")
            self.held = target
            dyn.cell = None
            dyn.parent = None
            return [(target, {"cell": None, "parent": None, "held": True})]

        if motion == "place":
            held = self.held
            held_dyn = self.objects[held]
            held_dyn.cell = dyn.cell
            held_dyn.parent = target
            self.held = None
            return [(held, {"cell": list(dyn.cell), "parent": target, "held": False})]

        # pure state change (open/close/toggle)
        effects: list[tuple[str, dict]] = []
        delta = {}
        for field, value in row["effects_state"].items():
            dyn.state = replace(dyn.state, **{field: value})
            delta[field] = value
        effects.append((target, delta))
        return effects

    def _place_on_floor(self, breaks: bool) -> list[tuple[str, dict]]:
        cell = self._placement_cell()
        held = self.held
        dyn = self.objects[held]
        dyn.cell = cell
        dyn.parent = None
        self.held = None
        delta: dict = {"cell": list(cell), "parent": None, "held": False}
        obj = self.scene.object_by_id(held)
        if breaks and obj.has(Capability.BREAKABLE):
            dyn.state = replace(dyn.state, is_broken=True)
            delta["is_broken"] = True
        return [(held, delta)]

    # -- hashing ---------------------------------------------------------

    def snapshot(self) -> dict:
        """Canonical JSON-able view of the dynamic state (events excluded)."""
        return {
            "agent": {
                "cell": list(self.agent.cell),
                "heading": self.agent.heading,
                "pitch": self.agent.pitch,
            },
            "held": self.held,
            "tick": self.tick,
            "objects": {
                oid: {
                    "cell": list(dyn.cell) if dyn.cell is not None else None,
                    "parent": dyn.parent,
                    "state": dyn.state.to_json(),
                }
                for oid, dyn in sorted(self.objects.items())
            },
        }

    def state_hash(self) -> str:
        text = json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def init_env(scene: Scene) -> Environment:
    return Environment(scene)


def replay(scene: Scene, actions: list[AtomicAction]) -> tuple[Environment, str]:
    """Fold step over a trace from the initial state; returns (env, digest)."""
    env = init_env(scene)
    for action in actions:
        env.step(action)
    return env, env.state_hash()
