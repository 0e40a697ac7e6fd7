"""Three-tier task structures and the recorder state machine.

Tier 1 is the task goal, tier 2 the human step descriptions, tier 3 the
atomic actions executed under each step.  Failed actions are kept in the
record (flagged) but skipped by flatten so a flattened trace replays clean.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from gridhouse.actions import AtomicAction
from gridhouse.goals import GoalSpec

HTS_VERSION = 1


class RecordError(Exception):
    pass


class IllegalTransition(RecordError):
    def __init__(self, phase: "Phase", op: str):
        self.phase = phase
        self.op = op
        super().__init__(f"cannot {op} while {phase.value}")


class StructureParseError(RecordError):
    def __init__(self, field_name: str, detail: str = ""):
        self.field = field_name
        super().__init__(f"bad structure document at {field_name!r}" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class RecordedAction:
    action: AtomicAction
    failed: bool = False

    def to_json(self) -> dict:
        out = self.action.to_json()
        out["failed"] = self.failed
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "RecordedAction":
        return cls(action=AtomicAction.from_json(doc), failed=bool(doc.get("failed", False)))


@dataclass(frozen=True)
class TaskStep:
    description: str
    actions: tuple[RecordedAction, ...]


@dataclass(frozen=True)
class HierarchicalTaskStructure:
    goal: str
    scene_id: str
    annotator_id: str
    steps: tuple[TaskStep, ...]
    success: bool
    goal_spec: Optional[GoalSpec] = None

    def digest(self) -> str:
        """Stable content id used in reports and instance ids."""
        text = serialize(self)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


class Phase(str, Enum):
    IDLE = "Idle"
    IN_TASK = "InTask"
    IN_STEP = "InStep"


@dataclass
class RecorderSession:
    """Phase machine collecting one structure at a time.

    Legal transitions: Idle -> InTask (begin_task), InTask -> InStep
    (begin_step), InStep -> InTask (end_step), InTask -> Idle (end_task).
    record_action is only legal in InStep.
    """

    scene_id: str
    annotator_id: str = "anonymous"
    phase: Phase = Phase.IDLE
    goal: str = ""
    goal_spec: Optional[GoalSpec] = None
    steps: list[TaskStep] = field(default_factory=list)
    _description: str = ""
    _actions: list[RecordedAction] = field(default_factory=list)

    def begin_task(self, goal: str, goal_spec: Optional[GoalSpec] = None) -> None:
        if self.phase is not Phase.IDLE:
            raise IllegalTransition(self.phase, "begin_task")
        if not goal.strip():
            raise RecordError("task goal must be non-empty")
        self.goal = goal
        self.goal_spec = goal_spec
        self.steps = []
        self.phase = Phase.IN_TASK

    def begin_step(self, description: str) -> None:
        if self.phase is not Phase.IN_TASK:
            raise IllegalTransition(self.phase, "begin_step")
        if not description.strip():
            raise RecordError("step description must be non-empty")
        self._description = description
        self._actions = []
        self.phase = Phase.IN_STEP

    def record_action(self, action: AtomicAction, ok: bool) -> None:
        """Append the action just executed; ok comes from the step event."""
        if self.phase is not Phase.IN_STEP:
            raise IllegalTransition(self.phase, "record_action")
        self._actions.append(RecordedAction(action, failed=not ok))

    def end_step(self) -> None:
        if self.phase is not Phase.IN_STEP:
            raise IllegalTransition(self.phase, "end_step")
        if not self._actions:
            raise RecordError("cannot end a step with no recorded actions")
        self.steps.append(TaskStep(self._description, tuple(self._actions)))
        self._description = ""
        self._actions = []
        self.phase = Phase.IN_TASK

    def end_task(self, success: bool) -> HierarchicalTaskStructure:
        if self.phase is not Phase.IN_TASK:
            raise IllegalTransition(self.phase, "end_task")
        if success and not self.steps:
            raise RecordError("a successful task needs at least one step")
        structure = HierarchicalTaskStructure(
            goal=self.goal,
            scene_id=self.scene_id,
            annotator_id=self.annotator_id,
            steps=tuple(self.steps),
            success=success,
            goal_spec=self.goal_spec,
        )
        self.phase = Phase.IDLE
        self.goal = ""
        self.goal_spec = None
        self.steps = []
        return structure

    def abort(self) -> None:
        """Discard any partial recording and return to Idle."""
        self.phase = Phase.IDLE
        self.goal = ""
        self.goal_spec = None
        self.steps = []
        self._description = ""
        self._actions = []


def flatten(structure: HierarchicalTaskStructure) -> list[AtomicAction]:
    """Concatenated successful actions of every step, in execution order."""
    return [
        rec.action
        for step in structure.steps
        for rec in step.actions
        if not rec.failed
    ]


def structure_stats(structure: HierarchicalTaskStructure) -> tuple[int, int]:
    """(number of step descriptions, number of atomic actions)."""
    return len(structure.steps), len(flatten(structure))


def serialize(structure: HierarchicalTaskStructure) -> str:
    """Canonical `.hts.json` text; byte-stable for equal structures."""
    doc = {
        "hts_version": HTS_VERSION,
        "goal": structure.goal,
        "goal_spec": structure.goal_spec.to_json() if structure.goal_spec else None,
        "scene_id": structure.scene_id,
        "annotator_id": structure.annotator_id,
        "success": structure.success,
        "steps": [
            {
                "description": step.description,
                "actions": [rec.to_json() for rec in step.actions],
            }
            for step in structure.steps
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def deserialize(text: str) -> HierarchicalTaskStructure:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureParseError("document", str(exc)) from None
    if not isinstance(doc, dict):
        raise StructureParseError("document", "top level must be an object")
    if doc.get("hts_version") != HTS_VERSION:
        raise StructureParseError("hts_version", f"must be {HTS_VERSION}")
    for key in ("goal", "scene_id", "annotator_id", "success", "steps"):
        if key not in doc:
            raise StructureParseError(key)
    goal_spec = None
    if doc.get("goal_spec") is not None:
        try:
            goal_spec = GoalSpec.from_json(doc["goal_spec"])
        except (ValueError, KeyError) as exc:
            raise StructureParseError("goal_spec", str(exc)) from None
    steps = []
    for i, step_doc in enumerate(doc["steps"]):
        where = f"steps[{i}]"
        if not isinstance(step_doc, dict) or "description" not in step_doc:
            raise StructureParseError(where, "missing description")
        if "actions" not in step_doc or not isinstance(step_doc["actions"], list):
            raise StructureParseError(where, "missing actions list")
        steps.append(
            TaskStep(
                description=str(step_doc["description"]),
                actions=tuple(RecordedAction.from_json(a) for a in step_doc["actions"]),
            )
        )
    return HierarchicalTaskStructure(
        goal=str(doc["goal"]),
        scene_id=str(doc["scene_id"]),
        annotator_id=str(doc["annotator_id"]),
        steps=tuple(steps),
        success=bool(doc["success"]),
        goal_spec=goal_spec,
    )


def load_structure_file(path) -> HierarchicalTaskStructure:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize(fh.read())
