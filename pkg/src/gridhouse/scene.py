"""Scene model: grid rooms, object instances, validation, occupancy, seeded re-placement.

Conventions used across the package:

* Cells are ``(x, z)`` integer pairs with ``x`` in ``[0, width)`` and
  ``z`` in ``[0, depth)``.
* Heading 0 points along +z ("north"), 90 along +x ("east"), and so on
  clockwise.  Pitch is -30 (down), 0, or +30 (up).
* The grid boundary acts as an implicit wall; ``walls`` lists interior
  blocked cells only.
* An object's ``height`` is its own vertical extent in meters.  Objects
  stack: the absolute top of an object is its height plus the top of its
  parent receptacle (floor 0 when parentless).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional

Cell = tuple[int, int]

SCENE_VERSION = 1

HEADINGS = (0, 90, 180, 270)
PITCHES = (-30, 0, 30)

#: meters; the agent's camera height, shared by the renderer and refocus logic
EYE_HEIGHT_M = 0.9

_HEADING_VECTORS: dict[int, Cell] = {0: (0, 1), 90: (1, 0), 180: (0, -1), 270: (-1, 0)}


def heading_vector(heading: int) -> Cell:
    """Unit cell offset for a discrete heading."""
    return _HEADING_VECTORS[heading]


class SceneCategory(str, Enum):
    LIVING_ROOM = "LivingRoom"
    BEDROOM = "Bedroom"
    BATHROOM = "Bathroom"
    KITCHEN = "Kitchen"


class Capability(str, Enum):
    PICKUPABLE = "Pickupable"
    OPENABLE = "Openable"
    TOGGLEABLE = "Toggleable"
    BREAKABLE = "Breakable"
    RECEPTACLE = "Receptacle"


class SceneError(Exception):
    """Base class for scene loading problems."""


class SceneParseError(SceneError):
    """The document is not a well-formed scene file."""


class SceneValidationError(SceneError):
    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations)
        super().__init__(f"scene failed validation: {lines}")


class PlacementInfeasible(SceneError):
    def __init__(self, object_id: str):
        self.object_id = object_id
        super().__init__(f"no legal placement for object {object_id!r}")


@dataclass(frozen=True)
class ObjectState:
    """Dynamic state fields; each is present only when the matching capability is."""

    is_open: Optional[bool] = None
    is_on: Optional[bool] = None
    is_broken: Optional[bool] = None

    def to_json(self) -> dict:
        out = {}
        if self.is_open is not None:
            out["is_open"] = self.is_open
        if self.is_on is not None:
            out["is_on"] = self.is_on
        if self.is_broken is not None:
            out["is_broken"] = self.is_broken
        return out


@dataclass(frozen=True)
class ObjectInstance:
    id: str
    object_class: str
    cell: Cell
    height: float
    capabilities: frozenset[Capability]
    state: ObjectState = field(default_factory=ObjectState)
    parent_receptacle: Optional[str] = None

    def has(self, cap: Capability) -> bool:
        return cap in self.capabilities


@dataclass(frozen=True)
class AgentPose:
    cell: Cell
    heading: int = 0
    pitch: int = 0


@dataclass(frozen=True)
class Scene:
    id: str
    category: SceneCategory
    width: int
    depth: int
    cell_size: float
    walls: frozenset[Cell]
    objects: tuple[ObjectInstance, ...]
    agent_start: AgentPose

    def object_by_id(self, object_id: str) -> ObjectInstance:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    def in_bounds(self, cell: Cell) -> bool:
        x, z = cell
        return 0 <= x < self.width and 0 <= z < self.depth

    def object_top(self, object_id: str) -> float:
        """Absolute top of an object's stack in meters (floor = 0)."""
        top = 0.0
        seen = set()
        oid: Optional[str] = object_id
        while oid is not None and oid not in seen:
            seen.add(oid)
            obj = self.object_by_id(oid)
            top += obj.height
            oid = obj.parent_receptacle
        return top


@dataclass(frozen=True)
class Violation:
    rule: str
    entity: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.rule}({self.entity})" + (f": {self.detail}" if self.detail else "")


@dataclass(frozen=True)
class OccupancyGrid:
    """Cells the agent cannot stand on: walls plus non-pickupable solid objects."""

    width: int
    depth: int
    blocked: frozenset[Cell]

    def in_bounds(self, cell: Cell) -> bool:
        x, z = cell
        return 0 <= x < self.width and 0 <= z < self.depth

    def is_free(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.blocked

    def free_cells(self) -> list[Cell]:
        """All free cells in lexicographic (x, z) order."""
        return [
            (x, z)
            for x in range(self.width)
            for z in range(self.depth)
            if (x, z) not in self.blocked
        ]


# state fields tied to capabilities: (attribute, capability)
_STATE_CAPS = (
    ("is_open", Capability.OPENABLE),
    ("is_on", Capability.TOGGLEABLE),
    ("is_broken", Capability.BREAKABLE),
)


def validate_scene(scene: Scene) -> list[Violation]:
    """Check every scene invariant; an empty list means the scene is valid."""
    out: list[Violation] = []

    if scene.width < 2 or scene.depth < 2:
        out.append(Violation("SizeTooSmall", scene.id, f"{scene.width}x{scene.depth}"))
    if scene.cell_size <= 0:
        out.append(Violation("BadCellSize", scene.id, str(scene.cell_size)))

    for cell in sorted(scene.walls):
        if not scene.in_bounds(cell):
            out.append(Violation("WallOutOfBounds", str(cell)))

    ids: dict[str, ObjectInstance] = {}
    for obj in scene.objects:
        if obj.id in ids:
            out.append(Violation("DuplicateObjectId", obj.id))
            continue
        ids[obj.id] = obj

    for obj in scene.objects:
        if not scene.in_bounds(obj.cell):
            out.append(Violation("ObjectOutOfBounds", obj.id, str(obj.cell)))
        if obj.cell in scene.walls:
            out.append(Violation("ObjectOnWall", obj.id, str(obj.cell)))
        if obj.height <= 0:
            out.append(Violation("BadHeight", obj.id, str(obj.height)))
        for attr, cap in _STATE_CAPS:
            if getattr(obj.state, attr) is not None and cap not in obj.capabilities:
                out.append(Violation("StateWithoutCapability", obj.id, attr))

    for obj in scene.objects:
        pid = obj.parent_receptacle
        if pid is None:
            continue
        parent = ids.get(pid)
        if parent is None:
            out.append(Violation("DanglingParent", obj.id, pid))
            continue
        if Capability.RECEPTACLE not in parent.capabilities:
            out.append(Violation("ParentNotReceptacle", obj.id, pid))
        if parent.cell != obj.cell:
            out.append(Violation("ParentCellMismatch", obj.id, pid))
        # walk up to catch cycles
        seen = {obj.id}
        cur: Optional[str] = pid
        while cur is not None and cur in ids:
            if cur in seen:
                out.append(Violation("ParentCycle", obj.id, cur))
                break
            seen.add(cur)
            cur = ids[cur].parent_receptacle

    # at most one parentless solid object per cell
    roots: dict[Cell, list[str]] = {}
    for obj in scene.objects:
        if obj.parent_receptacle is None:
            roots.setdefault(obj.cell, []).append(obj.id)
    for cell, members in sorted(roots.items()):
        if len(members) > 1:
            out.append(Violation("CellConflict", ",".join(members), str(cell)))

    pose = scene.agent_start
    if not scene.in_bounds(pose.cell):
        out.append(Violation("AgentOutOfBounds", str(pose.cell)))
    elif pose.cell in scene.walls:
        out.append(Violation("AgentOnWall", str(pose.cell)))
    else:
        for obj in scene.objects:
            if obj.cell == pose.cell and not obj.has(Capability.PICKUPABLE):
                out.append(Violation("AgentBlocked", obj.id, str(pose.cell)))
                break
    if pose.heading not in HEADINGS:
        out.append(Violation("BadHeading", str(pose.heading)))
    if pose.pitch not in PITCHES:
        out.append(Violation("BadPitch", str(pose.pitch)))

    return out


def occupancy_grid(scene: Scene) -> OccupancyGrid:
    """Static occupancy: wall cells and cells holding non-pickupable objects block."""
    blocked = set(scene.walls)
    for obj in scene.objects:
        if not obj.has(Capability.PICKUPABLE):
            blocked.add(obj.cell)
    return OccupancyGrid(scene.width, scene.depth, frozenset(blocked))


def _parse_cell(value, where: str) -> Cell:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(c, int) and not isinstance(c, bool) for c in value)
    ):
        raise SceneParseError(f"{where}: expected [x, z] integer cell, got {value!r}")
    return (value[0], value[1])


def _parse_object(doc: dict, index: int) -> ObjectInstance:
    where = f"objects[{index}]"
    if not isinstance(doc, dict):
        raise SceneParseError(f"{where}: expected object record")
    for key in ("id", "class", "cell", "height", "capabilities"):
        if key not in doc:
            raise SceneParseError(f"{where}: missing field {key!r}")
    caps = set()
    for name in doc["capabilities"]:
        try:
            caps.add(Capability(name))
        except ValueError:
            raise SceneParseError(f"{where}: unknown capability {name!r}") from None
    state_doc = doc.get("state", {})
    if not isinstance(state_doc, dict):
        raise SceneParseError(f"{where}: state must be an object")
    known = {"is_open", "is_on", "is_broken"}
    unknown = set(state_doc) - known
    if unknown:
        raise SceneParseError(f"{where}: unknown state fields {sorted(unknown)}")
    return ObjectInstance(
        id=str(doc["id"]),
        object_class=str(doc["class"]),
        cell=_parse_cell(doc["cell"], where),
        height=float(doc["height"]),
        capabilities=frozenset(caps),
        state=ObjectState(**state_doc),
        parent_receptacle=doc.get("parent_receptacle"),
    )


def load_scene(text: str) -> Scene:
    """Parse and validate a `.scene.json` document.

    Raises SceneParseError on malformed input and SceneValidationError with
    the full violation list when the parsed scene breaks an invariant.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SceneParseError("top level must be an object")
    if doc.get("scene_version") != SCENE_VERSION:
        raise SceneParseError(f"scene_version must be {SCENE_VERSION}")
    for key in ("id", "category", "width", "depth", "cell_size", "walls", "objects", "agent_start"):
        if key not in doc:
            raise SceneParseError(f"missing field {key!r}")
    try:
        category = SceneCategory(doc["category"])
    except ValueError:
        raise SceneParseError(f"unknown category {doc['category']!r}") from None
    agent_doc = doc["agent_start"]
    if not isinstance(agent_doc, dict) or "cell" not in agent_doc:
        raise SceneParseError("agent_start: expected object with cell/heading/pitch")
    scene = Scene(
        id=str(doc["id"]),
        category=category,
        width=int(doc["width"]),
        depth=int(doc["depth"]),
        cell_size=float(doc["cell_size"]),
        walls=frozenset(_parse_cell(c, "walls") for c in doc["walls"]),
        objects=tuple(_parse_object(o, i) for i, o in enumerate(doc["objects"])),
        agent_start=AgentPose(
            cell=_parse_cell(agent_doc["cell"], "agent_start"),
            heading=int(agent_doc.get("heading", 0)),
            pitch=int(agent_doc.get("pitch", 0)),
        ),
    )
    violations = validate_scene(scene)
    if violations:
        raise SceneValidationError(violations)
    return scene


def scene_to_json(scene: Scene) -> str:
    """Canonical serialization; load_scene(scene_to_json(s)) reproduces s."""
    doc = {
        "scene_version": SCENE_VERSION,
        "id": scene.id,
        "category": scene.category.value,
        "width": scene.width,
        "depth": scene.depth,
        "cell_size": scene.cell_size,
        "walls": [list(c) for c in sorted(scene.walls)],
        "agent_start": {
            "cell": list(scene.agent_start.cell),
            "heading": scene.agent_start.heading,
            "pitch": scene.agent_start.pitch,
        },
        "objects": [
            {
                "id": o.id,
                "class": o.object_class,
                "cell": list(o.cell),
                "height": o.height,
                "capabilities": sorted(c.value for c in o.capabilities),
                "state": o.state.to_json(),
                "parent_receptacle": o.parent_receptacle,
            }
            for o in scene.objects
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_scene_file(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return load_scene(fh.read())


def _children(scene: Scene) -> dict[str, list[str]]:
    kids: dict[str, list[str]] = {}
    for obj in scene.objects:
        if obj.parent_receptacle is not None:
            kids.setdefault(obj.parent_receptacle, []).append(obj.id)
    return kids


def randomize_placements(scene: Scene, seed: int) -> Scene:
    """Reassign every pickupable object to a seeded uniform choice among
    compatible receptacles and free floor cells.

    Non-pickupable objects never move.  Pickupables that currently support
    other objects are left in place as well, so parent/cell links stay
    consistent.  The choice set is built exactly (no rejection sampling), so
    the same seed always yields the same scene and an empty choice set is
    reported as PlacementInfeasible.
    """
    rng = random.Random(seed)
    kids = _children(scene)
    placed: dict[str, ObjectInstance] = {o.id: o for o in scene.objects}

    def root_cells() -> set[Cell]:
        return {o.cell for o in placed.values() if o.parent_receptacle is None}

    for obj in scene.objects:
        if not obj.has(Capability.PICKUPABLE) or kids.get(obj.id):
            continue
        # receptacle targets: stationary receptacles other than the object itself
        receptacles = [
            o
            for o in scene.objects
            if o.id != obj.id
            and o.has(Capability.RECEPTACLE)
            and not o.has(Capability.PICKUPABLE)
        ]
        occupied = root_cells()
        if placed[obj.id].parent_receptacle is None:
            occupied -= {placed[obj.id].cell}  # may stay where it is
        floor = [
            (x, z)
            for x in range(scene.width)
            for z in range(scene.depth)
            if (x, z) not in scene.walls
            and (x, z) not in occupied
            and (x, z) != scene.agent_start.cell
        ]
        choices: list[tuple[str, object]] = [("receptacle", r) for r in receptacles]
        choices += [("floor", c) for c in floor]
        if not choices:
            raise PlacementInfeasible(obj.id)
        kind, target = choices[rng.randrange(len(choices))]
        if kind == "receptacle":
            placed[obj.id] = replace(obj, cell=target.cell, parent_receptacle=target.id)
        else:
            placed[obj.id] = replace(obj, cell=target, parent_receptacle=None)

    result = replace(scene, objects=tuple(placed[o.id] for o in scene.objects))
    violations = validate_scene(result)
    if violations:  # placement construction guarantees validity; guard anyway
        raise SceneValidationError(violations)
    return result


def solid_objects(scene: Scene) -> Iterable[ObjectInstance]:
    """Objects that currently occupy a grid cell (everything in a scene file)."""
    return scene.objects
