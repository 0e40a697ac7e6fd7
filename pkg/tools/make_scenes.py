"""Generate the bundled scene files under src/gridhouse/data/scenes/.

Run from the repository root:

    python3 tools/make_scenes.py

The layouts are authored here as plain data so the shipped JSON stays
reproducible; every scene is validated before it is written.
"""

from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gridhouse.scene import (
    AgentPose,
    Capability,
    ObjectInstance,
    ObjectState,
    Scene,
    SceneCategory,
    scene_to_json,
    validate_scene,
)

P = Capability.PICKUPABLE
O = Capability.OPENABLE
T = Capability.TOGGLEABLE
B = Capability.BREAKABLE
R = Capability.RECEPTACLE

# class -> (height in meters, capabilities)
CLASSES: dict[str, tuple[float, frozenset[Capability]]] = {
    "CounterTop": (0.9, frozenset({R})),
    "CoffeeMachine": (0.4, frozenset({T, R})),
    "DiningTable": (0.8, frozenset({R})),
    "CoffeeTable": (0.45, frozenset({R})),
    "Sink": (0.85, frozenset({R})),
    "Fridge": (1.8, frozenset({O, R})),
    "Cabinet": (1.0, frozenset({O, R})),
    "Toaster": (0.25, frozenset({T})),
    "Mug": (0.35, frozenset({P})),
    "Egg": (0.15, frozenset({P, B})),
    "Apple": (0.08, frozenset({P})),
    "Toilet": (0.75, frozenset({R})),
    "Towel": (0.1, frozenset({P})),
    "Toothbrush": (0.05, frozenset({P})),
    "Bed": (0.6, frozenset({R})),
    "Dresser": (1.0, frozenset({O, R})),
    "NightStand": (0.5, frozenset({R})),
    "Lamp": (0.5, frozenset({T})),
    "Book": (0.06, frozenset({P})),
    "Phone": (0.05, frozenset({P, T})),
    "Sofa": (0.8, frozenset({R})),
    "TV": (0.9, frozenset({T})),
    "RemoteControl": (0.04, frozenset({P})),
    "Vase": (0.4, frozenset({P, B})),
    "FloorLamp": (1.6, frozenset({T})),
}


def _snake(cls: str) -> str:
    out = []
    for i, ch in enumerate(cls):
        if ch.isupper() and i and not cls[i - 1].isupper():
            out.append("_")
        out.append(ch.lower())
    return "".join(out)


def _default_state(caps: frozenset[Capability]) -> ObjectState:
    return ObjectState(
        is_open=False if O in caps else None,
        is_on=False if T in caps else None,
        is_broken=False if B in caps else None,
    )


class Builder:
    def __init__(self, scene_id, category, width, depth, walls, agent):
        self.scene_id = scene_id
        self.category = category
        self.width = width
        self.depth = depth
        self.walls = frozenset(walls)
        self.agent = agent
        self.objects: list[ObjectInstance] = []
        self._counts: dict[str, int] = {}

    def add(self, cls, cell=None, parent=None) -> str:
        """Add an instance; ``parent`` is another instance id (cell inherited)."""
        height, caps = CLASSES[cls]
        n = self._counts.get(cls, 0)
        self._counts[cls] = n + 1
        oid = f"{_snake(cls)}_{n}"
        if parent is not None:
            cell = next(o.cell for o in self.objects if o.id == parent)
        assert cell is not None, oid
        self.objects.append(
            ObjectInstance(
                id=oid,
                object_class=cls,
                cell=cell,
                height=height,
                capabilities=caps,
                state=_default_state(caps),
                parent_receptacle=parent,
            )
        )
        return oid

    def build(self) -> Scene:
        scene = Scene(
            id=self.scene_id,
            category=self.category,
            width=self.width,
            depth=self.depth,
            cell_size=0.25,
            walls=self.walls,
            objects=tuple(self.objects),
            agent_start=self.agent,
        )
        problems = validate_scene(scene)
        if problems:
            raise SystemExit(f"{self.scene_id}: {problems}")
        return scene


def vwall(x, z0, z1):
    return {(x, z) for z in range(z0, z1 + 1)}


def hwall(x0, x1, z):
    return {(x, z) for x in range(x0, x1 + 1)}


def kitchen_01():
    b = Builder("kitchen_01", SceneCategory.KITCHEN, 12, 12, vwall(6, 7, 11), AgentPose((3, 2), 0, 0))
    c0 = b.add("CounterTop", (1, 11))
    c1 = b.add("CounterTop", (2, 11))
    c2 = b.add("CounterTop", (3, 11))
    b.add("CoffeeMachine", parent=c1)
    b.add("Egg", parent=c0)
    b.add("Toaster", parent=c2)
    b.add("Sink", (4, 11))
    t = b.add("DiningTable", (9, 8))
    b.add("Mug", parent=t)
    b.add("Apple", parent=t)
    return b.build()


def kitchen_02():
    b = Builder("kitchen_02", SceneCategory.KITCHEN, 14, 10, hwall(5, 8, 5), AgentPose((7, 2), 0, 0))
    c0 = b.add("CounterTop", (1, 9))
    c1 = b.add("CounterTop", (2, 9))
    c2 = b.add("CounterTop", (3, 9))
    b.add("CoffeeMachine", parent=c0)
    b.add("Egg", parent=c1)
    b.add("Toaster", parent=c2)
    b.add("Sink", (4, 9))
    t = b.add("DiningTable", (11, 2))
    b.add("Mug", parent=t)
    return b.build()


def kitchen_03():
    b = Builder("kitchen_03", SceneCategory.KITCHEN, 10, 10, set(), AgentPose((4, 4), 90, 0))
    c0 = b.add("CounterTop", (1, 9))
    c1 = b.add("CounterTop", (2, 9))
    b.add("CoffeeMachine", parent=c1)
    b.add("Egg", parent=c0)
    b.add("Sink", (3, 9))
    t = b.add("DiningTable", (7, 3))
    b.add("Mug", parent=t)
    b.add("Apple", parent=t)
    return b.build()


def kitchen_04():
    b = Builder("kitchen_04", SceneCategory.KITCHEN, 16, 12, vwall(8, 0, 4), AgentPose((4, 2), 90, 0))
    c0 = b.add("CounterTop", (14, 11))
    c1 = b.add("CounterTop", (15, 11))
    b.add("CoffeeMachine", parent=c0)
    b.add("Egg", parent=c1)
    b.add("Mug", parent=c1)
    b.add("Sink", (12, 11))
    t = b.add("DiningTable", (3, 8))
    b.add("Apple", parent=t)
    return b.build()


def kitchen_05():
    b = Builder("kitchen_05", SceneCategory.KITCHEN, 12, 10, set(), AgentPose((6, 3), 180, 0))
    c0 = b.add("CounterTop", (1, 0))
    c1 = b.add("CounterTop", (2, 0))
    c2 = b.add("CounterTop", (4, 0))
    b.add("CoffeeMachine", parent=c0)
    b.add("Egg", parent=c1)
    b.add("Toaster", parent=c2)
    b.add("Sink", (3, 0))
    t = b.add("DiningTable", (8, 6))
    b.add("Mug", parent=t)
    return b.build()


def kitchen_06():
    b = Builder("kitchen_06", SceneCategory.KITCHEN, 13, 13, hwall(2, 6, 6), AgentPose((6, 10), 180, 0))
    c0 = b.add("CounterTop", (11, 1))
    c1 = b.add("CounterTop", (11, 2))
    b.add("CoffeeMachine", parent=c0)
    b.add("Egg", parent=c1)
    b.add("Sink", (11, 3))
    t = b.add("DiningTable", (3, 10))
    b.add("Mug", parent=t)
    b.add("Apple", parent=t)
    return b.build()


def kitchen_07():
    b = Builder("kitchen_07", SceneCategory.KITCHEN, 11, 11, set(), AgentPose((5, 5), 90, 0))
    c0 = b.add("CounterTop", (9, 9))
    c1 = b.add("CounterTop", (9, 8))
    m = b.add("CoffeeMachine", parent=c0)
    b.add("Mug", parent=m)
    b.add("Egg", parent=c1)
    b.add("Sink", (9, 7))
    b.add("DiningTable", (2, 2))
    return b.build()


def kitchen_08():
    b = Builder("kitchen_08", SceneCategory.KITCHEN, 15, 9, set(), AgentPose((8, 2), 0, 0))
    c0 = b.add("CounterTop", (1, 8))
    c1 = b.add("CounterTop", (2, 8))
    c2 = b.add("CounterTop", (3, 8))
    b.add("CoffeeMachine", parent=c1)
    b.add("Egg", parent=c0)
    b.add("Toaster", parent=c2)
    b.add("Sink", (4, 8))
    t = b.add("DiningTable", (11, 4))
    b.add("Mug", parent=t)
    b.add("Apple", parent=t)
    return b.build()


def kitchen_09():
    b = Builder("kitchen_09", SceneCategory.KITCHEN, 12, 12, set(), AgentPose((3, 3), 0, 0))
    c0 = b.add("CounterTop", (1, 11))
    c1 = b.add("CounterTop", (2, 11))
    b.add("CoffeeMachine", parent=c0)
    b.add("Egg", parent=c1)
    b.add("Sink", (3, 11))
    b.add("Fridge", (10, 11))
    t = b.add("DiningTable", (6, 6))
    b.add("Mug", parent=t)
    return b.build()


def kitchen_10():
    b = Builder("kitchen_10", SceneCategory.KITCHEN, 14, 14, vwall(7, 9, 13), AgentPose((5, 3), 0, 0))
    c0 = b.add("CounterTop", (1, 13))
    c1 = b.add("CounterTop", (2, 13))
    b.add("CoffeeMachine", parent=c1)
    b.add("Egg", parent=c0)
    b.add("Sink", (3, 13))
    b.add("Fridge", (12, 1))
    b.add("Cabinet", (12, 12))
    t = b.add("DiningTable", (10, 10))
    b.add("Mug", parent=t)
    return b.build()


def bathroom_01():
    b = Builder("bathroom_01", SceneCategory.BATHROOM, 9, 9, set(), AgentPose((4, 2), 0, 0))
    s = b.add("Sink", (4, 8))
    toilet = b.add("Toilet", (7, 7))
    b.add("Towel", parent=toilet)
    b.add("Toothbrush", parent=s)
    return b.build()


def bathroom_02():
    b = Builder("bathroom_02", SceneCategory.BATHROOM, 10, 8, vwall(5, 4, 7), AgentPose((5, 1), 0, 0))
    s = b.add("Sink", (1, 7))
    toilet = b.add("Toilet", (8, 6))
    b.add("Towel", parent=toilet)
    b.add("Toothbrush", parent=s)
    return b.build()


def bedroom_01():
    b = Builder("bedroom_01", SceneCategory.BEDROOM, 11, 9, set(), AgentPose((5, 2), 0, 0))
    bed = b.add("Bed", (2, 7))
    ns = b.add("NightStand", (4, 7))
    b.add("Lamp", parent=ns)
    b.add("Phone", parent=ns)
    b.add("Dresser", (9, 7))
    b.add("Book", parent=bed)
    return b.build()


def bedroom_02():
    b = Builder("bedroom_02", SceneCategory.BEDROOM, 12, 10, vwall(4, 5, 9), AgentPose((6, 2), 0, 0))
    bed = b.add("Bed", (9, 8))
    ns = b.add("NightStand", (7, 8))
    b.add("Lamp", parent=ns)
    b.add("Book", parent=ns)
    b.add("Phone", parent=bed)
    b.add("Dresser", (1, 8))
    return b.build()


def livingroom_01():
    b = Builder("livingroom_01", SceneCategory.LIVING_ROOM, 12, 11, set(), AgentPose((6, 4), 270, 0))
    b.add("Sofa", (2, 8))
    b.add("TV", (2, 0))
    ct = b.add("CoffeeTable", (2, 5))
    b.add("RemoteControl", parent=ct)
    b.add("Vase", parent=ct)
    b.add("FloorLamp", (10, 9))
    return b.build()


def livingroom_02():
    b = Builder("livingroom_02", SceneCategory.LIVING_ROOM, 14, 12, vwall(6, 0, 3), AgentPose((7, 7), 90, 0))
    sofa = b.add("Sofa", (11, 9))
    b.add("TV", (11, 1))
    ct = b.add("CoffeeTable", (11, 5))
    b.add("RemoteControl", parent=sofa)
    b.add("Vase", parent=ct)
    b.add("Book", parent=ct)
    b.add("FloorLamp", (1, 10))
    return b.build()


BUILDERS = [
    kitchen_01, kitchen_02, kitchen_03, kitchen_04, kitchen_05,
    kitchen_06, kitchen_07, kitchen_08, kitchen_09, kitchen_10,
    bathroom_01, bathroom_02,
    bedroom_01, bedroom_02,
    livingroom_01, livingroom_02,
]


def main() -> None:
    out_dir = os.path.join(os.path.dirname(__file__), "..", "src", "gridhouse", "data", "scenes")
    os.makedirs(out_dir, exist_ok=True)
    for build in BUILDERS:
        scene = build()
        path = os.path.join(out_dir, f"{scene.id}.scene.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(scene_to_json(scene))
        print(f"wrote {os.path.relpath(path)}")


if __name__ == "__main__":
    main()
