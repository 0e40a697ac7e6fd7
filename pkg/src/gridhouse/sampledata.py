"""Scripted demonstrations and a small sample dataset.

These drive a real environment through the recorder exactly like a human
demonstrator would, so the bundled fixtures stay consistent with simulator
semantics no matter how scenes are edited.  Everything here is
deterministic: same scene in, same structure out.
"""

from __future__ import annotations

from typing import Optional

from gridhouse.actions import ActionKind, AtomicAction
from gridhouse.augment import floor_poses, interaction_poses_env, plan_approach
from gridhouse.env import Environment, init_env
from gridhouse.goals import GoalSpec, Predicate, check_goal
from gridhouse.record import HierarchicalTaskStructure, RecorderSession
from gridhouse.scene import Scene
from gridhouse.store import ORIGIN_HUMAN, save_instance


class DemonstrationError(Exception):
    pass


def _first_of_class(scene: Scene, object_class: str) -> str:
    for obj in scene.objects:
        if obj.object_class == object_class:
            return obj.id
    raise DemonstrationError(f"scene {scene.id} has no {object_class}")


class _Scripter:
    """Executes planned actions while feeding the recorder."""

    def __init__(self, scene: Scene, annotator_id: str = "scripted"):
        self.env: Environment = init_env(scene)
        self.recorder = RecorderSession(scene_id=scene.id,
                                        annotator_id=annotator_id)

    def do(self, action: AtomicAction) -> None:
        event = self.env.step(action)
        self.recorder.record_action(action, event.ok)
        if not event.ok:
            raise DemonstrationError(
                f"scripted action {action.label()} failed: {event.reason}")

    def approach(self, object_id: str) -> None:
        for action in plan_approach(self.env,
                                    interaction_poses_env(self.env, object_id)):
            self.do(action)

    def approach_floor(self) -> None:
        for action in plan_approach(self.env, floor_poses(self.env)):
            self.do(action)

    def interact(self, kind: ActionKind, target: Optional[str] = None) -> None:
        self.do(AtomicAction(kind, target))

    def finish(self, goal_spec: Optional[GoalSpec]) -> HierarchicalTaskStructure:
        structure = self.recorder.end_task(success=True)
        if goal_spec is not None and not check_goal(self.env, goal_spec):
            raise DemonstrationError("demonstration did not reach its goal")
        return structure


def demonstrate_coffee(scene: Scene) -> HierarchicalTaskStructure:
    """Four-step coffee demonstration on a kitchen scene.

    Needs a Mug, a CoffeeMachine and a CounterTop.  Navigation is planned
    against the scene as given, so the same script works on any layout.
    """
    mug = _first_of_class(scene, "Mug")
    machine = _first_of_class(scene, "CoffeeMachine")
    counter = _first_of_class(scene, "CounterTop")
    goal_spec = GoalSpec((
        Predicate.object_in("Mug", "CounterTop"),
        Predicate.agent_holds(None),
    ))

    s = _Scripter(scene)
    s.recorder.begin_task("make a cup of coffee", goal_spec)

    s.recorder.begin_step("find the mug")
    s.approach(mug)
    s.recorder.end_step()

    s.recorder.begin_step("find the coffee machine")
    s.approach(machine)
    s.recorder.end_step()

    s.recorder.begin_step("use the coffee machine")
    s.interact(ActionKind.TOGGLE_ON, machine)
    s.interact(ActionKind.TOGGLE_OFF, machine)
    s.recorder.end_step()

    s.recorder.begin_step("serve the coffee")
    s.approach(mug)
    s.interact(ActionKind.PICKUP_OBJECT, mug)
    s.approach(counter)
    s.interact(ActionKind.PUT_OBJECT, counter)
    s.recorder.end_step()

    return s.finish(goal_spec)


def demonstrate_crack_egg(scene: Scene) -> HierarchicalTaskStructure:
    """Two-step demonstration of the egg-dropping rule."""
    egg = _first_of_class(scene, "Egg")
    goal_spec = GoalSpec((
        Predicate.object_in_state("Egg", "is_broken", True),
        Predicate.agent_holds(None),
    ))

    s = _Scripter(scene)
    s.recorder.begin_task("crack an egg", goal_spec)

    s.recorder.begin_step("find the egg")
    s.approach(egg)
    s.recorder.end_step()

    s.recorder.begin_step("crack the egg open")
    s.interact(ActionKind.PICKUP_OBJECT, egg)
    s.approach_floor()
    s.interact(ActionKind.DROP_HAND_OBJECT)
    s.recorder.end_step()

    return s.finish(goal_spec)


def demonstrate_towel(scene: Scene) -> HierarchicalTaskStructure:
    """Two-step bathroom demonstration: towel onto the sink."""
    towel = _first_of_class(scene, "Towel")
    sink = _first_of_class(scene, "Sink")
    goal_spec = GoalSpec((
        Predicate.object_in("Towel", "Sink"),
        Predicate.agent_holds(None),
    ))

    s = _Scripter(scene)
    s.recorder.begin_task("hang the towel by the sink", goal_spec)

    s.recorder.begin_step("find the towel")
    s.approach(towel)
    s.recorder.end_step()

    s.recorder.begin_step("put the towel on the sink")
    s.interact(ActionKind.PICKUP_OBJECT, towel)
    s.approach(sink)
    s.interact(ActionKind.PUT_OBJECT, sink)
    s.recorder.end_step()

    return s.finish(goal_spec)


def build_sample_dataset(root, scenes: dict[str, Scene]) -> list[str]:
    """Populate a dataset root with the bundled demonstrations.

    Three kitchen instances (coffee on two layouts, one egg) and two
    bathroom instances, all Human origin; returns the instance ids.  The
    composition is fixed so statistics tests can count by hand.
    """
    jobs = [
        ("kitchen_01", demonstrate_coffee),
        ("kitchen_02", demonstrate_coffee),
        ("kitchen_01", demonstrate_crack_egg),
        ("bathroom_01", demonstrate_towel),
        ("bathroom_02", demonstrate_towel),
    ]
    ids = []
    for scene_id, demo in jobs:
        scene = scenes[scene_id]
        structure = demo(scene)
        ids.append(save_instance(root, scene, structure, origin=ORIGIN_HUMAN))
    return ids
