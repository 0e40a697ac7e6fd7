"""Demonstration retargeting: replay a recorded structure in a new scene.

A recorded task keeps its goal, step descriptions and interaction skeleton;
navigation is scene-specific and therefore dropped and re-synthesized.  For
every interaction the engine matches the source target to an object of the
same class in the new scene, walks the agent to the nearest workable pose
(BFS), turns and tilts to face the object, then emits the interaction with
the remapped id.  The synthesized trace is executed while it is built, so a
report marked Success has already replayed cleanly and satisfied the goal.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

from gridhouse.actions import (
    ActionKind,
    AtomicAction,
    NAVIGATION_KINDS,
    trace_to_json,
)
from gridhouse.env import INTERACTION_RANGE, Environment, init_env
from gridhouse.goals import UnknownObjectClass, check_goal
from gridhouse.nav import (
    Unreachable,
    bfs_reachability,
    path_to_actions,
    pitch_actions,
    pitch_for_top,
    rotations,
    shortest_path,
)
from gridhouse.record import HierarchicalTaskStructure, RecordedAction, TaskStep
from gridhouse.scene import (
    AgentPose,
    Cell,
    Scene,
    heading_vector,
    occupancy_grid,
    randomize_placements,
)

AUG_VERSION = 1

NO_SUCH_CLASS = "NoSuchClass"
UNREACHABLE = "Unreachable"
GOAL_UNSATISFIED = "GoalUnsatisfied"


class NoSuchClass(Exception):
    def __init__(self, object_class: str):
        self.object_class = object_class
        super().__init__(f"no object of class {object_class!r} in target scene")


@dataclass(frozen=True)
class RetargetReport:
    source_id: str
    scene_id: str
    placement_seed: Optional[int]
    ok: bool
    trace: Optional[tuple[AtomicAction, ...]] = None
    final_digest: Optional[str] = None
    inserted_nav_actions: int = 0
    step_index: Optional[int] = None
    reason: Optional[str] = None
    detail: str = ""
    structure: Optional[HierarchicalTaskStructure] = None

    def to_json(self) -> dict:
        out = {
            "source": self.source_id,
            "scene": self.scene_id,
            "placement_seed": self.placement_seed,
            "outcome": "Success" if self.ok else "Failure",
            "inserted_nav_actions": self.inserted_nav_actions,
        }
        if self.ok:
            out["final_digest"] = self.final_digest
            out["actions"] = len(self.trace)
        else:
            out["step_index"] = self.step_index
            out["reason"] = self.reason
            if self.detail:
                out["detail"] = self.detail
        return out


class _Abort(Exception):
    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        self.detail = detail


def _approach_distance(cell: Cell, dist_map) -> Optional[int]:
    """BFS distance to a cell or, when it is blocked, its nearest neighbor."""
    best = None
    for cand in (cell, *( (cell[0] + dx, cell[1] + dz)
                          for dx, dz in ((0, 1), (1, 0), (0, -1), (-1, 0)) )):
        d = dist_map.get(cand)
        if d is not None and (best is None or d < best):
            best = d
    return best


def match_object(source_ref: tuple[str, str], target_scene: Scene) -> str:
    """Pick the target-scene instance standing in for a source object.

    Same class, nearest to the agent start by BFS approach distance; ties
    (including everything-unreachable) fall to scene object order.
    """
    _, object_class = source_ref
    candidates = [
        (i, o) for i, o in enumerate(target_scene.objects)
        if o.object_class == object_class
    ]
    if not candidates:
        raise NoSuchClass(object_class)
    dist_map = bfs_reachability(
        occupancy_grid(target_scene), target_scene.agent_start.cell)
    inf = target_scene.width * target_scene.depth + 1
    best = min(
        candidates,
        key=lambda pair: (_approach_distance(pair[1].cell, dist_map) or inf, pair[0]),
    )
    return best[1].id


def _poses_toward(grid, reachable, obj_cell: Cell, pitch: int):
    """(cell, heading, pitch) poses within interaction range with clear sight."""
    poses = []
    for heading in (0, 90, 180, 270):
        dx, dz = heading_vector(heading)
        for r in range(1, INTERACTION_RANGE + 1):
            cell = (obj_cell[0] - dx * r, obj_cell[1] - dz * r)
            if not grid.is_free(cell) or cell not in reachable:
                continue
            between = [
                (cell[0] + dx * k, cell[1] + dz * k) for k in range(1, r)
            ]
            if any(not grid.is_free(b) for b in between):
                continue
            poses.append(AgentPose(cell=cell, heading=heading, pitch=pitch))
    return sorted(poses, key=lambda p: (p.cell, p.heading))


def interaction_poses(scene: Scene, object_id: str) -> list:
    """All poses from which the object can be manipulated, in canonical order.

    Cells must be free and reachable from the agent start; sight along the
    facing line must be clear.  Pitch is set toward the object's stack top.
    """
    obj = scene.object_by_id(object_id)
    grid = occupancy_grid(scene)
    reachable = bfs_reachability(grid, scene.agent_start.cell)
    pitch = pitch_for_top(scene.object_top(object_id))
    return _poses_toward(grid, reachable, obj.cell, pitch)


def interaction_poses_env(env: Environment, object_id: str) -> list:
    """interaction_poses against an environment's current object placement."""
    cell = env.objects[object_id].cell
    if cell is None:
        return []
    reachable = bfs_reachability(env.occupancy, env.agent.cell)
    return _poses_toward(env.occupancy, reachable, cell,
                         pitch_for_top(env.object_top(object_id)))


def floor_poses(env: Environment):
    """Poses whose facing cell accepts a floor placement right now."""
    grid = env.occupancy
    reachable = bfs_reachability(grid, env.agent.cell)
    roots = {dyn.cell for dyn in env.objects.values()
             if dyn.parent is None and dyn.cell is not None}
    held = env.held
    pitch = pitch_for_top(env.scene.object_by_id(held).height if held else 0.0)
    poses = []
    for x in range(env.scene.width):
        for z in range(env.scene.depth):
            cell = (x, z)
            if not grid.is_free(cell) or cell not in reachable:
                continue
            for heading in (0, 90, 180, 270):
                dx, dz = heading_vector(heading)
                facing = (x + dx, z + dz)
                if (env.scene.in_bounds(facing)
                        and facing not in env.scene.walls
                        and facing not in roots):
                    poses.append(AgentPose(cell=cell, heading=heading, pitch=pitch))
    return sorted(poses, key=lambda p: (p.cell, p.heading))


def plan_approach(env: Environment, poses) -> list[AtomicAction]:
    """Movement actions taking the agent to the BFS-nearest pose.

    Pure planning: the environment is not touched.  The nearest pose wins;
    path ties follow shortest_path's expansion order.  Raises Unreachable
    when poses is empty or no pose cell can be reached.
    """
    if not poses:
        raise Unreachable("no workable pose")
    by_cell = {}
    for pose in poses:
        by_cell.setdefault(pose.cell, pose)
    path = shortest_path(env.occupancy, env.agent.cell, set(by_cell))
    end = path[-1] if path else env.agent.cell
    pose = by_cell[end]
    moves = path_to_actions([env.agent.cell] + path, env.agent.heading)
    # heading after the walk is the direction of its last move
    heading = env.agent.heading
    for act in moves:
        if act.kind is ActionKind.ROTATE_LEFT:
            heading = (heading - 90) % 360
        elif act.kind is ActionKind.ROTATE_RIGHT:
            heading = (heading + 90) % 360
    return (moves + rotations(heading, pose.heading)
            + pitch_actions(env.agent.pitch, pose.pitch))


def _drive_to(env: Environment, poses, trace: list[AtomicAction]) -> int:
    """Navigate + refocus to the best pose; returns inserted action count."""
    try:
        actions = plan_approach(env, poses)
    except Unreachable as exc:
        raise _Abort(UNREACHABLE, str(exc)) from None
    for act in actions:
        if not env.step(act).ok:  # free-cell path: cannot happen
            raise _Abort(UNREACHABLE, f"navigation failed at {act.label()}")
        trace.append(act)
    return len(actions)


def retarget(structure: HierarchicalTaskStructure, target_scene: Scene,
             source_scene: Scene,
             placement_seed: Optional[int] = None) -> RetargetReport:
    """Re-ground a structure in target_scene; see the module docstring.

    source_scene resolves source target ids to classes (the structure only
    stores ids).  The report is Success only when the full synthesized trace
    replayed without failed interactions and the goal check passed.
    """
    source_id = structure.digest()
    env = init_env(target_scene)
    id_map: dict[str, str] = {}
    trace: list[AtomicAction] = []
    inserted = 0
    new_steps: list[TaskStep] = []

    def fail(step_index, reason, detail=""):
        return RetargetReport(
            source_id=source_id, scene_id=target_scene.id,
            placement_seed=placement_seed, ok=False,
            inserted_nav_actions=inserted, step_index=step_index,
            reason=reason, detail=detail)

    for step_index, step in enumerate(structure.steps):
        new_actions: list[RecordedAction] = []
        for rec in step.actions:
            if rec.failed or rec.action.kind in NAVIGATION_KINDS:
                continue
            action = rec.action
            try:
                if action.target is not None:
                    if action.target not in id_map:
                        try:
                            src_obj = source_scene.object_by_id(action.target)
                        except KeyError:
                            raise _Abort(
                                NO_SUCH_CLASS,
                                f"{action.target!r} not in source scene")
                        try:
                            id_map[action.target] = match_object(
                                (src_obj.id, src_obj.object_class), target_scene)
                        except NoSuchClass as exc:
                            raise _Abort(NO_SUCH_CLASS, str(exc))
                    mapped = id_map[action.target]
                    if env.objects[mapped].cell is None:
                        raise _Abort(UNREACHABLE, f"{mapped} is in hand")
                    inserted += _drive_to(
                        env, interaction_poses_env(env, mapped), trace)
                    emit = AtomicAction(action.kind, mapped)
                else:
                    inserted += _drive_to(env, floor_poses(env), trace)
                    emit = action
            except _Abort as abort:
                return fail(step_index, abort.reason, abort.detail)
            event = env.step(emit)
            if not event.ok:
                return fail(step_index, GOAL_UNSATISFIED,
                            f"{emit.label()} failed: {event.reason}")
            trace.append(emit)
            new_actions.append(RecordedAction(emit))
        if new_actions:
            new_steps.append(TaskStep(step.description, tuple(new_actions)))

    if structure.goal_spec is not None:
        try:
            satisfied = check_goal(env, structure.goal_spec)
        except UnknownObjectClass as exc:
            # the goal names a class the target scene does not have
            return fail(None, NO_SUCH_CLASS, str(exc))
        if not satisfied:
            return fail(None, GOAL_UNSATISFIED, "goal check failed after replay")

    new_structure = HierarchicalTaskStructure(
        goal=structure.goal,
        scene_id=target_scene.id,
        annotator_id=structure.annotator_id,
        steps=tuple(new_steps),
        success=True,
        goal_spec=structure.goal_spec,
    )
    return RetargetReport(
        source_id=source_id, scene_id=target_scene.id,
        placement_seed=placement_seed, ok=True, trace=tuple(trace),
        final_digest=env.state_hash(), inserted_nav_actions=inserted,
        structure=new_structure)


def augment_batch(structure: HierarchicalTaskStructure, source_scene: Scene,
                  target_scenes: list[Scene], placements_per_scene: int,
                  seed: int) -> list[RetargetReport]:
    """One retarget per scene x placement variant, in canonical order.

    Placement seeds are seed + scene_index * 1000 + placement_index, so a
    batch is reproducible and individual runs can be replayed in isolation.
    """
    if placements_per_scene < 1:
        raise ValueError("placements_per_scene must be >= 1")
    reports = []
    for scene_index, scene in enumerate(target_scenes):
        for placement_index in range(placements_per_scene):
            placement_seed = seed + scene_index * 1000 + placement_index
            variant = randomize_placements(scene, placement_seed)
            reports.append(
                retarget(structure, variant, source_scene,
                         placement_seed=placement_seed))
    return reports


def write_aug_manifest(directory, structure: HierarchicalTaskStructure,
                       reports: list[RetargetReport], seed: int,
                       placements_per_scene: int) -> dict:
    """Write `.aug.json` plus one `.trace.json` per successful retarget."""
    os.makedirs(directory, exist_ok=True)
    records = []
    for i, report in enumerate(reports):
        record = report.to_json()
        if report.ok:
            name = f"retarget_{i:03d}.trace.json"
            with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
                fh.write(trace_to_json(list(report.trace)))
            record["trace"] = name
        else:
            record["trace"] = None
        records.append(record)
    manifest = {
        "aug_version": AUG_VERSION,
        "source": structure.digest(),
        "goal": structure.goal,
        "seed": seed,
        "placements_per_scene": placements_per_scene,
        "results": records,
    }
    path = os.path.join(directory, "manifest.aug.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
