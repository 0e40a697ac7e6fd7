"""Grid navigation: breadth-first reachability, shortest paths, and the
rotation arithmetic that points the agent at a target.

Neighbor expansion order is fixed to N, E, S, W (+z, +x, -z, -x) so every
search result is deterministic.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from gridhouse.actions import ActionKind, AtomicAction
from gridhouse.scene import AgentPose, Cell, OccupancyGrid, heading_vector

NEIGHBOR_ORDER: tuple[Cell, ...] = ((0, 1), (1, 0), (0, -1), (-1, 0))

# refocus pitch bands: object stack top relative to these thresholds (meters)
PITCH_DOWN_BELOW_M = 0.6
PITCH_UP_ABOVE_M = 1.4


class NavError(Exception):
    pass


class StartBlocked(NavError):
    pass


class Unreachable(NavError):
    pass


class NonAdjacentPath(NavError):
    pass


@dataclass(frozen=True)
class DistanceMap:
    """BFS distances from an origin over free cells; unmapped means unreachable."""

    origin: Cell
    distances: dict[Cell, int]

    def __contains__(self, cell: Cell) -> bool:
        return cell in self.distances

    def get(self, cell: Cell) -> Optional[int]:
        return self.distances.get(cell)


def bfs_reachability(grid: OccupancyGrid, start: Cell) -> DistanceMap:
    """Exact BFS distances over 4-connected free cells."""
    if not grid.is_free(start):
        raise StartBlocked(f"start cell {start} is blocked")
    dist = {start: 0}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        d = dist[cell]
        for dx, dz in NEIGHBOR_ORDER:
            nxt = (cell[0] + dx, cell[1] + dz)
            if grid.is_free(nxt) and nxt not in dist:
                dist[nxt] = d + 1
                queue.append(nxt)
    return DistanceMap(start, dist)


def shortest_path(grid: OccupancyGrid, start: Cell, goals: Iterable[Cell]) -> list[Cell]:
    """Minimal path from start to the nearest reachable goal cell.

    Returns the cells after start, so the list length equals the move count;
    empty when start is itself a goal.  The first goal reached in BFS visit
    order wins, which resolves distance ties deterministically.
    """
    goal_set = set(goals)
    if not goal_set:
        raise ValueError("goals must be non-empty")
    if not grid.is_free(start):
        raise StartBlocked(f"start cell {start} is blocked")
    if start in goal_set:
        return []
    parent: dict[Cell, Optional[Cell]] = {start: None}
    queue = deque([start])
    while queue:
        cell = queue.popleft()
        for dx, dz in NEIGHBOR_ORDER:
            nxt = (cell[0] + dx, cell[1] + dz)
            if not grid.is_free(nxt) or nxt in parent:
                continue
            parent[nxt] = cell
            if nxt in goal_set:
                path = [nxt]
                cur = cell
                while cur != start:
                    path.append(cur)
                    cur = parent[cur]
                path.reverse()
                return path
            queue.append(nxt)
    raise Unreachable(f"no goal in {sorted(goal_set)} reachable from {start}")


def heading_between(a: Cell, b: Cell) -> int:
    """Heading for a single-cell step from a to b."""
    delta = (b[0] - a[0], b[1] - a[1])
    for heading in (0, 90, 180, 270):
        if heading_vector(heading) == delta:
            return heading
    raise NonAdjacentPath(f"cells {a} and {b} are not 4-adjacent")


def rotations(from_heading: int, to_heading: int) -> list[AtomicAction]:
    """Shortest rotation sequence; a 180-degree turn is two RotateRight."""
    diff = (to_heading - from_heading) % 360
    if diff == 0:
        return []
    if diff == 90:
        return [AtomicAction(ActionKind.ROTATE_RIGHT)]
    if diff == 270:
        return [AtomicAction(ActionKind.ROTATE_LEFT)]
    return [AtomicAction(ActionKind.ROTATE_RIGHT), AtomicAction(ActionKind.ROTATE_RIGHT)]


def path_to_actions(path: list[Cell], start_heading: int) -> list[AtomicAction]:
    """Rotate+MoveAhead sequence traversing a path whose first cell is the
    agent's current cell.  Executing it lands the agent on the last cell."""
    actions: list[AtomicAction] = []
    heading = start_heading
    for a, b in zip(path, path[1:]):
        needed = heading_between(a, b)
        actions.extend(rotations(heading, needed))
        heading = needed
        actions.append(AtomicAction(ActionKind.MOVE_AHEAD))
    return actions


def snap_bearing(origin: Cell, target: Cell) -> int:
    """World bearing from origin to target snapped to the nearest 90 degrees.

    The bearing is the arctangent of the displacement vector in the world
    frame (0 = +z, 90 = +x).  Exact diagonals round half-up, e.g. a 45 degree
    bearing snaps to 90.
    """
    dx = target[0] - origin[0]
    dz = target[1] - origin[1]
    if dx == 0 and dz == 0:
        raise ValueError("target and origin coincide")
    adx, adz = abs(dx), abs(dz)
    if adz > adx:
        return 0 if dz > 0 else 180
    if adx > adz:
        return 90 if dx > 0 else 270
    # |dx| == |dz|: round the bearing half-up to the larger multiple
    if dx > 0:
        return 90 if dz > 0 else 180
    return 270 if dz < 0 else 0


def bearing_degrees(origin: Cell, target: Cell) -> float:
    """Exact bearing in [0, 360); reference implementation for the snap rule."""
    dx = target[0] - origin[0]
    dz = target[1] - origin[1]
    return math.degrees(math.atan2(dx, dz)) % 360.0


def pitch_for_top(top_m: float) -> int:
    """Pitch band for an object whose stack top sits at top_m meters."""
    if top_m < PITCH_DOWN_BELOW_M:
        return -30
    if top_m > PITCH_UP_ABOVE_M:
        return 30
    return 0


def pitch_actions(from_pitch: int, to_pitch: int) -> list[AtomicAction]:
    steps = (to_pitch - from_pitch) // 30
    if steps > 0:
        return [AtomicAction(ActionKind.LOOK_UP)] * steps
    return [AtomicAction(ActionKind.LOOK_DOWN)] * (-steps)


def refocus(agent: AgentPose, object_cell: Cell, object_top_m: float) -> list[AtomicAction]:
    """Rotation and pitch actions that point the agent at an object.

    The target heading is the 90-degree snap of the world bearing toward the
    object, so after execution the wrapped heading error is at most 45
    degrees; at most two rotations are ever emitted.  Pitch moves toward the
    object's height band.
    """
    if object_cell == agent.cell:
        raise ValueError("cannot refocus on the agent's own cell")
    target_heading = snap_bearing(agent.cell, object_cell)
    actions = rotations(agent.heading, target_heading)
    actions.extend(pitch_actions(agent.pitch, pitch_for_top(object_top_m)))
    return actions
