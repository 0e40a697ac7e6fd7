"""Frame rendering: deterministic first-person views of a grid scene.

The camera sits at the agent's cell center at a fixed eye height, facing
one of the four cardinal headings; pitch is applied as a vertical shear of
the horizon line.  Each frame carries four aligned channels:

* ``rgb``       - uint8 (H, W, 3), flat per-class colors with distance
  shading; walls grey, background black
* ``depth``     - uint16 (H, W), euclidean distance in millimeters (capped
  at the far plane, which is also the value where nothing was hit)
* ``seg``       - int32 (H, W) instance indices: 0 = background (the far
  plane and walls), k + 2 = object k in the scene's instance order
* ``class_seg`` - int32 (H, W) class indices per ``class_table()``, 0
  where ``seg`` is 0

Walls bound every ray, so they always show in rgb and depth, but both
segmentation channels treat them as background: only object instances get
nonzero indices.

A cell's objects draw as one vertical slab from the floor to the top of
the tallest stack in the cell, labeled with that stack's topmost object;
held objects and objects inside a closed container do not draw.  The
agent's own cell is never drawn (the camera is inside it).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from gridhouse.render import kernel
from gridhouse.render.kernel import (
    SEG_NONE,
    SEG_WALL,
    SEG_OBJECT_BASE,
    active_kernel,
)
from gridhouse.scene import EYE_HEIGHT_M, AgentPose, Scene

WALL_COLOR = (110, 110, 110)

__all__ = [
    "RenderConfig",
    "FrameBundle",
    "FOV_TAN_TABLE_Q16",
    "FOV_MIN_DEGREES",
    "FOV_MAX_DEGREES",
    "render",
    "render_scene",
    "render_episode",
    "class_color",
    "class_table",
    "active_kernel",
    "SEG_NONE",
    "SEG_WALL",
    "SEG_OBJECT_BASE",
]


def _mm(meters: float) -> int:
    return int(meters * 1000 + 0.5)


# Q16 tangents of half the horizontal field of view, for whole degrees
# 30..120.  Frozen integers keep rendering free of floating point; the
# suite re-derives every entry with mpmath.
FOV_TAN_TABLE_Q16 = (
    17560, 18175, 18792, 19413, 20036, 20663, 21294, 21928,
    22566, 23208, 23853, 24503, 25157, 25815, 26478, 27146,
    27818, 28496, 29179, 29866, 30560, 31259, 31964, 32675,
    33392, 34116, 34846, 35583, 36327, 37078, 37837, 38604,
    39378, 40161, 40951, 41751, 42560, 43377, 44205, 45042,
    45889, 46746, 47615, 48494, 49385, 50288, 51202, 52130,
    53070, 54024, 54991, 55973, 56970, 57981, 59009, 60053,
    61113, 62191, 63287, 64402, 65536, 66690, 67865, 69061,
    70279, 71520, 72785, 74075, 75391, 76733, 78103, 79502,
    80930, 82390, 83882, 85408, 86969, 88567, 90203, 91878,
    93595, 95355, 97161, 99014, 100917, 102871, 104880, 106945,
    109070, 111258, 113512,
)
FOV_MIN_DEGREES = 30
FOV_MAX_DEGREES = 120


@dataclass(frozen=True)
class RenderConfig:
    width: int = 160
    height: int = 120
    fov_degrees: int = 90  # horizontal field of view, whole degrees
    far_cells: int = 20  # far plane, in multiples of the scene cell size

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ValueError("frame must be at least 8x8 pixels")
        if self.fov_degrees != int(self.fov_degrees) or not (
                FOV_MIN_DEGREES <= self.fov_degrees <= FOV_MAX_DEGREES):
            raise ValueError(
                f"fov must be a whole number of degrees in "
                f"[{FOV_MIN_DEGREES}, {FOV_MAX_DEGREES}], got {self.fov_degrees}")

    def far_mm(self, cell_mm: int) -> int:
        return self.far_cells * cell_mm

    def fov_tan_q16(self) -> int:
        return FOV_TAN_TABLE_Q16[self.fov_degrees - FOV_MIN_DEGREES]


@dataclass
class FrameBundle:
    """The four annotation channels for one timestep.

    seg holds instance indices (0 for background, walls included; k+2 for
    the scene's k-th object); class_seg holds class indices per
    class_table(), 0 wherever seg is 0.
    """

    rgb: np.ndarray
    depth: np.ndarray
    seg: np.ndarray
    class_seg: np.ndarray
    index: int = 0
    tick: int = 0

    @property
    def height(self) -> int:
        return int(self.depth.shape[0])

    @property
    def width(self) -> int:
        return int(self.depth.shape[1])


def class_color(object_class: str) -> tuple[int, int, int]:
    """Deterministic display color for an object class."""
    digest = hashlib.sha256(object_class.encode("utf-8")).digest()
    return (96 + digest[0] % 160, 96 + digest[1] % 160, 96 + digest[2] % 160)


def class_table(scene: Scene) -> dict[str, int]:
    """Class name -> class index, starting at 1 (0 is background), in
    first-appearance (scene document) order."""
    table: dict[str, int] = {}
    for o in scene.objects:
        if o.object_class not in table:
            table[o.object_class] = 1 + len(table)
    return table


def _class_lut(scene: Scene) -> np.ndarray:
    """Kernel seg value -> class index (background and walls both 0)."""
    table = class_table(scene)
    lut = np.zeros(len(scene.objects) + SEG_OBJECT_BASE, dtype=np.int32)
    for k, o in enumerate(scene.objects):
        lut[k + SEG_OBJECT_BASE] = table[o.object_class]
    return lut


def _walls_array(scene: Scene) -> np.ndarray:
    walls = np.zeros(scene.width * scene.depth, dtype=np.uint8)
    for (x, z) in scene.walls:
        walls[x * scene.depth + z] = 1
    return walls


def _rep_arrays(scene: Scene, cells: dict, parents: dict,
                open_state: dict) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell representative: the tallest stack's top object.

    cells/parents/open_state map object id to current cell (None when
    held), current parent id and current is_open value.
    """
    heights = {o.id: _mm(o.height) for o in scene.objects}
    index_of = {o.id: i for i, o in enumerate(scene.objects)}

    def stack_top(oid: str) -> int:
        top = 0
        seen = set()
        cur: Optional[str] = oid
        while cur is not None and cur not in seen:
            seen.add(cur)
            top += heights[cur]
            cur = parents.get(cur)
        return top

    def hidden(oid: str) -> bool:
        seen = {oid}
        cur = parents.get(oid)
        while cur is not None and cur not in seen:
            seen.add(cur)
            if open_state.get(cur) is False:
                return True
            cur = parents.get(cur)
        return False

    rep_idx = np.full(scene.width * scene.depth, -1, dtype=np.int32)
    rep_top = np.zeros(scene.width * scene.depth, dtype=np.int32)
    for obj in scene.objects:
        cell = cells.get(obj.id)
        if cell is None or hidden(obj.id):
            continue
        flat = cell[0] * scene.depth + cell[1]
        top = stack_top(obj.id)
        if rep_idx[flat] < 0 or top > rep_top[flat] or (
                top == rep_top[flat] and index_of[obj.id] < rep_idx[flat]):
            rep_idx[flat] = index_of[obj.id]
            rep_top[flat] = top
    return rep_idx, rep_top


def _palette(scene: Scene) -> np.ndarray:
    lut = np.zeros((len(scene.objects) + SEG_OBJECT_BASE, 3), dtype=np.int64)
    lut[SEG_WALL] = WALL_COLOR
    for i, obj in enumerate(scene.objects):
        lut[i + SEG_OBJECT_BASE] = class_color(obj.object_class)
    return lut


def render_state(scene: Scene, agent: AgentPose, cells: dict, parents: dict,
                 open_state: dict, tick: int = 0,
                 config: Optional[RenderConfig] = None) -> FrameBundle:
    cfg = config or RenderConfig()
    cell_mm = _mm(scene.cell_size)
    far = cfg.far_mm(cell_mm)
    walls = _walls_array(scene)
    rep_idx, rep_top = _rep_arrays(scene, cells, parents, open_state)

    depth = np.zeros((cfg.height, cfg.width), dtype=np.uint16)
    seg = np.zeros((cfg.height, cfg.width), dtype=np.int32)
    px = agent.cell[0] * cell_mm + cell_mm // 2
    pz = agent.cell[1] * cell_mm + cell_mm // 2
    # late-bound through the module so tests and benchmarks can swap kernels
    kernel.raycast_frame(scene.width, scene.depth, cell_mm, walls, rep_idx, rep_top,
                         px, pz, _mm(EYE_HEIGHT_M), agent.heading, agent.pitch,
                         cfg.width, cfg.height, far, depth, seg,
                         cfg.fov_tan_q16())

    shade = 4 * far - 3 * depth.astype(np.int64)
    rgb = ((_palette(scene)[seg] * shade[:, :, None]) // (4 * far)).astype(np.uint8)
    class_seg = _class_lut(scene)[seg]
    # the kernel marks walls SEG_WALL so rgb can shade them; the published
    # instance channel treats walls as background
    inst = np.where(seg == SEG_WALL, SEG_NONE, seg)
    return FrameBundle(rgb=rgb, depth=depth, seg=inst, class_seg=class_seg,
                       index=0, tick=tick)


def render(env, config: Optional[RenderConfig] = None) -> FrameBundle:
    """Render an environment's current state."""
    cells = {oid: dyn.cell for oid, dyn in env.objects.items()}
    parents = {oid: dyn.parent for oid, dyn in env.objects.items()}
    open_state = {oid: dyn.state.is_open for oid, dyn in env.objects.items()}
    return render_state(env.scene, env.agent, cells, parents, open_state,
                        tick=env.tick, config=config)


def render_scene(scene: Scene, config: Optional[RenderConfig] = None) -> FrameBundle:
    """Render a scene in its start state."""
    cells = {o.id: o.cell for o in scene.objects}
    parents = {o.id: o.parent_receptacle for o in scene.objects}
    open_state = {o.id: o.state.is_open for o in scene.objects}
    return render_state(scene, scene.agent_start, cells, parents, open_state,
                        config=config)


def render_episode(scene: Scene, actions, config: Optional[RenderConfig] = None) -> list:
    """One frame per state along a trace: index 0 is the start state,
    index i the state after actions[:i].  Failed steps change nothing, so
    their entry reuses the previous frame's channels (tick included)."""
    from gridhouse.env import init_env

    env = init_env(scene)
    frames = [render(env, config)]
    for i, action in enumerate(actions, start=1):
        event = env.step(action)
        if event.ok:
            bundle = render(env, config)
        else:
            prev = frames[-1]
            bundle = FrameBundle(rgb=prev.rgb, depth=prev.depth, seg=prev.seg,
                                 class_seg=prev.class_seg, tick=prev.tick)
        bundle.index = i
        frames.append(bundle)
    return frames
