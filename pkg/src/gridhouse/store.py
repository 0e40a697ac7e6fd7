"""On-disk dataset: one directory per recorded instance plus a root manifest.

Layout:

    root/
      manifest.json
      manifest.lock
      <category>/<task-slug>/<instance-id>/
        structure.hts.json
        trace.trace.json
        scene.scene.json
        frames/            (optional)

Manifest updates are write-temp-then-rename so readers never observe a torn
file; writers serialize through an advisory file lock.  Human-collected and
augmentation-generated instances share the tree, separated by the origin
flag and accounted separately in statistics.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Optional

from filelock import FileLock

from gridhouse.actions import AtomicAction, load_trace_file, trace_to_json
from gridhouse.record import (
    HierarchicalTaskStructure,
    flatten,
    load_structure_file,
    serialize,
    structure_stats,
)
from gridhouse.render import FrameBundle, RenderConfig
from gridhouse.render.encode import write_frames
from gridhouse.scene import Scene, load_scene_file, scene_to_json

MANIFEST_VERSION = 1

ORIGIN_HUMAN = "Human"
ORIGIN_AUGMENTED = "Augmented"


class StoreError(Exception):
    pass


class DuplicateId(StoreError):
    def __init__(self, instance_id: str):
        self.instance_id = instance_id
        super().__init__(f"instance {instance_id!r} already saved")


class CorruptManifest(StoreError):
    pass


def _slug(text: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")
    return slug or "task"


def _manifest_path(root) -> str:
    return os.path.join(root, "manifest.json")


def _lock(root) -> FileLock:
    os.makedirs(root, exist_ok=True)
    return FileLock(os.path.join(root, "manifest.lock"))


def read_manifest(root) -> dict:
    path = _manifest_path(root)
    if not os.path.exists(path):
        return {"version": MANIFEST_VERSION, "instances": []}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptManifest(f"unreadable manifest: {exc}") from None
    if not isinstance(doc, dict) or doc.get("version") != MANIFEST_VERSION:
        raise CorruptManifest("missing or unsupported manifest version")
    if not isinstance(doc.get("instances"), list):
        raise CorruptManifest("manifest has no instance list")
    return doc


def _write_manifest(root, doc: dict) -> None:
    path = _manifest_path(root)
    temp = path + ".tmp"
    with open(temp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    os.replace(temp, path)


def save_instance(root, scene: Scene, structure: HierarchicalTaskStructure,
                  trace: Optional[list[AtomicAction]] = None,
                  frames: Optional[list[FrameBundle]] = None,
                  origin: str = ORIGIN_HUMAN,
                  render_config: Optional[RenderConfig] = None) -> str:
    """Persist one instance; returns its id (a digest of the structure).

    trace defaults to the structure's flattened successful actions; frames,
    when given, are written as an episode directory next to the other files.
    """
    if origin not in (ORIGIN_HUMAN, ORIGIN_AUGMENTED):
        raise StoreError(f"unknown origin {origin!r}")
    instance_id = structure.digest()
    category = scene.category.value
    task = _slug(structure.goal)
    rel_dir = os.path.join(category, task, instance_id)
    inst_dir = os.path.join(root, rel_dir)

    with _lock(root):
        manifest = read_manifest(root)
        if any(e["id"] == instance_id for e in manifest["instances"]):
            raise DuplicateId(instance_id)

        os.makedirs(inst_dir, exist_ok=True)
        with open(os.path.join(inst_dir, "structure.hts.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(serialize(structure))
        actions = list(trace) if trace is not None else flatten(structure)
        with open(os.path.join(inst_dir, "trace.trace.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(trace_to_json(actions))
        with open(os.path.join(inst_dir, "scene.scene.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(scene_to_json(scene))
        frames_rel = None
        if frames is not None:
            write_frames(os.path.join(inst_dir, "frames"), frames, scene,
                         render_config, actions=actions)
            frames_rel = os.path.join(rel_dir, "frames")

        manifest["instances"].append({
            "id": instance_id,
            "task": structure.goal,
            "category": category,
            "scene_id": scene.id,
            "annotator_id": structure.annotator_id,
            "origin": origin,
            "structure": os.path.join(rel_dir, "structure.hts.json"),
            "trace": os.path.join(rel_dir, "trace.trace.json"),
            "scene": os.path.join(rel_dir, "scene.scene.json"),
            "frames": frames_rel,
        })
        _write_manifest(root, manifest)
    return instance_id


@dataclass
class LoadedInstance:
    entry: dict
    scene: Scene
    structure: HierarchicalTaskStructure
    trace: list[AtomicAction] = field(default_factory=list)

    @property
    def instance_id(self) -> str:
        return self.entry["id"]


def load_instance(root, instance_id: str) -> LoadedInstance:
    manifest = read_manifest(root)
    for entry in manifest["instances"]:
        if entry["id"] == instance_id:
            break
    else:
        raise StoreError(f"no instance {instance_id!r}")
    scene = load_scene_file(os.path.join(root, entry["scene"]))
    structure = load_structure_file(os.path.join(root, entry["structure"]))
    trace = load_trace_file(os.path.join(root, entry["trace"]))
    return LoadedInstance(entry=entry, scene=scene, structure=structure,
                          trace=trace)


def list_instances(root, task: Optional[str] = None,
                   category: Optional[str] = None,
                   origin: Optional[str] = None) -> list[dict]:
    """Manifest entries matching the filters, sorted (category, task, id)."""
    entries = read_manifest(root)["instances"]
    out = [
        e for e in entries
        if (task is None or e["task"] == task)
        and (category is None or e["category"] == category)
        and (origin is None or e["origin"] == origin)
    ]
    return sorted(out, key=lambda e: (e["category"], e["task"], e["id"]))


@dataclass(frozen=True)
class StatsRow:
    num_tasks: int = 0
    num_instances: int = 0
    avg_task_descriptions: float = 0.0
    avg_atomic_actions: float = 0.0

    def to_json(self) -> dict:
        return {
            "num_tasks": self.num_tasks,
            "num_instances": self.num_instances,
            "avg_task_descriptions": self.avg_task_descriptions,
            "avg_atomic_actions": self.avg_atomic_actions,
        }


@dataclass(frozen=True)
class DatasetStats:
    origin: str
    categories: dict
    total: StatsRow

    def to_json(self) -> dict:
        return {
            "origin": self.origin,
            "categories": {k: v.to_json() for k, v in sorted(self.categories.items())},
            "total": self.total.to_json(),
        }

    def table(self) -> str:
        """Fixed-width table, one category per row plus a total row."""
        header = f"{'category':<12} {'tasks':>6} {'instances':>10} {'avg descr':>10} {'avg actions':>12}"
        lines = [header, "-" * len(header)]
        for name, row in sorted(self.categories.items()):
            lines.append(f"{name:<12} {row.num_tasks:>6} {row.num_instances:>10} "
                         f"{row.avg_task_descriptions:>10.1f} {row.avg_atomic_actions:>12.1f}")
        row = self.total
        lines.append(f"{'Total':<12} {row.num_tasks:>6} {row.num_instances:>10} "
                     f"{row.avg_task_descriptions:>10.1f} {row.avg_atomic_actions:>12.1f}")
        return "\n".join(lines)


def _row(samples: list[tuple[str, int, int]]) -> StatsRow:
    """samples: (task name, step count, action count) per instance."""
    if not samples:
        return StatsRow()
    n = len(samples)
    return StatsRow(
        num_tasks=len({s[0] for s in samples}),
        num_instances=n,
        avg_task_descriptions=round(sum(s[1] for s in samples) / n, 1),
        avg_atomic_actions=round(sum(s[2] for s in samples) / n, 1),
    )


def compute_stats(root, origin: str = ORIGIN_HUMAN) -> DatasetStats:
    """Exact per-category and total figures over one origin's instances."""
    by_category: dict[str, list] = {}
    all_samples = []
    for entry in list_instances(root, origin=origin):
        structure = load_structure_file(os.path.join(root, entry["structure"]))
        steps, actions = structure_stats(structure)
        sample = (entry["task"], steps, actions)
        by_category.setdefault(entry["category"], []).append(sample)
        all_samples.append(sample)
    return DatasetStats(
        origin=origin,
        categories={k: _row(v) for k, v in by_category.items()},
        total=_row(all_samples),
    )


def verify(root) -> list[str]:
    """Referential-integrity check; returns problems (empty = healthy)."""
    problems = []
    try:
        manifest = read_manifest(root)
    except CorruptManifest as exc:
        return [str(exc)]
    seen = set()
    for entry in manifest["instances"]:
        iid = entry.get("id", "<missing id>")
        if iid in seen:
            problems.append(f"duplicate instance id {iid}")
        seen.add(iid)
        for key in ("structure", "trace", "scene"):
            rel = entry.get(key)
            if rel is None or not os.path.exists(os.path.join(root, rel)):
                problems.append(f"{iid}: missing {key} file {rel!r}")
        frames_rel = entry.get("frames")
        if frames_rel is not None and not os.path.isdir(os.path.join(root, frames_rel)):
            problems.append(f"{iid}: missing frames directory {frames_rel!r}")
    return problems
