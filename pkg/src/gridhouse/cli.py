"""Command-line entry point.

Subcommands::

    gridhouse serve     [--host H] [--port P] [--dataset-root DIR] [--scene-dir DIR]
    gridhouse replay    <scene> <trace>
    gridhouse render    <scene> <trace> <outdir>
    gridhouse augment   <structure> --scenes S [S ...] --placements N [--seed S] [--out DIR]
    gridhouse stats     [root]
    gridhouse validate  <file> [<file> ...]

Scene arguments accept either a path to a ``.scene.json`` file or the id of a
bundled scene (``gridhouse validate --list-scenes`` is not needed: ids match
the bundled file names, e.g. ``kitchen_01``).

Exit codes: 0 success, 1 domain error (bad scene, failed validation, missing
file), 2 usage error.
"""

from __future__ import annotations

import argparse
import asyncio
import os
import sys

from gridhouse.actions import ActionError, load_trace_file
from gridhouse.augment import augment_batch, write_aug_manifest
from gridhouse.env import replay
from gridhouse.record import RecordError, load_structure_file
from gridhouse.render import RenderConfig, render_episode
from gridhouse.render.encode import write_frames
from gridhouse.scene import SceneError, load_scene_file, validate_scene
from gridhouse.store import StoreError, compute_stats, list_instances, verify

ENV_DATASET_ROOT = "GRIDHOUSE_DATASET_ROOT"

#: errors that map to exit code 1; anything else is a genuine bug
_DOMAIN_ERRORS = (SceneError, ActionError, RecordError, StoreError, OSError, ValueError)


def _default_root() -> str:
    return os.environ.get(ENV_DATASET_ROOT, "dataset")


def _resolve_scene(ref: str, extra: dict | None = None):
    """A scene argument is a file path or a bundled scene id."""
    if os.path.exists(ref):
        return load_scene_file(ref)
    from gridhouse.service import bundled_scenes

    pool = dict(bundled_scenes())
    if extra:
        pool.update(extra)
    if ref in pool:
        return pool[ref]
    raise SceneError(f"no scene file or bundled scene id {ref!r}")


def _cmd_serve(args) -> int:
    from gridhouse import service

    try:
        asyncio.run(
            service.serve(
                host=args.host,
                port=args.port,
                dataset_root=args.dataset_root,
                scene_dir=args.scene_dir,
            )
        )
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_replay(args) -> int:
    scene = _resolve_scene(args.scene)
    trace = load_trace_file(args.trace)
    _, digest = replay(scene, trace)
    print(digest)
    return 0


def _cmd_render(args) -> int:
    scene = _resolve_scene(args.scene)
    trace = load_trace_file(args.trace)
    config = RenderConfig(width=args.width, height=args.height)
    frames = render_episode(scene, trace, config)
    os.makedirs(args.outdir, exist_ok=True)
    write_frames(args.outdir, frames, scene, config, actions=trace)
    print(f"{len(frames)} frames -> {args.outdir}")
    return 0


def _cmd_augment(args) -> int:
    structure = load_structure_file(args.structure)
    targets = [_resolve_scene(ref) for ref in args.scenes]
    if args.source_scene is not None:
        source = _resolve_scene(args.source_scene)
    else:
        source = _resolve_scene(structure.scene_id)
    reports = augment_batch(
        structure, source, targets, placements_per_scene=args.placements, seed=args.seed
    )
    write_aug_manifest(args.out, structure, reports, seed=args.seed,
                       placements_per_scene=args.placements)
    ok = sum(1 for r in reports if r.ok)
    print(f"{len(reports)} reports ({ok} success, {len(reports) - ok} failure) -> {args.out}")
    return 0


def _cmd_stats(args) -> int:
    problems = verify(args.root)
    if problems:
        for p in problems:
            print(f"warning: {p}", file=sys.stderr)
    for origin in ("Human", "Augmented"):
        stats = compute_stats(args.root, origin=origin)
        if origin == "Augmented" and not stats.total.num_instances:
            continue
        print(f"origin: {origin}")
        print(stats.table())
        print()
    return 0


def _validate_one(path: str) -> list[str]:
    if path.endswith(".scene.json"):
        scene = load_scene_file(path)
        return [str(v) for v in validate_scene(scene)]
    if path.endswith(".hts.json"):
        load_structure_file(path)
        return []
    if path.endswith(".trace.json"):
        load_trace_file(path)
        return []
    return [f"unrecognized file kind (expected .scene.json, .hts.json, or .trace.json)"]


def _cmd_validate(args) -> int:
    bad = False
    for path in args.files:
        try:
            problems = _validate_one(path)
        except _DOMAIN_ERRORS as exc:
            problems = [str(exc)]
        if problems:
            bad = True
            for p in problems:
                print(f"{path}: {p}", file=sys.stderr)
        else:
            print(f"{path}: ok")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridhouse", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the collection server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--dataset-root", default=_default_root())
    p.add_argument("--scene-dir", default=None, help="serve scenes from this directory instead of the bundled set")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("replay", help="replay a trace and print the final state digest")
    p.add_argument("scene")
    p.add_argument("trace")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("render", help="replay a trace and write its frames")
    p.add_argument("scene")
    p.add_argument("trace")
    p.add_argument("outdir")
    p.add_argument("--width", type=int, default=160)
    p.add_argument("--height", type=int, default=120)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("augment", help="retarget a task structure into other scenes")
    p.add_argument("structure")
    p.add_argument("--scenes", nargs="+", required=True, metavar="SCENE")
    p.add_argument("--placements", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="aug_out")
    p.add_argument("--source-scene", default=None,
                   help="override the source scene (default: the structure's scene id)")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("stats", help="print dataset statistics tables")
    p.add_argument("root", nargs="?", default=_default_root())
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("validate", help="check scene, structure, or trace files")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
