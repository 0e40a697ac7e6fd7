"""Interactive collection server.

Each WebSocket connection gets an isolated session: one environment, one
recorder, one pending (finished, unsaved) structure.  Messages are JSON
text frames; every client message gets exactly one reply carrying the
request's seq, and state-changing messages are followed by Frame messages
marked "push": true.  Message handling is transport-free (`handle_text`)
so the full protocol is testable without sockets; the WebSocket layer just
pumps strings.

The wire schema is documented in docs/protocol.md (proto_version 1).
"""

from __future__ import annotations

import asyncio
import base64
import json
import logging
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from gridhouse.actions import ActionError, AtomicAction
from gridhouse.env import Environment, init_env
from gridhouse.record import (
    HierarchicalTaskStructure,
    IllegalTransition,
    RecordError,
    RecorderSession,
)
from gridhouse.render import FrameBundle, RenderConfig, render
from gridhouse.render.encode import (class_palette, encode_pgm16, encode_ppm,
                                     palette_table)
from gridhouse.scene import Scene, load_scene_file
from gridhouse.store import StoreError, save_instance

PROTO_VERSION = 1

ERR_NO_SCENE = "NoScene"
ERR_ILLEGAL_TRANSITION = "IllegalTransition"
ERR_BAD_ACTION = "BadAction"
ERR_PROTOCOL = "ProtocolError"

log = logging.getLogger("gridhouse.service")


def bundled_scenes() -> dict[str, Scene]:
    """Scenes shipped with the package, keyed by id."""
    scenes = {}
    base = resources.files("gridhouse").joinpath("data/scenes")
    for entry in sorted(base.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".scene.json"):
            with resources.as_file(entry) as path:
                scene = load_scene_file(path)
            scenes[scene.id] = scene
    return scenes


def load_scene_dir(directory) -> dict[str, Scene]:
    scenes = {}
    for name in sorted(os.listdir(directory)):
        if name.endswith(".scene.json"):
            scene = load_scene_file(os.path.join(directory, name))
            scenes[scene.id] = scene
    return scenes


def task_library() -> list[dict]:
    text = resources.files("gridhouse").joinpath("data/task_library.json").read_text("utf-8")
    return json.loads(text)["tasks"]


@dataclass
class Session:
    """Per-connection state; all message handling funnels through here."""

    scenes: dict[str, Scene]
    dataset_root: str
    render_config: RenderConfig = field(default_factory=RenderConfig)
    library: list[dict] = field(default_factory=list)
    env: Optional[Environment] = None
    recorder: Optional[RecorderSession] = None
    pending: Optional[HierarchicalTaskStructure] = None


def _frame_message(session: Session, seq) -> dict:
    bundle: FrameBundle = render(session.env, session.render_config)
    return {
        "type": "Frame",
        "push": True,
        "seq": seq,
        "tick": bundle.tick,
        "width": bundle.width,
        "height": bundle.height,
        "rgb_ppm": base64.b64encode(encode_ppm(bundle.rgb)).decode("ascii"),
        "depth_pgm": base64.b64encode(encode_pgm16(bundle.depth)).decode("ascii"),
        "seg_pgm": base64.b64encode(encode_pgm16(bundle.seg)).decode("ascii"),
        "class_pgm": base64.b64encode(encode_pgm16(bundle.class_seg)).decode("ascii"),
        "palette": palette_table(session.env.scene),
        "class_palette": class_palette(session.env.scene),
    }


def _state_message(session: Session, seq) -> dict:
    env = session.env
    recorder = session.recorder
    return {
        "type": "State",
        "seq": seq,
        "scene_id": env.scene.id,
        "pose": {
            "cell": list(env.agent.cell),
            "heading": env.agent.heading,
            "pitch": env.agent.pitch,
        },
        "held": env.held,
        "tick": env.tick,
        "recorder_phase": recorder.phase.value if recorder else "Idle",
    }


def _error(seq, code: str, message: str) -> dict:
    return {"type": "Error", "seq": seq, "code": code, "message": message}


def handle_message(session: Session, doc: dict) -> list[dict]:
    """Process one decoded client message.

    Returns the documents to send, reply first, pushes after.  Never
    raises for client mistakes — those become Error replies.
    """
    seq = doc.get("seq")
    kind = doc.get("type")
    if not isinstance(kind, str):
        return [_error(seq, ERR_PROTOCOL, "message needs a string 'type'")]

    if kind == "Hello":
        version = doc.get("proto_version")
        if version != PROTO_VERSION:
            return [_error(seq, ERR_PROTOCOL,
                           f"unsupported proto_version {version!r}, need {PROTO_VERSION}")]
        return [{
            "type": "Welcome",
            "seq": seq,
            "proto_version": PROTO_VERSION,
            "scenes": [
                {
                    "id": s.id,
                    "category": s.category.value,
                    "width": s.width,
                    "depth": s.depth,
                }
                for s in sorted(session.scenes.values(), key=lambda s: s.id)
            ],
            "task_library": session.library,
        }]

    if kind == "LoadScene":
        scene_id = doc.get("scene_id")
        scene = session.scenes.get(scene_id)
        if scene is None:
            return [_error(seq, ERR_NO_SCENE, f"unknown scene {scene_id!r}")]
        interrupted = session.recorder is not None and \
            session.recorder.phase.value != "Idle"
        session.env = init_env(scene)
        session.recorder = RecorderSession(scene_id=scene.id)
        session.pending = None
        if interrupted:
            # the scene is loaded, but an in-progress recording was thrown
            # away; say so loudly instead of replying as if nothing happened
            return [_error(seq, ERR_ILLEGAL_TRANSITION,
                           "recording in progress was discarded by LoadScene"),
                    _frame_message(session, seq)]
        return [_state_message(session, seq), _frame_message(session, seq)]

    if kind not in ("Act", "Observe", "BeginTask", "BeginStep", "EndStep",
                    "EndTask", "Save"):
        return [_error(seq, ERR_PROTOCOL, f"unknown message type {kind!r}")]

    # everything below needs a live environment
    if session.env is None:
        return [_error(seq, ERR_NO_SCENE, "no scene loaded")]

    if kind == "Act":
        try:
            action = AtomicAction.from_json(doc.get("action") or {})
        except (ActionError, ValueError, KeyError, TypeError) as exc:
            return [_error(seq, ERR_BAD_ACTION, f"bad action: {exc}")]
        event = session.env.step(action)
        if session.recorder.phase.value == "InStep":
            session.recorder.record_action(action, event.ok)
        reply = {"type": "Event", "seq": seq, "event": event.to_json()}
        if event.ok:
            return [reply, _frame_message(session, seq)]
        return [reply]

    if kind == "Observe":
        return [_state_message(session, seq), _frame_message(session, seq)]

    if kind == "BeginTask":
        goal = doc.get("goal", "")
        try:
            session.recorder.begin_task(str(goal))
        except IllegalTransition as exc:
            return [_error(seq, ERR_ILLEGAL_TRANSITION, str(exc))]
        except RecordError as exc:
            return [_error(seq, ERR_BAD_ACTION, str(exc))]
        return [_state_message(session, seq)]

    if kind == "BeginStep":
        try:
            session.recorder.begin_step(str(doc.get("description", "")))
        except IllegalTransition as exc:
            return [_error(seq, ERR_ILLEGAL_TRANSITION, str(exc))]
        except RecordError as exc:
            return [_error(seq, ERR_BAD_ACTION, str(exc))]
        return [_state_message(session, seq)]

    if kind == "EndStep":
        try:
            session.recorder.end_step()
        except IllegalTransition as exc:
            return [_error(seq, ERR_ILLEGAL_TRANSITION, str(exc))]
        except RecordError as exc:
            return [_error(seq, ERR_BAD_ACTION, str(exc))]
        return [_state_message(session, seq)]

    if kind == "EndTask":
        success = bool(doc.get("success"))
        try:
            structure = session.recorder.end_task(success)
        except IllegalTransition as exc:
            return [_error(seq, ERR_ILLEGAL_TRANSITION, str(exc))]
        except RecordError as exc:
            return [_error(seq, ERR_BAD_ACTION, str(exc))]
        session.pending = structure if success else None
        return [_state_message(session, seq)]

    if kind == "Save":
        if session.pending is None:
            return [_error(seq, ERR_ILLEGAL_TRANSITION,
                           "nothing to save: finish a task with EndTask(success) first")]
        try:
            instance_id = save_instance(session.dataset_root, session.env.scene,
                                        session.pending)
        except StoreError as exc:
            return [_error(seq, ERR_ILLEGAL_TRANSITION, str(exc))]
        session.pending = None
        return [{"type": "Saved", "seq": seq, "instance_id": instance_id}]

    raise AssertionError(f"unhandled message kind {kind!r}")  # all kinds listed above


def handle_text(session: Session, text: str) -> list[str]:
    """JSON-in, JSON-out wrapper around handle_message."""
    try:
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("top level must be an object")
    except ValueError as exc:
        docs = [_error(None, ERR_PROTOCOL, f"unparseable message: {exc}")]
    else:
        docs = handle_message(session, doc)
    return [json.dumps(d) for d in docs]


async def _client_loop(connection, scenes, dataset_root, library,
                       render_config) -> None:
    session = Session(scenes=scenes, dataset_root=dataset_root,
                      library=library, render_config=render_config)
    async for text in connection:
        for out in handle_text(session, text):
            await connection.send(out)


async def serve(host: str = "127.0.0.1", port: int = 8765,
                dataset_root: str = "dataset",
                scene_dir: Optional[str] = None,
                ready: Optional[asyncio.Event] = None) -> None:
    """Run the collection server until cancelled.

    Scenes come from the bundled set, extended/overridden by scene_dir.
    `ready` (when given) is set once the socket is listening — handy for
    tests and for parent processes waiting to connect.
    """
    from websockets.asyncio.server import serve as ws_serve

    scenes = bundled_scenes()
    if scene_dir:
        scenes.update(load_scene_dir(scene_dir))
    library = task_library()
    config = RenderConfig()

    async def handler(connection):
        try:
            await _client_loop(connection, scenes, dataset_root, library, config)
        except Exception:
            log.exception("session ended abnormally")
            raise

    async with ws_serve(handler, host, port):
        log.info("listening on ws://%s:%d", host, port)
        print(f"listening on ws://{host}:{port}", flush=True)
        if ready is not None:
            ready.set()
        await asyncio.get_running_loop().create_future()  # run forever
