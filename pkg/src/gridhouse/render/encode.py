"""Frame file encoding.

rgb        -> binary PPM (P6, maxval 255)
depth      -> binary PGM (P5, maxval 65535, big-endian, millimeters)
instance   -> binary PGM (P5, 16-bit, instance indices: 0 background, k+2 object k)
class      -> binary PGM (P5, 16-bit, class indices per the class palette)

An episode directory holds rgb_%05d.ppm / depth_%05d.pgm / inst_%05d.pgm /
class_%05d.pgm plus a frames.json manifest tying frame files to ticks and
action labels, instance values to object ids, and class indices to names.
"""

from __future__ import annotations

import json
import os
from typing import Optional

import numpy as np

from gridhouse.render import SEG_OBJECT_BASE, FrameBundle, RenderConfig, class_table
from gridhouse.scene import Scene

FRAMES_VERSION = 1


class FrameFormatError(ValueError):
    pass


def encode_ppm(rgb: np.ndarray) -> bytes:
    if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.dtype != np.uint8:
        raise FrameFormatError("rgb channel must be uint8 with shape (h, w, 3)")
    h, w = rgb.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def encode_pgm16(values: np.ndarray) -> bytes:
    if values.ndim != 2:
        raise FrameFormatError("single-channel image must have shape (h, w)")
    arr = np.ascontiguousarray(values)
    if arr.min() < 0 or arr.max() > 65535:
        raise FrameFormatError("values out of 16-bit range")
    h, w = arr.shape
    return f"P5\n{w} {h}\n65535\n".encode("ascii") + arr.astype(">u2").tobytes()


def _read_header(data: bytes, magic: bytes) -> tuple[int, int, int, int]:
    """Parse a netpbm header; returns (width, height, maxval, offset)."""
    if not data.startswith(magic):
        raise FrameFormatError(f"expected {magic.decode()} file")
    fields = []
    pos = len(magic)
    while len(fields) < 3:
        if pos >= len(data):
            raise FrameFormatError("truncated header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            pos = data.find(b"\n", pos)
            if pos < 0:
                raise FrameFormatError("truncated header")
            pos += 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            token = data[pos:end]
            if not token.isdigit():
                raise FrameFormatError(f"bad header token {token!r}")
            fields.append(int(token))
            pos = end
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FrameFormatError("missing header terminator")
    pos += 1
    w, h, maxval = fields
    return w, h, maxval, pos


def decode_ppm(data: bytes) -> np.ndarray:
    w, h, maxval, pos = _read_header(data, b"P6")
    if maxval != 255:
        raise FrameFormatError(f"unsupported maxval {maxval}")
    body = data[pos:pos + w * h * 3]
    if len(body) != w * h * 3:
        raise FrameFormatError("truncated pixel data")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3).copy()


def decode_pgm16(data: bytes) -> np.ndarray:
    w, h, maxval, pos = _read_header(data, b"P5")
    if maxval != 65535:
        raise FrameFormatError(f"unsupported maxval {maxval}")
    body = data[pos:pos + w * h * 2]
    if len(body) != w * h * 2:
        raise FrameFormatError("truncated pixel data")
    return np.frombuffer(body, dtype=">u2").reshape(h, w).astype(np.uint16)


def palette_table(scene: Scene) -> dict:
    """Instance seg value -> {"instance": id or None, "class": name or None}."""
    table = {"0": {"instance": None, "class": None}}
    for i, obj in enumerate(scene.objects):
        table[str(i + SEG_OBJECT_BASE)] = {
            "instance": obj.id,
            "class": obj.object_class,
        }
    return table


def class_palette(scene: Scene) -> dict:
    """Class index -> class name (index 0 is background)."""
    out = {"0": None}
    for name, idx in class_table(scene).items():
        out[str(idx)] = name
    return out


def write_frames(directory, frames: list[FrameBundle], scene: Scene,
                 config: Optional[RenderConfig] = None, actions=None) -> dict:
    """Write an episode's frame files plus frames.json; returns the manifest.

    actions, when given, is the trace that produced the frames; frame i > 0
    is labeled with actions[i-1] (failed steps repeat the prior image but
    still carry their action label).
    """
    cfg = config or RenderConfig()
    os.makedirs(directory, exist_ok=True)
    entries = []
    for frame in frames:
        names = {
            "rgb": f"rgb_{frame.index:05d}.ppm",
            "depth": f"depth_{frame.index:05d}.pgm",
            "inst": f"inst_{frame.index:05d}.pgm",
            "class": f"class_{frame.index:05d}.pgm",
        }
        payloads = {
            "rgb": encode_ppm(frame.rgb),
            "depth": encode_pgm16(frame.depth),
            "inst": encode_pgm16(frame.seg),
            "class": encode_pgm16(frame.class_seg),
        }
        for key, name in names.items():
            with open(os.path.join(directory, name), "wb") as fh:
                fh.write(payloads[key])
        label = None
        if actions is not None and frame.index > 0:
            label = actions[frame.index - 1].label()
        entries.append({"index": frame.index, "tick": frame.tick,
                        "action": label, **names})
    manifest = {
        "frames_version": FRAMES_VERSION,
        "width": cfg.width,
        "height": cfg.height,
        "fov_degrees": cfg.fov_degrees,
        "far_mm": cfg.far_mm(int(scene.cell_size * 1000 + 0.5)),
        "scene_id": scene.id,
        "palette": palette_table(scene),
        "class_palette": class_palette(scene),
        "frames": entries,
    }
    with open(os.path.join(directory, "frames.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest


def read_frames(directory) -> tuple[dict, list[FrameBundle]]:
    """Load frames.json and every frame it references."""
    with open(os.path.join(directory, "frames.json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("frames_version") != FRAMES_VERSION:
        raise FrameFormatError("unsupported frames_version")
    bundles = []
    for entry in manifest["frames"]:
        with open(os.path.join(directory, entry["rgb"]), "rb") as fh:
            rgb = decode_ppm(fh.read())
        with open(os.path.join(directory, entry["depth"]), "rb") as fh:
            depth = decode_pgm16(fh.read())
        with open(os.path.join(directory, entry["inst"]), "rb") as fh:
            seg = decode_pgm16(fh.read()).astype(np.int32)
        with open(os.path.join(directory, entry["class"]), "rb") as fh:
            class_seg = decode_pgm16(fh.read()).astype(np.int32)
        bundles.append(FrameBundle(rgb=rgb, depth=depth, seg=seg, class_seg=class_seg,
                                   index=entry["index"], tick=entry["tick"]))
    return manifest, bundles
