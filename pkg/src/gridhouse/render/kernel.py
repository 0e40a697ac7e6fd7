"""Kernel selection: compiled extension when present, pure python otherwise.

Set GRIDHOUSE_PURE_PYTHON=1 to force the reference kernel even when the
extension built.  `active_kernel()` reports which one is in use.
"""

from __future__ import annotations

import os

from gridhouse.render import _raycast_py

_impl = _raycast_py
if os.environ.get("GRIDHOUSE_PURE_PYTHON") != "1":
    try:
        from gridhouse.render import _raycast as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled

SCALE = _raycast_py.SCALE
FOV_TAN_Q16 = _raycast_py.FOV_TAN_Q16
PITCH_TAN_Q16 = _raycast_py.PITCH_TAN_Q16
SEG_NONE = _raycast_py.SEG_NONE
SEG_WALL = _raycast_py.SEG_WALL
SEG_OBJECT_BASE = _raycast_py.SEG_OBJECT_BASE

raycast_frame = _impl.raycast_frame


def active_kernel() -> str:
    return _impl.KERNEL_NAME


def kernel_module(name: str):
    """Fetch a specific kernel by name ('pure-python' or 'compiled').

    Raises ImportError when the compiled kernel was not built.
    """
    if name == "pure-python":
        return _raycast_py
    if name == "compiled":
        from gridhouse.render import _raycast
        return _raycast
    raise ValueError(f"unknown kernel {name!r}")
