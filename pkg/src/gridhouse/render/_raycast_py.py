"""Pure-python raycast kernel.

Everything in here is integer arithmetic (fixed point where fractions are
needed) so that frames are bit-identical across machines, and across the
optional compiled twin of this module (`_raycast.pyx`).  Distances are in
millimeters, angles only ever appear as the tangent constants below.

Column rays fan out over a 90 degree horizontal field of view.  A ray is
walked cell-by-cell with an exact DDA: boundary crossings are compared as
rationals via cross multiplication, never floats.  The first wall (or the
grid edge, or the far plane) ends the walk and becomes the column
background; every object cell entered on the way contributes a vertical
band, painted far-to-near so nearer objects win.

Walls read as the distance to the surface the ray crossed; an object band
reads as the distance to the midpoint of the ray's chord through its cell
(the cell center, for a ray straight at it), which keeps reported object
depth at whole cell multiples from a cell-centered eye.
"""

from __future__ import annotations

from math import isqrt

SCALE = 65536  # Q16 fixed point
HALF = SCALE // 2
FOV_TAN_Q16 = 65536  # tan(45 deg): half the horizontal field of view
PITCH_TAN_Q16 = 37837  # tan(30 deg), rounded to nearest Q16

# segment-map encoding shared with the driver (which publishes walls as
# background in the instance/class channels and keeps the distinction only
# for rgb shading)
SEG_NONE = 0  # ray reached the far plane
SEG_WALL = 1
SEG_OBJECT_BASE = 2  # object instance k renders as k + SEG_OBJECT_BASE

KERNEL_NAME = "pure-python"


def rnd_div(a: int, b: int) -> int:
    """a/b rounded to nearest, halves toward +infinity.  b > 0."""
    return (2 * a + b) // (2 * b)


def rounded_sqrt(v: int) -> int:
    """Nearest integer to sqrt(v), v >= 0 (halves round up)."""
    return (isqrt(4 * v) + 1) // 2


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _march(width, depth_cells, cell_mm, walls, rep_idx, rep_top,
           px, pz, dx, dz, far_mm, perp_axis_x):
    """Walk one ray from (px, pz) along direction (dx, dz).

    Returns (bg_dist_mm, bg_seg, hits); hits is a list of
    (dist_mm, perp2_mm, seg_value, top_mm) tuples ordered near to far,
    where perp2 is twice the perpendicular offset of the cell chord's
    midpoint (kept doubled so it stays an exact integer).
    """
    if dx == 0 and dz == 0:
        raise ValueError("degenerate ray direction")
    cx = px // cell_mm
    cz = pz // cell_mm
    sx = 1 if dx > 0 else (-1 if dx < 0 else 0)
    sz = 1 if dz > 0 else (-1 if dz < 0 else 0)
    ax = dx if dx > 0 else -dx
    az = dz if dz > 0 else -dz
    # nx/ax and nz/az are the ray parameters of the next boundary on each
    # axis; numerators are mm offsets from the eye, always >= 0
    if sx > 0:
        nx = (cx + 1) * cell_mm - px
    elif sx < 0:
        nx = px - cx * cell_mm
    else:
        nx = 0
    if sz > 0:
        nz = (cz + 1) * cell_mm - pz
    elif sz < 0:
        nz = pz - cz * cell_mm
    else:
        nz = 0

    hits = []
    pend_idx = -1
    pend_top = 0
    pend_hx = pend_hz = 0
    while True:
        # pick the nearer crossing; exact ties step x first
        step_x = sx != 0 and (sz == 0 or nx * az <= nz * ax)
        if step_x:
            hx = px + sx * nx
            hz = pz + rnd_div(nx * dz, ax)
            cx += sx
            nx += cell_mm
        else:
            hz = pz + sz * nz
            hx = px + rnd_div(nz * dx, az)
            cz += sz
            nz += cell_mm
        if pend_idx >= 0:
            # the previous crossing entered an object cell; this crossing
            # leaves it, so the chord is known and the band can be recorded
            ux = pend_hx + hx - 2 * px
            uz = pend_hz + hz - 2 * pz
            mid = rnd_div(rounded_sqrt(ux * ux + uz * uz), 2)
            if mid > far_mm:
                mid = far_mm
            perp2 = ux if perp_axis_x else uz
            if perp2 < 0:
                perp2 = -perp2
            hits.append((mid, perp2, pend_idx + SEG_OBJECT_BASE, pend_top))
            pend_idx = -1
        ddx = hx - px
        ddz = hz - pz
        dist = rounded_sqrt(ddx * ddx + ddz * ddz)
        if dist > far_mm:
            return far_mm, SEG_NONE, hits
        if cx < 0 or cx >= width or cz < 0 or cz >= depth_cells:
            return dist, SEG_WALL, hits
        cell = cx * depth_cells + cz
        if walls[cell]:
            return dist, SEG_WALL, hits
        idx = int(rep_idx[cell])  # plain int: numpy scalars overflow in Q16 math
        if idx >= 0:
            pend_idx = idx
            pend_top = int(rep_top[cell])
            pend_hx = hx
            pend_hz = hz


def raycast_frame(width, depth_cells, cell_mm, walls, rep_idx, rep_top,
                  px, pz, eye_mm, heading, pitch, w, h, far_mm,
                  out_depth, out_seg, fov_tan_q16=FOV_TAN_Q16):
    """Fill out_depth (uint16, h x w) and out_seg (int32, h x w).

    walls is a flat uint8 array and rep_idx / rep_top flat int32 arrays,
    all indexed x * depth_cells + z.  rep_idx holds the cell's
    representative object instance index (-1 when the cell is bare) and
    rep_top that stack's absolute top in mm.  fov_tan_q16 is the Q16
    tangent of half the horizontal field of view.
    """
    if heading not in (0, 90, 180, 270):
        raise ValueError(f"heading must be a cardinal bearing, got {heading}")
    f_q16 = (w * SCALE * SCALE) // (2 * fov_tan_q16)
    horizon = h * HALF
    if pitch > 0:
        horizon += (f_q16 * PITCH_TAN_Q16) // SCALE
    elif pitch < 0:
        horizon -= (f_q16 * PITCH_TAN_Q16) // SCALE
    perp_axis_x = heading in (90, 270)
    czc = w * SCALE
    for i in range(w):
        cxc = (2 * i + 1 - w) * fov_tan_q16
        if heading == 0:
            dx, dz = cxc, czc
        elif heading == 90:
            dx, dz = czc, -cxc
        elif heading == 180:
            dx, dz = -cxc, -czc
        else:
            dx, dz = -czc, cxc
        bg_dist, bg_seg, hits = _march(
            width, depth_cells, cell_mm, walls, rep_idx, rep_top,
            px, pz, dx, dz, far_mm, perp_axis_x)
        out_depth[:, i] = bg_dist
        out_seg[:, i] = bg_seg
        for k in range(len(hits) - 1, -1, -1):
            dist, perp2, seg_val, top_mm = hits[k]
            # perp2 is twice the midpoint offset, so the numerators double
            top_q = horizon - (2 * f_q16 * (top_mm - eye_mm)) // perp2
            bot_q = horizon + (2 * f_q16 * eye_mm) // perp2
            r_lo = _ceil_div(top_q - HALF, SCALE)
            r_hi = _ceil_div(bot_q - HALF, SCALE)
            if r_lo < 0:
                r_lo = 0
            if r_hi > h:
                r_hi = h
            if r_lo < r_hi:
                out_depth[r_lo:r_hi, i] = dist
                out_seg[r_lo:r_hi, i] = seg_val
