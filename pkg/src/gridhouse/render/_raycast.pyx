# cython: boundscheck=False, wraparound=False, language_level=3
"""Compiled twin of `_raycast_py`.

Same integer algorithm, scalar C loops.  Division stays in Python
floor-division mode (no cdivision directive) so negative operands round
exactly like the pure kernel.  The parity test in the suite asserts the
two produce byte-identical frames.
"""

from libc.math cimport sqrt
from libc.stdlib cimport malloc, free

SCALE = 65536
HALF = 32768
FOV_TAN_Q16 = 65536
PITCH_TAN_Q16 = 37837

SEG_NONE = 0
SEG_WALL = 1
SEG_OBJECT_BASE = 2

KERNEL_NAME = "compiled"

cdef long long C_SCALE = 65536
cdef long long C_HALF = 32768
cdef long long C_FOV_TAN = 65536
cdef long long C_PITCH_TAN = 37837


cdef long long _isqrt64(long long v):
    """floor(sqrt(v)) exactly, for v >= 0."""
    cdef long long r
    if v < 0:
        return 0
    r = <long long> sqrt(<double> v)
    while r > 0 and r * r > v:
        r -= 1
    while (r + 1) * (r + 1) <= v:
        r += 1
    return r


cdef inline long long _rounded_sqrt(long long v):
    return (_isqrt64(4 * v) + 1) // 2


cdef inline long long _rnd_div(long long a, long long b):
    return (2 * a + b) // (2 * b)


cdef inline long long _ceil_div(long long a, long long b):
    return -((-a) // b)


def raycast_frame(int width, int depth_cells, int cell_mm,
                  unsigned char[::1] walls,
                  int[::1] rep_idx, int[::1] rep_top,
                  long long px, long long pz, int eye_mm,
                  int heading, int pitch, int w, int h, int far_mm,
                  unsigned short[:, ::1] out_depth, int[:, ::1] out_seg,
                  long long fov_tan_q16=C_FOV_TAN):
    if heading != 0 and heading != 90 and heading != 180 and heading != 270:
        raise ValueError(f"heading must be a cardinal bearing, got {heading}")

    cdef long long f_q16 = (<long long> w * C_SCALE * C_SCALE) // (2 * fov_tan_q16)
    cdef long long horizon = <long long> h * C_HALF
    if pitch > 0:
        horizon += (f_q16 * C_PITCH_TAN) // C_SCALE
    elif pitch < 0:
        horizon -= (f_q16 * C_PITCH_TAN) // C_SCALE
    cdef bint perp_axis_x = heading == 90 or heading == 270

    cdef int max_hits = width + depth_cells + 8
    cdef long long *hit_dist = <long long *> malloc(max_hits * sizeof(long long))
    cdef long long *hit_perp = <long long *> malloc(max_hits * sizeof(long long))
    cdef int *hit_seg = <int *> malloc(max_hits * sizeof(int))
    cdef int *hit_top = <int *> malloc(max_hits * sizeof(int))
    if hit_dist == NULL or hit_perp == NULL or hit_seg == NULL or hit_top == NULL:
        free(hit_dist); free(hit_perp); free(hit_seg); free(hit_top)
        raise MemoryError()

    cdef long long czc = <long long> w * C_SCALE
    cdef long long cxc, dx, dz, nx, nz, ax, az
    cdef long long hx, hz, ddx, ddz, dist, perp2, ux, uz, mid
    cdef long long bg_dist, top_q, bot_q, r_lo, r_hi
    cdef long long pend_hx, pend_hz
    cdef int i, k, r, cx, cz, sx, sz, cell, idx, bg_seg, n_hits
    cdef int pend_idx, pend_top
    cdef bint step_x

    try:
        for i in range(w):
            cxc = (2 * <long long> i + 1 - w) * fov_tan_q16
            if heading == 0:
                dx = cxc; dz = czc
            elif heading == 90:
                dx = czc; dz = -cxc
            elif heading == 180:
                dx = -cxc; dz = -czc
            else:
                dx = -czc; dz = cxc

            if dx == 0 and dz == 0:
                raise ValueError("degenerate ray direction")
            cx = <int> (px // cell_mm)
            cz = <int> (pz // cell_mm)
            sx = 1 if dx > 0 else (-1 if dx < 0 else 0)
            sz = 1 if dz > 0 else (-1 if dz < 0 else 0)
            ax = dx if dx > 0 else -dx
            az = dz if dz > 0 else -dz
            if sx > 0:
                nx = (<long long> cx + 1) * cell_mm - px
            elif sx < 0:
                nx = px - <long long> cx * cell_mm
            else:
                nx = 0
            if sz > 0:
                nz = (<long long> cz + 1) * cell_mm - pz
            elif sz < 0:
                nz = pz - <long long> cz * cell_mm
            else:
                nz = 0

            n_hits = 0
            bg_dist = far_mm
            bg_seg = SEG_NONE
            pend_idx = -1
            pend_top = 0
            pend_hx = 0
            pend_hz = 0
            while True:
                step_x = sx != 0 and (sz == 0 or nx * az <= nz * ax)
                if step_x:
                    hx = px + sx * nx
                    hz = pz + _rnd_div(nx * dz, ax)
                    cx += sx
                    nx += cell_mm
                else:
                    hz = pz + sz * nz
                    hx = px + _rnd_div(nz * dx, az)
                    cz += sz
                    nz += cell_mm
                if pend_idx >= 0:
                    # previous crossing entered an object cell; this one
                    # leaves it, so the chord is known
                    ux = pend_hx + hx - 2 * px
                    uz = pend_hz + hz - 2 * pz
                    mid = _rnd_div(_rounded_sqrt(ux * ux + uz * uz), 2)
                    if mid > far_mm:
                        mid = far_mm
                    perp2 = ux if perp_axis_x else uz
                    if perp2 < 0:
                        perp2 = -perp2
                    if n_hits < max_hits:
                        hit_dist[n_hits] = mid
                        hit_perp[n_hits] = perp2
                        hit_seg[n_hits] = pend_idx + SEG_OBJECT_BASE
                        hit_top[n_hits] = pend_top
                        n_hits += 1
                    pend_idx = -1
                ddx = hx - px
                ddz = hz - pz
                dist = _rounded_sqrt(ddx * ddx + ddz * ddz)
                if dist > far_mm:
                    bg_dist = far_mm
                    bg_seg = SEG_NONE
                    break
                if cx < 0 or cx >= width or cz < 0 or cz >= depth_cells:
                    bg_dist = dist
                    bg_seg = SEG_WALL
                    break
                cell = cx * depth_cells + cz
                if walls[cell]:
                    bg_dist = dist
                    bg_seg = SEG_WALL
                    break
                idx = rep_idx[cell]
                if idx >= 0:
                    pend_idx = idx
                    pend_top = rep_top[cell]
                    pend_hx = hx
                    pend_hz = hz

            for r in range(h):
                out_depth[r, i] = <unsigned short> bg_dist
                out_seg[r, i] = bg_seg
            for k in range(n_hits - 1, -1, -1):
                # hit_perp holds twice the midpoint offset; double the
                # numerators to match
                perp2 = hit_perp[k]
                top_q = horizon - (2 * f_q16 * (<long long> hit_top[k] - eye_mm)) // perp2
                bot_q = horizon + (2 * f_q16 * eye_mm) // perp2
                r_lo = _ceil_div(top_q - C_HALF, C_SCALE)
                r_hi = _ceil_div(bot_q - C_HALF, C_SCALE)
                if r_lo < 0:
                    r_lo = 0
                if r_hi > h:
                    r_hi = h
                for r in range(<int> r_lo, <int> r_hi):
                    out_depth[r, i] = <unsigned short> hit_dist[k]
                    out_seg[r, i] = hit_seg[k]
    finally:
        free(hit_dist)
        free(hit_perp)
        free(hit_seg)
        free(hit_top)
