# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel implementations; mirrors _fallback.py exactly."""

from libc.math cimport cos, sin, floor, sqrt, log, INFINITY

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef double _raycast(const signed char[:, ::1] cells,
                     double origin_x, double origin_y, double resolution,
                     double x, double y, double angle,
                     double max_range, int occupied_threshold) noexcept nogil:
    cdef Py_ssize_t height = cells.shape[0]
    cdef Py_ssize_t width = cells.shape[1]
    cdef Py_ssize_t col = <Py_ssize_t>floor((x - origin_x) / resolution)
    cdef Py_ssize_t row = <Py_ssize_t>floor((y - origin_y) / resolution)
    if col < 0 or row < 0 or col >= width or row >= height:
        return max_range
    if cells[row, col] > occupied_threshold:
        return 0.0
    cdef double dx = cos(angle)
    cdef double dy = sin(angle)
    cdef Py_ssize_t step_c = 1 if dx > 0 else -1
    cdef Py_ssize_t step_r = 1 if dy > 0 else -1
    cdef double t_max_x, t_delta_x, t_max_y, t_delta_y, next_cx, next_cy, t
    if dx != 0:
        next_cx = origin_x + (col + (1 if dx > 0 else 0)) * resolution
        t_max_x = (next_cx - x) / dx
        t_delta_x = resolution / (dx if dx > 0 else -dx)
    else:
        t_max_x = INFINITY
        t_delta_x = INFINITY
    if dy != 0:
        next_cy = origin_y + (row + (1 if dy > 0 else 0)) * resolution
        t_max_y = (next_cy - y) / dy
        t_delta_y = resolution / (dy if dy > 0 else -dy)
    else:
        t_max_y = INFINITY
        t_delta_y = INFINITY
    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            t_max_x += t_delta_x
            col += step_c
        else:
            t = t_max_y
            t_max_y += t_delta_y
            row += step_r
        if t > max_range:
            return max_range
        if col < 0 or row < 0 or col >= width or row >= height:
            return max_range
        if cells[row, col] > occupied_threshold:
            return t


def raycast(cells, double origin_x, double origin_y, double resolution,
            double x, double y, double angle, double max_range,
            int occupied_threshold):
    cdef const signed char[:, ::1] view = np.ascontiguousarray(cells, dtype=np.int8)
    return _raycast(view, origin_x, origin_y, resolution, x, y, angle,
                    max_range, occupied_threshold)


def raycast_bearings(cells, double origin_x, double origin_y, double resolution,
                     double x, double y, double theta, bearings,
                     double max_range, int occupied_threshold):
    cdef const signed char[:, ::1] view = np.ascontiguousarray(cells, dtype=np.int8)
    cdef const double[::1] b = np.ascontiguousarray(bearings, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out[i] = _raycast(view, origin_x, origin_y, resolution,
                              x, y, theta + b[i], max_range, occupied_threshold)
    return out_arr


def score_particles(cells, double origin_x, double origin_y, double resolution,
                    poses, ranges, bearings, double max_range, double sigma,
                    double log_floor, int occupied_threshold):
    cdef const signed char[:, ::1] view = np.ascontiguousarray(cells, dtype=np.int8)
    cdef const double[:, ::1] p = np.ascontiguousarray(poses, dtype=np.float64)
    cdef const double[::1] r = np.ascontiguousarray(ranges, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(bearings, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t m = r.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double norm = -log(sigma * sqrt(2.0 * 3.141592653589793))
    cdef double inv2s2 = 1.0 / (2.0 * sigma * sigma)
    cdef Py_ssize_t i, k
    cdef double px, py, pt, expected, d, ll, total
    with nogil:
        for i in range(n):
            px = p[i, 0]
            py = p[i, 1]
            pt = p[i, 2]
            total = 0.0
            for k in range(m):
                expected = _raycast(view, origin_x, origin_y, resolution,
                                    px, py, pt + b[k], max_range,
                                    occupied_threshold)
                d = r[k] - expected
                ll = norm - d * d * inv2s2
                if ll < log_floor:
                    ll = log_floor
                total += ll
            out[i] = total
    return out_arr


cdef void _bresenham_update(signed char[:, ::1] cells,
                            Py_ssize_t width, Py_ssize_t height,
                            Py_ssize_t c0, Py_ssize_t r0,
                            Py_ssize_t c1, Py_ssize_t r1,
                            int hit, int miss) noexcept nogil:
    cdef Py_ssize_t dc = c1 - c0 if c1 >= c0 else c0 - c1
    cdef Py_ssize_t dr = r1 - r0 if r1 >= r0 else r0 - r1
    cdef Py_ssize_t sc = 1 if c0 < c1 else -1
    cdef Py_ssize_t sr = 1 if r0 < r1 else -1
    cdef Py_ssize_t err = dc - dr
    cdef Py_ssize_t c = c0, r = r0, e2
    cdef int v
    cdef bint at_end
    while True:
        at_end = (c == c1 and r == r1)
        if 0 <= c < width and 0 <= r < height:
            if at_end and hit != 0:
                v = <int>cells[r, c] + hit
            else:
                v = <int>cells[r, c] - miss
            if v > 127:
                v = 127
            elif v < -128:
                v = -128
            cells[r, c] = <signed char>v
        if at_end:
            return
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr


def update_map_cells(cells, double origin_x, double origin_y, double resolution,
                     double x, double y, double theta, ranges, bearings,
                     double max_range, int hit_odds, int miss_odds):
    if not (isinstance(cells, np.ndarray) and cells.dtype == np.int8
            and cells.flags["C_CONTIGUOUS"]):
        raise TypeError("cells must be a C-contiguous int8 array")
    cdef signed char[:, ::1] view = cells
    cdef const double[::1] r = np.ascontiguousarray(ranges, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(bearings, dtype=np.float64)
    cdef Py_ssize_t height = view.shape[0]
    cdef Py_ssize_t width = view.shape[1]
    cdef Py_ssize_t c0 = <Py_ssize_t>floor((x - origin_x) / resolution)
    cdef Py_ssize_t r0 = <Py_ssize_t>floor((y - origin_y) / resolution)
    cdef Py_ssize_t k, c1, r1
    cdef double rng, a, ex, ey
    with nogil:
        for k in range(r.shape[0]):
            rng = r[k]
            if rng <= 0.0:
                continue
            if rng > max_range:
                rng = max_range
            a = theta + b[k]
            ex = x + rng * cos(a)
            ey = y + rng * sin(a)
            c1 = <Py_ssize_t>floor((ex - origin_x) / resolution)
            r1 = <Py_ssize_t>floor((ey - origin_y) / resolution)
            _bresenham_update(view, width, height, c0, r0, c1, r1,
                              hit_odds if rng < max_range else 0, miss_odds)
