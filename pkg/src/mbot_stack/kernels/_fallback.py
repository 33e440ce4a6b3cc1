"""Pure-Python kernel implementations.

Reference versions of the hot loops (grid raycasting, particle scoring,
beam map updates). The compiled extension in ``_core.pyx`` mirrors these
exactly; tests compare the two.
"""

from __future__ import annotations

import math

import numpy as np


def raycast(cells, origin_x, origin_y, resolution, x, y, angle,
            max_range, occupied_threshold):
    """Distance to the first solid cell along the ray, else max_range.

    Grid traversal (DDA) visiting every cell the ray passes through.
    A ray starting inside a solid cell returns 0.
    """
    height, width = cells.shape
    col = math.floor((x - origin_x) / resolution)
    row = math.floor((y - origin_y) / resolution)
    if col < 0 or row < 0 or col >= width or row >= height:
        return max_range
    if cells[row, col] > occupied_threshold:
        return 0.0
    dx = math.cos(angle)
    dy = math.sin(angle)
    step_c = 1 if dx > 0 else -1
    step_r = 1 if dy > 0 else -1
    # parametric distance to the next vertical / horizontal cell boundary
    if dx != 0:
        next_cx = origin_x + (col + (1 if dx > 0 else 0)) * resolution
        t_max_x = (next_cx - x) / dx
        t_delta_x = resolution / abs(dx)
    else:
        t_max_x = math.inf
        t_delta_x = math.inf
    if dy != 0:
        next_cy = origin_y + (row + (1 if dy > 0 else 0)) * resolution
        t_max_y = (next_cy - y) / dy
        t_delta_y = resolution / abs(dy)
    else:
        t_max_y = math.inf
        t_delta_y = math.inf
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


def raycast_bearings(cells, origin_x, origin_y, resolution, x, y, theta,
                     bearings, max_range, occupied_threshold):
    """Raycast a batch of robot-frame bearings from one pose."""
    out = np.empty(len(bearings), dtype=np.float64)
    for i, b in enumerate(bearings):
        out[i] = raycast(cells, origin_x, origin_y, resolution, x, y,
                         theta + b, max_range, occupied_threshold)
    return out


def score_particles(cells, origin_x, origin_y, resolution, poses,
                    ranges, bearings, max_range, sigma, log_floor,
                    occupied_threshold):
    """Sum of per-beam Gaussian log-likelihoods for each particle pose.

    ``poses`` is (N, 3) [x, y, theta]; ``ranges``/``bearings`` are the
    (already subsampled, valid) beams of one scan. Each beam's
    log-likelihood is floored at ``log_floor`` for robustness.
    """
    n = poses.shape[0]
    norm = -math.log(sigma * math.sqrt(2.0 * math.pi))
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    out = np.zeros(n, dtype=np.float64)
    for p in range(n):
        px, py, pt = poses[p, 0], poses[p, 1], poses[p, 2]
        total = 0.0
        for k in range(len(ranges)):
            expected = raycast(cells, origin_x, origin_y, resolution,
                               px, py, pt + bearings[k], max_range,
                               occupied_threshold)
            d = ranges[k] - expected
            ll = norm - d * d * inv2s2
            if ll < log_floor:
                ll = log_floor
            total += ll
        out[p] = total
    return out


def update_map_cells(cells, origin_x, origin_y, resolution, x, y, theta,
                     ranges, bearings, max_range, hit_odds, miss_odds):
    """Apply one scan to a log-odds grid in place.

    Cells traversed from the robot cell to each beam endpoint cell
    (Bresenham, endpoint excluded) lose ``miss_odds``; the endpoint cell
    gains ``hit_odds``, or loses ``miss_odds`` too when the beam went out
    to max_range without hitting anything. Values clamp to [-128, 127].
    Invalid beams (range <= 0) are skipped.
    """
    height, width = cells.shape
    c0 = math.floor((x - origin_x) / resolution)
    r0 = math.floor((y - origin_y) / resolution)
    for k in range(len(ranges)):
        rng = ranges[k]
        if rng <= 0.0:
            continue
        if rng > max_range:
            rng = max_range
        a = theta + bearings[k]
        ex = x + rng * math.cos(a)
        ey = y + rng * math.sin(a)
        c1 = math.floor((ex - origin_x) / resolution)
        r1 = math.floor((ey - origin_y) / resolution)
        _bresenham_update(cells, width, height, c0, r0, c1, r1,
                          hit_odds if rng < max_range else 0, miss_odds)


def _bresenham_update(cells, width, height, c0, r0, c1, r1, hit, miss):
    dc = abs(c1 - c0)
    dr = abs(r1 - r0)
    sc = 1 if c0 < c1 else -1
    sr = 1 if r0 < r1 else -1
    err = dc - dr
    c, r = c0, r0
    while True:
        at_end = (c == c1 and r == r1)
        if 0 <= c < width and 0 <= r < height:
            if at_end and hit != 0:
                v = int(cells[r, c]) + hit
            else:
                v = int(cells[r, c]) - miss
            cells[r, c] = max(-128, min(127, v))
        if at_end:
            break
        e2 = 2 * err
        if e2 > -dr:
            err -= dr
            c += sc
        if e2 < dc:
            err += dc
            r += sr
