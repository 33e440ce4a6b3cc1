"""Grid path planning (A* with soft obstacle inflation) and waypoint tracking."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .types import OccupancyGrid, Path2D, Pose2D, Twist2D, cell_to_world, \
    world_to_cell, wrap_angle

OCCUPIED_THRESHOLD = 64
SQRT2 = math.sqrt(2.0)

# 8-connected neighborhood
_NEIGHBORS = [(-1, -1, SQRT2), (0, -1, 1.0), (1, -1, SQRT2),
              (-1, 0, 1.0), (1, 0, 1.0),
              (-1, 1, SQRT2), (0, 1, 1.0), (1, 1, SQRT2)]


@dataclass
class NavConfig:
    safe_distance: int = 3        # cells
    penalty: float = 8.0          # inflation cost multiplier scale
    lookahead: float = 0.25       # m
    goal_tolerance: float = 0.1   # m
    heading_gain: float = 2.0     # wz = gain * heading error
    speed_gain: float = 1.0       # vx = gain * distance * cos(error)
    vx_max: float = 0.5           # m/s
    wz_max: float = 2.0           # rad/s
    control_rate: float = 25.0    # Hz


@dataclass
class CostGrid:
    """Planner view of a map: obstacles, clearance, traversal multipliers."""

    grid: OccupancyGrid
    obstacle: np.ndarray    # bool (h, w)
    distance: np.ndarray    # float (h, w), cells to nearest obstacle (Chebyshev)
    multiplier: np.ndarray  # float (h, w), >= 1

    def traversable(self, col: int, row: int) -> bool:
        return not self.obstacle[row, col]


def inflate(grid: OccupancyGrid, safe_distance: int = 3,
            penalty: float = 8.0,
            occupied_threshold: int = OCCUPIED_THRESHOLD) -> CostGrid:
    """Multi-source BFS distance transform from obstacle cells.

    Cells closer than ``safe_distance`` get multiplier
    penalty*(safe_distance - d)/safe_distance + 1; everything else 1.
    """
    if safe_distance < 0:
        raise ValueError("safe_distance must be >= 0")
    obstacle = grid.cells > occupied_threshold
    h, w = obstacle.shape
    distance = np.full((h, w), np.inf)
    queue = deque()
    rows, cols = np.nonzero(obstacle)
    for r, c in zip(rows, cols):
        distance[r, c] = 0.0
        queue.append((c, r))
    while queue:
        c, r = queue.popleft()
        d = distance[r, c]
        if d >= safe_distance:
            continue  # farther cells all get multiplier 1
        for dc, dr, _ in _NEIGHBORS:
            nc, nr = c + dc, r + dr
            if 0 <= nc < w and 0 <= nr < h and distance[nr, nc] == np.inf:
                distance[nr, nc] = d + 1
                queue.append((nc, nr))
    multiplier = np.ones((h, w))
    if safe_distance > 0:
        near = distance < safe_distance
        multiplier[near] = (penalty * (safe_distance - distance[near])
                            / safe_distance + 1.0)
    return CostGrid(grid=grid, obstacle=obstacle, distance=distance,
                    multiplier=multiplier)


def _decimate(cells: list) -> list:
    """Keep endpoints and direction changes only."""
    if len(cells) <= 2:
        return cells
    out = [cells[0]]
    for i in range(1, len(cells) - 1):
        d_prev = (cells[i][0] - cells[i - 1][0], cells[i][1] - cells[i - 1][1])
        d_next = (cells[i + 1][0] - cells[i][0], cells[i + 1][1] - cells[i][1])
        if d_prev != d_next:
            out.append(cells[i])
    out.append(cells[-1])
    return out


@dataclass
class GridSearchResult:
    cells: list      # (col, row) from start to goal inclusive
    cost: float      # in cell units (multiply by resolution for meters)
    expanded: int    # nodes popped and expanded


def astar_cells(cost: CostGrid, start_cell, goal_cell) -> Optional[GridSearchResult]:
    """A* between grid cells; ties break on heuristic, then cell index."""
    if not cost.traversable(*start_cell) or not cost.traversable(*goal_cell):
        return None
    h_grid, w = cost.obstacle.shape
    mult = cost.multiplier
    obstacle = cost.obstacle
    gx, gy = goal_cell

    def heuristic(c, r):
        return math.hypot(c - gx, r - gy)

    g_score = {start_cell: 0.0}
    parent = {start_cell: None}
    h0 = heuristic(*start_cell)
    heap = [(h0, h0, start_cell[1] * w + start_cell[0], start_cell)]
    closed = set()
    expanded = 0
    found = False
    while heap:
        f, _, _, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        if cell == goal_cell:
            found = True
            break
        closed.add(cell)
        expanded += 1
        c, r = cell
        base = g_score[cell]
        for dc, dr, step in _NEIGHBORS:
            nc, nr = c + dc, r + dr
            if nc < 0 or nr < 0 or nc >= w or nr >= h_grid:
                continue
            if obstacle[nr, nc]:
                continue
            ng = base + step * mult[nr, nc]
            ncell = (nc, nr)
            if ng < g_score.get(ncell, math.inf) - 1e-12:
                g_score[ncell] = ng
                parent[ncell] = cell
                nh = heuristic(nc, nr)
                heapq.heappush(heap, (ng + nh, nh, nr * w + nc, ncell))
    if not found:
        return None
    cells = []
    cur = goal_cell
    while cur is not None:
        cells.append(cur)
        cur = parent[cur]
    cells.reverse()
    return GridSearchResult(cells=cells, cost=g_score[goal_cell],
                            expanded=expanded)


def plan_path(grid: OccupancyGrid, start: Pose2D, goal: Pose2D,
              cfg: NavConfig | None = None,
              cost: CostGrid | None = None,
              utime: int = 0) -> Optional[Path2D]:
    """8-connected A* over the inflated cost grid.

    Edge cost is the Euclidean step (1 or sqrt(2) cells) times the
    destination cell's multiplier; the Euclidean heuristic is admissible
    because multipliers are >= 1. Returns None when no path exists.
    Ties break on lower heuristic, then lower cell index, so paths are
    deterministic.
    """
    cfg = cfg or NavConfig()
    if cost is None:
        cost = inflate(grid, cfg.safe_distance, cfg.penalty)
    start_cell = world_to_cell(grid, start.x, start.y)
    goal_cell = world_to_cell(grid, goal.x, goal.y)
    if start_cell is None or goal_cell is None:
        return None
    result = astar_cells(cost, start_cell, goal_cell)
    if result is None:
        return None
    cells = _decimate(result.cells)
    poses = []
    for i, (c, r) in enumerate(cells):
        x, y = cell_to_world(grid, c, r)
        if i + 1 < len(cells):
            nx, ny = cell_to_world(grid, cells[i + 1][0], cells[i + 1][1])
            theta = math.atan2(ny - y, nx - x)
        else:
            theta = poses[-1].theta if poses else start.theta
        poses.append(Pose2D(x=x, y=y, theta=theta, utime=utime))
    return Path2D(utime=utime, poses=poses)


def dijkstra_cost(cost: CostGrid, start_cell, goal_cell
                  ) -> Optional[tuple[float, int]]:
    """Dijkstra (cost, nodes expanded) between cells; the A* oracle."""
    h, w = cost.obstacle.shape
    if not cost.traversable(*start_cell) or not cost.traversable(*goal_cell):
        return None
    dist = {start_cell: 0.0}
    heap = [(0.0, start_cell)]
    done = set()
    expanded = 0
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        if cell == goal_cell:
            return d, expanded
        expanded += 1
        c, r = cell
        for dc, dr, step in _NEIGHBORS:
            nc, nr = c + dc, r + dr
            if nc < 0 or nr < 0 or nc >= w or nr >= h or cost.obstacle[nr, nc]:
                continue
            nd = d + step * cost.multiplier[nr, nc]
            if nd < dist.get((nc, nr), math.inf):
                dist[(nc, nr)] = nd
                heapq.heappush(heap, (nd, (nc, nr)))
    return None


class Tracker:
    """Proportional waypoint follower emitting body twists."""

    def __init__(self, cfg: NavConfig | None = None):
        self.cfg = cfg or NavConfig()
        self.path: Optional[Path2D] = None
        self.target_index = 0
        self.done = True

    def set_path(self, path: Path2D) -> None:
        self.path = path
        self.target_index = 0
        self.done = len(path.poses) == 0

    def step(self, pose: Pose2D) -> Twist2D:
        """One control update toward the current target waypoint."""
        cfg = self.cfg
        if self.path is None or not self.path.poses:
            self.done = True
            return Twist2D(utime=pose.utime)
        poses = self.path.poses
        final = poses[-1]
        if math.hypot(final.x - pose.x, final.y - pose.y) <= cfg.goal_tolerance:
            self.done = True
            self.target_index = len(poses)
            return Twist2D(utime=pose.utime)
        # advance to the first waypoint beyond lookahead, else the last
        i = min(self.target_index, len(poses) - 1)
        while i < len(poses) - 1 and math.hypot(poses[i].x - pose.x,
                                                poses[i].y - pose.y) <= cfg.lookahead:
            i += 1
        self.target_index = i
        target = poses[i]
        dx, dy = target.x - pose.x, target.y - pose.y
        dist = math.hypot(dx, dy)
        err = wrap_angle(math.atan2(dy, dx) - pose.theta)
        wz = max(-cfg.wz_max, min(cfg.wz_max, cfg.heading_gain * err))
        vx = min(cfg.vx_max, cfg.speed_gain * dist * max(0.0, math.cos(err)))
        self.done = False
        return Twist2D(vx=vx, vy=0.0, wz=wz, utime=pose.utime)
