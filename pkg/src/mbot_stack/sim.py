"""Ground-truth 2D world: true-pose integration, collision, simulated lidar.

Stands in for the physical robot and the lidar driver. Cells with
log-odds above ``occupied_threshold`` are solid. All randomness comes
from one seeded generator, so runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .board import ControlBoard, forward_kinematics
from .types import LidarScan, OccupancyGrid, Pose2D, world_to_cell, wrap_angle

OCCUPIED_THRESHOLD = 64
MAX_SUBSTEP = 1e-3  # s


@dataclass
class LidarConfig:
    num_beams: int = 360
    max_range: float = 8.0       # m
    range_noise_sigma: float = 0.01  # m
    dropout_prob: float = 0.02
    scan_rate: float = 10.0      # Hz


class WorldSim:
    """Integrates true robot motion and synthesizes lidar scans."""

    def __init__(self, world: OccupancyGrid, start_pose: Pose2D,
                 lidar: LidarConfig | None = None, seed: int = 0):
        self.world = world
        self.lidar = lidar or LidarConfig()
        self.rng = np.random.default_rng(seed)
        self.sim_time = 0  # microseconds
        self.true_pose = start_pose
        if self._solid(start_pose.x, start_pose.y):
            raise ValueError("start pose is inside a solid cell")
        self._bearings = np.linspace(0.0, 2.0 * math.pi, self.lidar.num_beams,
                                     endpoint=False)

    def _solid(self, x: float, y: float) -> bool:
        cell = world_to_cell(self.world, x, y)
        if cell is None:
            return True  # outside the world counts as solid
        col, row = cell
        return self.world.cells[row, col] > OCCUPIED_THRESHOLD

    def step(self, dt: float, board: ControlBoard) -> None:
        """Advance the true pose for ``dt`` seconds from board wheel state.

        Motion into a solid cell stops at contact and slides along the
        free axis; the pose never enters a solid cell.
        """
        if dt <= 0 or dt > 0.1:
            raise ValueError("dt must be in (0, 0.1] s")
        steps = max(1, math.ceil(dt / MAX_SUBSTEP))
        sub = dt / steps
        x, y, theta = self.true_pose.x, self.true_pose.y, self.true_pose.theta
        for _ in range(steps):
            tw = forward_kinematics(board.cfg, board.true_wheel_velocities())
            c, s = math.cos(theta), math.sin(theta)
            vx_w = tw.vx * c - tw.vy * s
            vy_w = tw.vx * s + tw.vy * c
            nx = x + vx_w * sub
            ny = y + vy_w * sub
            if not self._solid(nx, y):
                x = nx
            if not self._solid(x, ny):
                y = ny
            theta = wrap_angle(theta + tw.wz * sub)
        self.sim_time += round(dt * 1e6)
        self.true_pose = Pose2D(x=x, y=y, theta=theta, utime=self.sim_time)

    def raycast(self, from_pose: Pose2D, bearing: float,
                max_range: float | None = None) -> float:
        if max_range is None:
            max_range = self.lidar.max_range
        return float(kernels.raycast(
            self.world.cells, self.world.origin_x, self.world.origin_y,
            self.world.resolution, from_pose.x, from_pose.y,
            from_pose.theta + bearing, max_range, OCCUPIED_THRESHOLD))

    def make_scan(self) -> LidarScan:
        """One simulated lidar revolution from the current true pose."""
        pose = self.true_pose
        ranges = kernels.raycast_bearings(
            self.world.cells, self.world.origin_x, self.world.origin_y,
            self.world.resolution, pose.x, pose.y, pose.theta,
            self._bearings, self.lidar.max_range, OCCUPIED_THRESHOLD)
        ranges = np.asarray(ranges, dtype=np.float64)
        if self.lidar.range_noise_sigma > 0:
            ranges = ranges + self.rng.normal(
                0.0, self.lidar.range_noise_sigma, len(ranges))
            np.clip(ranges, 1e-6, self.lidar.max_range, out=ranges)
        if self.lidar.dropout_prob > 0:
            drop = self.rng.random(len(ranges)) < self.lidar.dropout_prob
            ranges[drop] = -1.0
        return LidarScan(utime=self.sim_time, ranges=ranges,
                         thetas=self._bearings.copy())


def make_walled_room(size_m: float = 10.0, resolution: float = 0.1,
                     wall_cells: int = 1) -> OccupancyGrid:
    """Square room with solid border walls, origin at (0, 0)."""
    n = round(size_m / resolution)
    cells = np.zeros((n, n), dtype=np.int8)
    cells[:wall_cells, :] = 127
    cells[-wall_cells:, :] = 127
    cells[:, :wall_cells] = 127
    cells[:, -wall_cells:] = 127
    return OccupancyGrid(0.0, 0.0, resolution, n, n, cells)
