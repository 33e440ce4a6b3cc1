"""Occupancy-grid mapping plus Monte Carlo Localization.

One sequential loop consumes odometry/scan pairs. Modes switch on the fly:
FULL_SLAM localizes against the evolving map then maps at the posterior
pose; LOCALIZATION_ONLY freezes the map; IDLE republishes the last state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .types import LidarScan, OccupancyGrid, Pose2D, SlamMode, wrap_angle

OCCUPIED_THRESHOLD = 64


@dataclass
class SlamConfig:
    num_particles: int = 300
    # action model noise: sigma_rot = k1*|rot| + k2*|trans|, sigma_trans = k3*|trans|
    k1: float = 0.2
    k2: float = 0.05
    k3: float = 0.1
    sigma_sensor: float = 0.1        # m
    p_floor: float = 0.01            # per-beam likelihood floor
    beam_subsample: int = 4          # use every n-th valid beam
    # raycast surface threshold for expected ranges: any positive evidence
    # counts, so localization grips before cells reach full confidence
    sensor_occupied_threshold: int = 0
    hit_odds: int = 3
    miss_odds: int = 1
    max_range: float = 8.0           # m, must match the lidar
    init_sigma_xy: float = 0.1       # m, particle cloud at initialization
    init_sigma_theta: float = math.radians(10.0)
    neff_fraction: float = 0.5       # resample when N_eff < fraction * N
    map_origin: tuple = (0.0, 0.0)
    map_resolution: float = 0.1      # m/cell
    map_size: tuple = (100, 100)     # (width, height) cells
    map_publish_rate: float = 2.0    # Hz


@dataclass
class ParticleSet:
    poses: np.ndarray    # (N, 3): x, y, theta
    weights: np.ndarray  # (N,), sums to 1

    @property
    def num_particles(self) -> int:
        return self.poses.shape[0]

    def copy(self) -> "ParticleSet":
        return ParticleSet(self.poses.copy(), self.weights.copy())

    def posterior_pose(self, utime: int = 0) -> Pose2D:
        """Weighted mean pose; circular mean for theta."""
        w = self.weights
        x = float(np.dot(w, self.poses[:, 0]))
        y = float(np.dot(w, self.poses[:, 1]))
        theta = math.atan2(float(np.dot(w, np.sin(self.poses[:, 2]))),
                           float(np.dot(w, np.cos(self.poses[:, 2]))))
        return Pose2D(x=x, y=y, theta=wrap_angle(theta), utime=utime)

    def effective_sample_size(self) -> float:
        return 1.0 / float(np.sum(self.weights ** 2))


def init_particles(pose: Pose2D, cfg: SlamConfig, rng) -> ParticleSet:
    """Gaussian cloud around a pose guess."""
    n = cfg.num_particles
    poses = np.empty((n, 3))
    poses[:, 0] = pose.x + rng.normal(0.0, cfg.init_sigma_xy, n)
    poses[:, 1] = pose.y + rng.normal(0.0, cfg.init_sigma_xy, n)
    poses[:, 2] = pose.theta + rng.normal(0.0, cfg.init_sigma_theta, n)
    return ParticleSet(poses, np.full(n, 1.0 / n))


def apply_action_model(particles: ParticleSet, odom_prev: Pose2D,
                       odom_now: Pose2D, cfg: SlamConfig, rng) -> ParticleSet:
    """Propagate particles by the odometry delta with rot-trans-rot noise.

    The delta is decomposed in the odometry frame and re-applied in each
    particle's own frame, so frame offsets between odometry and map are
    handled naturally.
    """
    dx = odom_now.x - odom_prev.x
    dy = odom_now.y - odom_prev.y
    trans = math.hypot(dx, dy)
    dtheta = wrap_angle(odom_now.theta - odom_prev.theta)
    if trans < 1e-9:
        rot1 = 0.0
        rot2 = dtheta
    else:
        rot1 = wrap_angle(math.atan2(dy, dx) - odom_prev.theta)
        rot2 = wrap_angle(dtheta - rot1)
    n = particles.num_particles
    s_rot1 = cfg.k1 * abs(rot1) + cfg.k2 * trans
    s_rot2 = cfg.k1 * abs(rot2) + cfg.k2 * trans
    s_trans = cfg.k3 * trans
    rot1_h = rot1 + (rng.normal(0.0, s_rot1, n) if s_rot1 > 0 else 0.0)
    rot2_h = rot2 + (rng.normal(0.0, s_rot2, n) if s_rot2 > 0 else 0.0)
    trans_h = trans + (rng.normal(0.0, s_trans, n) if s_trans > 0 else 0.0)
    poses = particles.poses.copy()
    heading = poses[:, 2] + rot1_h
    poses[:, 0] += trans_h * np.cos(heading)
    poses[:, 1] += trans_h * np.sin(heading)
    poses[:, 2] = np.arctan2(np.sin(heading + rot2_h), np.cos(heading + rot2_h))
    return ParticleSet(poses, particles.weights.copy())


def _subsample_beams(scan: LidarScan, every: int):
    valid = scan.ranges > 0.0
    idx = np.flatnonzero(valid)[::max(1, every)]
    return scan.ranges[idx], scan.thetas[idx]


@dataclass
class SensorModelDiagnostics:
    degenerate_updates: int = 0


def apply_sensor_model(particles: ParticleSet, scan: LidarScan,
                       grid: OccupancyGrid, cfg: SlamConfig,
                       diagnostics: SensorModelDiagnostics | None = None
                       ) -> ParticleSet:
    """Reweight particles by per-beam Gaussian range likelihood.

    Expected ranges come from raycasting in the map. Per-beam
    log-likelihood is floored at log(p_floor). Weights renormalize;
    a fully degenerate update falls back to uniform weights.
    """
    ranges, bearings = _subsample_beams(scan, cfg.beam_subsample)
    if len(ranges) == 0:
        return particles.copy()
    log_lik = kernels.score_particles(
        grid.cells, grid.origin_x, grid.origin_y, grid.resolution,
        particles.poses, ranges, bearings, cfg.max_range,
        cfg.sigma_sensor, math.log(cfg.p_floor), cfg.sensor_occupied_threshold)
    with np.errstate(divide="ignore"):
        logw = np.log(particles.weights) + log_lik
    logw -= np.max(logw)
    w = np.exp(logw)
    total = float(np.sum(w))
    if not math.isfinite(total) or total <= 0.0:
        if diagnostics is not None:
            diagnostics.degenerate_updates += 1
        w = np.full(particles.num_particles, 1.0 / particles.num_particles)
    else:
        w = w / total
    return ParticleSet(particles.poses.copy(), w)


def resample(particles: ParticleSet, rng) -> ParticleSet:
    """Low-variance (systematic) resampling to uniform weights.

    One random offset r in [0, 1/N); particle j is copied once per
    cumulative-weight point r + i/N falling in its weight interval, so the
    expected copy count is N*w_j and uniform weights copy each exactly once.
    """
    n = particles.num_particles
    r = rng.uniform(0.0, 1.0 / n)
    points = r + np.arange(n) / n
    cumulative = np.cumsum(particles.weights)
    cumulative[-1] = 1.0  # guard against float round-off
    idx = np.searchsorted(cumulative, points, side="right")
    idx = np.minimum(idx, n - 1)
    return ParticleSet(particles.poses[idx].copy(), np.full(n, 1.0 / n))


def update_map(grid: OccupancyGrid, pose: Pose2D, scan: LidarScan,
               cfg: SlamConfig | None = None) -> OccupancyGrid:
    """Apply one scan to the map in place (and return it)."""
    cfg = cfg or SlamConfig()
    kernels.update_map_cells(
        grid.cells, grid.origin_x, grid.origin_y, grid.resolution,
        pose.x, pose.y, pose.theta, scan.ranges, scan.thetas,
        cfg.max_range, cfg.hit_odds, cfg.miss_odds)
    grid.utime = scan.utime
    return grid


class SlamNode:
    """Sequential SLAM state machine over (scan, odometry) updates."""

    def __init__(self, cfg: SlamConfig | None = None, seed: int = 0,
                 grid: OccupancyGrid | None = None,
                 mode: SlamMode = SlamMode.FULL_SLAM):
        self.cfg = cfg or SlamConfig()
        self.rng = np.random.default_rng(seed)
        self.mode = mode
        if grid is None:
            w, h = self.cfg.map_size
            grid = OccupancyGrid.blank(self.cfg.map_origin[0],
                                       self.cfg.map_origin[1],
                                       self.cfg.map_resolution, w, h)
        self.grid = grid
        self.particles: ParticleSet | None = None
        self.last_odom: Pose2D | None = None
        self.last_pose: Pose2D | None = None
        self.diagnostics = SensorModelDiagnostics()

    def set_mode(self, mode: SlamMode) -> None:
        self.mode = mode

    def reset(self, odom: Pose2D | None = None) -> None:
        """Clear the map and reinitialize particles at the odometry pose."""
        self.grid.cells.fill(0)
        pose = odom or self.last_odom or Pose2D()
        self.particles = init_particles(pose, self.cfg, self.rng)
        self.last_pose = pose
        self.last_odom = odom or self.last_odom

    def _map_is_empty(self) -> bool:
        return not np.any(self.grid.cells)

    def step(self, scan: LidarScan, odom: Pose2D):
        """One SLAM update. Returns (posterior pose, map or None).

        The map is returned (for publishing) only when it changed.
        """
        if self.mode is SlamMode.IDLE:
            self.last_odom = odom
            return self.last_pose, None

        if self.particles is None:
            self.particles = init_particles(odom, self.cfg, self.rng)
            self.last_pose = odom
        if self.last_odom is None:
            self.last_odom = odom

        if self.mode is SlamMode.FULL_SLAM and self._map_is_empty():
            # bootstrap: map the first scan from odometry before localizing
            update_map(self.grid, odom, scan, self.cfg)
            self.particles = init_particles(odom, self.cfg, self.rng)
            self.last_odom = odom
            self.last_pose = odom
            return odom, self.grid

        self.particles = apply_action_model(self.particles, self.last_odom,
                                            odom, self.cfg, self.rng)
        self.last_odom = odom
        self.particles = apply_sensor_model(self.particles, scan, self.grid,
                                            self.cfg, self.diagnostics)
        pose = self.particles.posterior_pose(utime=scan.utime)
        neff = self.particles.effective_sample_size()
        if neff < self.cfg.neff_fraction * self.particles.num_particles:
            self.particles = resample(self.particles, self.rng)
        self.last_pose = pose

        if self.mode is SlamMode.FULL_SLAM:
            update_map(self.grid, pose, scan, self.cfg)
            return pose, self.grid
        return pose, None
