"""Wires the whole sim stack to one bus and steps it deterministically.

One thread owns the simulation clock and steps, in order: command pump,
board dynamics, world physics, telemetry, tracker, lidar + SLAM, plan
requests. With no external clients the full run is reproducible from the
config seed. The bridge server runs on its own thread and talks to this
loop only through the bus.
"""

from __future__ import annotations

import threading
import time

from . import channels
from .board import ControlBoard, FrameDecoder, encode_frame
from .bus import MessageBus
from .config import StackConfig
from .nav import Tracker, inflate, plan_path
from .serial_interface import ByteLink, SerialInterface
from .sim import WorldSim, make_walled_room
from .slam import SlamNode
from .types import Path2D, Pose2D, SlamMode, SlamModeCommand, load_map_file


class SimStack:
    def __init__(self, cfg: StackConfig, bus: MessageBus | None = None):
        cfg.validate()
        self.cfg = cfg
        self.bus = bus or MessageBus()

        if cfg.world_map:
            world_grid = load_map_file(cfg.world_map)
        else:
            world_grid = make_walled_room(10.0, 0.1)
        start = cfg.sim.start_pose()

        self.board = ControlBoard(cfg.drive, seed=cfg.seed + 1,
                                  encoder_noise_sigma=cfg.sim.encoder_noise_sigma)
        self.board.odom = start  # odometry frame anchored at the start pose
        self.world = WorldSim(world_grid, start, cfg.lidar, seed=cfg.seed + 2)

        slam_grid = load_map_file(cfg.load_map) if cfg.load_map else None
        self.slam = SlamNode(cfg.slam, seed=cfg.seed + 3, grid=slam_grid,
                             mode=cfg.initial_slam_mode())
        self.tracker = Tracker(cfg.nav)

        host_link, board_link = ByteLink.pair()
        self.serial = SerialInterface(self.bus, host_link)
        self._board_link = board_link
        self._board_decoder = FrameDecoder()

        self._path_sub = self.bus.subscribe(channels.CONTROLLER_PATH)
        self._mode_sub = self.bus.subscribe(channels.SLAM_MODE)
        self._reset_sub = self.bus.subscribe(channels.SLAM_RESET)
        self._plan_sub = self.bus.subscribe(channels.PLAN_REQUEST)

        self._next_scan = 0
        self._next_control = 0
        self._next_map_pub = 0
        self._next_status = 0
        self._tracker_was_active = False
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    # -- one simulation step

    def tick(self) -> None:
        dt = self.cfg.sim.dt
        dt_us = round(dt * 1e6)

        # host commands -> framed bytes -> board
        self.serial.pump_commands()
        for frame in self._board_decoder.feed(self._board_link.receive_bytes()):
            replies = self.board.handle_frame(frame)
            if replies:
                self._board_link.send_bytes(
                    b"".join(encode_frame(f) for f in replies))

        self.board.step(dt)
        self.world.step(dt, self.board)

        # board telemetry -> framed bytes -> bus
        self._board_link.send_bytes(
            b"".join(encode_frame(f) for f in self.board.telemetry_frames()))
        self.serial.pump_telemetry()

        now = self.world.sim_time
        if now >= self._next_control:
            self._next_control = now + round(1e6 / self.cfg.nav.control_rate)
            self._run_tracker(now)
        if now >= self._next_scan:
            self._next_scan = now + round(1e6 / self.cfg.lidar.scan_rate)
            self._run_slam(now)
        self._serve_plans(now)

    def _current_pose(self) -> Pose2D:
        """Tracker pose source: SLAM pose when SLAM runs, else odometry."""
        if self.slam.mode is not SlamMode.IDLE and self.slam.last_pose is not None:
            return self.slam.last_pose
        latest = self.bus.latest(channels.ODOMETRY)
        return latest.decoded() if latest else self.board.odom

    def _run_tracker(self, now: int) -> None:
        msgs = self._path_sub.drain()
        if msgs:
            self.tracker.set_path(msgs[-1].decoded())
        active = self.tracker.path is not None and not self.tracker.done
        if active or self._tracker_was_active:
            twist = self.tracker.step(self._current_pose())
            self.bus.publish(channels.MBOT_VEL_CMD, twist, utime=now)
        self._tracker_was_active = active and not self.tracker.done

    def _run_slam(self, now: int) -> None:
        scan = self.world.make_scan()
        self.bus.publish(channels.LIDAR, scan)

        # mode/reset apply only between scan updates
        for msg in self._mode_sub.drain():
            self.slam.set_mode(msg.decoded().mode)
        odom = self.board.odom
        if self._reset_sub.drain():
            self.slam.reset(odom)
        pose, grid = self.slam.step(scan, odom)
        if pose is not None:
            self.bus.publish(channels.SLAM_POSE, pose)
        if grid is not None and now >= self._next_map_pub:
            self._next_map_pub = now + round(1e6 / self.cfg.slam.map_publish_rate)
            self.bus.publish(channels.SLAM_MAP, grid.copy(), utime=now)
        if now >= self._next_status:
            self._next_status = now + 1_000_000
            self.bus.publish(channels.SLAM_STATUS,
                             SlamModeCommand(utime=now, mode=self.slam.mode))

    def _serve_plans(self, now: int) -> None:
        for msg in self._plan_sub.drain():
            req = msg.decoded()
            start = req.start or self.slam.last_pose or self.board.odom
            path = plan_path(self.slam.grid, start, req.goal, self.cfg.nav,
                             utime=req.utime)
            if path is None:
                path = Path2D(utime=req.utime, poses=[])
            self.bus.publish(channels.PLAN_RESPONSE, path, utime=req.utime)

    # -- lifecycle

    def run(self, duration: float | None = None) -> None:
        """Step until stopped; paces to wall clock when sim.realtime is set."""
        dt = self.cfg.sim.dt
        end_time = None if duration is None else self.world.sim_time + duration * 1e6
        next_wall = time.monotonic()
        while not self._stop.is_set():
            if end_time is not None and self.world.sim_time >= end_time:
                break
            self.tick()
            if self.cfg.sim.realtime:
                next_wall += dt / self.cfg.sim.time_scale
                delay = next_wall - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    next_wall = time.monotonic()

    def start(self) -> None:
        self._thread = threading.Thread(target=self.run, daemon=True,
                                        name="sim-stack")
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread:
            self._thread.join(timeout=5.0)
