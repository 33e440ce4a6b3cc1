"""Blocking bridge client for single-threaded robot programs.

One handle owns one websocket connection; calls are sequential with one
outstanding request at a time. Reads block until fresh data arrives or
the per-call timeout expires.
"""

from __future__ import annotations

import json
import math
import time
from typing import Optional

from websockets.exceptions import ConnectionClosed, WebSocketException
from websockets.sync.client import connect

from . import channels
from .types import (
    LidarScan,
    OccupancyGrid,
    Path2D,
    PlanRequest,
    Pose2D,
    SlamMode,
    SlamModeCommand,
    SlamResetCommand,
    Twist2D,
)


class BridgeError(Exception):
    pass


class BridgeConnectionError(BridgeError):
    """Transport failure: connection refused, reset, or closed."""


class BridgeTimeoutError(BridgeError):
    """No data arrived on the requested channel within the timeout."""


class RobotHandle:
    """Synchronous robot interface over the bridge websocket."""

    def __init__(self, address: str = "ws://localhost:8765",
                 timeout: float = 1.0, retry_interval: float = 0.02):
        if not address.endswith("/ws"):
            address = address.rstrip("/") + "/ws"
        self.address = address
        self.timeout = timeout
        self.retry_interval = retry_interval
        try:
            self._ws = connect(address, open_timeout=timeout + 4.0)
        except (OSError, WebSocketException) as e:
            raise BridgeConnectionError(f"cannot connect to {address}: {e}") from e

    def close(self) -> None:
        try:
            self._ws.close()
        except WebSocketException:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- wire helpers

    def _send(self, env: dict) -> None:
        try:
            self._ws.send(json.dumps(env, separators=(",", ":")))
        except (OSError, WebSocketException) as e:
            raise BridgeConnectionError(f"connection lost: {e}") from e

    def _request_once(self, channel: str, as_bytes: bool, timeout: float):
        """One request/response exchange; returns (data, utime) or None on
        'no data'."""
        env = {"op": "request", "channel": channel}
        if as_bytes:
            env["as_bytes"] = True
        self._send(env)
        try:
            raw = self._ws.recv(timeout=timeout)
        except TimeoutError:
            raise BridgeTimeoutError(f"no response for {channel}") from None
        except (OSError, ConnectionClosed) as e:
            raise BridgeConnectionError(f"connection lost: {e}") from e
        reply = json.loads(raw)
        if reply.get("op") == "error":
            if reply.get("msg") == "no data":
                return None
            raise BridgeError(f"bridge error on {channel}: {reply.get('msg')}")
        if reply.get("op") != "response" or reply.get("channel") != channel:
            raise BridgeError(f"unexpected reply: {raw[:200]}")
        return reply["data"], reply.get("utime", 0)

    def _read(self, channel: str, as_bytes: bool = False,
              timeout: Optional[float] = None):
        """Request the latest value, retrying 'no data' until timeout."""
        timeout = self.timeout if timeout is None else timeout
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise BridgeTimeoutError(f"no data on {channel} "
                                         f"within {timeout} s")
            result = self._request_once(channel, as_bytes,
                                        timeout=max(remaining, 0.01))
            if result is not None:
                data, _ = result
                try:
                    return channels.channel_type(channel).from_dict(data)
                except (KeyError, TypeError, ValueError) as e:
                    raise BridgeError(
                        f"schema mismatch on {channel}: {e}; got keys "
                        f"{sorted(data)}") from e
            time.sleep(self.retry_interval)

    def publish(self, channel: str, obj) -> None:
        self._send({"op": "publish", "channel": channel,
                    "data": obj.to_dict()})

    # -- commands

    def drive(self, vx: float, vy: float = 0.0, wz: float = 0.0) -> None:
        self.publish(channels.MBOT_VEL_CMD, Twist2D(vx=vx, vy=vy, wz=wz))

    def stop(self) -> None:
        self.drive(0.0, 0.0, 0.0)

    def set_slam_mode(self, mode: SlamMode) -> None:
        self.publish(channels.SLAM_MODE, SlamModeCommand(utime=0, mode=mode))

    def reset_slam(self) -> None:
        self.publish(channels.SLAM_RESET, SlamResetCommand(utime=0))

    # -- reads

    def read_odometry(self, timeout: Optional[float] = None) -> Pose2D:
        return self._read(channels.ODOMETRY, timeout=timeout)

    def read_slam_pose(self, timeout: Optional[float] = None) -> Pose2D:
        return self._read(channels.SLAM_POSE, timeout=timeout)

    def read_lidar(self, timeout: Optional[float] = None) -> LidarScan:
        return self._read(channels.LIDAR, timeout=timeout)

    def read_map(self, timeout: Optional[float] = None) -> OccupancyGrid:
        return self._read(channels.SLAM_MAP, as_bytes=True, timeout=timeout)

    def read_path(self, timeout: Optional[float] = None) -> Path2D:
        return self._read(channels.CONTROLLER_PATH, timeout=timeout)

    def _read_pose(self) -> Pose2D:
        """SLAM pose when available, else raw odometry."""
        try:
            return self.read_slam_pose(timeout=0.2)
        except BridgeTimeoutError:
            return self.read_odometry(timeout=0.5)

    # -- higher-level actions

    def plan_to(self, goal_x: float, goal_y: float,
                timeout: Optional[float] = None) -> Path2D:
        """Ask the navigation node for a path from the current pose."""
        req_time = time.monotonic_ns() // 1000
        self.publish(channels.PLAN_REQUEST,
                     PlanRequest(utime=req_time, goal=Pose2D(goal_x, goal_y)))
        timeout = 5.0 if timeout is None else timeout
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            try:
                data, _ = self._request_once(channels.PLAN_RESPONSE, False,
                                             timeout=0.5) or (None, None)
            except BridgeTimeoutError:
                data = None
            if data is not None and int(data.get("utime", -1)) >= req_time:
                path = Path2D.from_dict(data)
                if not path.poses:
                    raise BridgeError("planner found no path")
                return path
            time.sleep(self.retry_interval)
        raise BridgeTimeoutError("no plan response")

    def drive_path(self, path: Path2D, goal_tolerance: float = 0.15,
                   timeout: Optional[float] = None,
                   vx_max: float = 0.5, wz_max: float = 2.0):
        """Publish a path for the tracker and poll until it is reached.

        Returns (success, final_distance_to_goal). The default timeout
        scales with path length and total turn.
        """
        if not path.poses:
            return True, 0.0
        if timeout is None:
            length = sum(math.hypot(b.x - a.x, b.y - a.y)
                         for a, b in zip(path.poses, path.poses[1:]))
            turn = sum(abs(b.theta - a.theta)
                       for a, b in zip(path.poses, path.poses[1:]))
            timeout = 2.0 * (length / vx_max + turn / wz_max) + 5.0
        self.publish(channels.CONTROLLER_PATH, path)
        goal = path.poses[-1]
        deadline = time.monotonic() + timeout
        dist = math.inf
        while time.monotonic() < deadline:
            pose = self._read_pose()
            dist = math.hypot(goal.x - pose.x, goal.y - pose.y)
            if dist <= goal_tolerance:
                return True, dist
            time.sleep(self.retry_interval)
        return False, dist
