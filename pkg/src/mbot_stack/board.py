"""Control-board emulator behind a byte-stream serial protocol.

Converts body twists to wheel setpoints, integrates first-order motor
dynamics, produces quadrature-style encoder counts, and dead-reckons
odometry. The framed byte protocol (see ``encode_frame``/``FrameDecoder``)
is what travels over the board's stream socket, so the host side is
transport-agnostic like real hardware over USB-serial.
"""

from __future__ import annotations

import math
import socket
import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .types import (
    EncoderReading,
    Pose2D,
    Twist2D,
    WheelCommand,
    decode_payload,
    encode_payload,
    wrap_angle,
)

# serial topic ids
TOPIC_WHEEL_CMD = 1    # in:  WheelCommand
TOPIC_ENCODERS = 2     # out: EncoderReading
TOPIC_TWIST_CMD = 3    # in:  Twist2D
TOPIC_ODOMETRY = 4     # out: Pose2D
TOPIC_TIMESYNC = 5     # in/out echo

DEFAULT_OMNI_ANGLES = (math.pi / 2, 7 * math.pi / 6, 11 * math.pi / 6)


@dataclass(frozen=True)
class DriveConfig:
    drive_type: str = "differential"  # "differential" | "omni3"
    wheel_radius: float = 0.05        # m
    base_radius: float = 0.08         # m
    encoder_resolution: int = 480     # ticks per wheel revolution, after gearing
    max_wheel_speed: float = 30.0     # rad/s
    motor_time_constant: float = 0.05  # s; <= 0 means ideal (no lag)
    omni_angles: tuple = DEFAULT_OMNI_ANGLES

    def __post_init__(self):
        if self.wheel_radius <= 0 or self.base_radius <= 0:
            raise ValueError("wheel_radius and base_radius must be > 0")
        if self.encoder_resolution < 1:
            raise ValueError("encoder_resolution must be >= 1")
        if self.drive_type not in ("differential", "omni3"):
            raise ValueError(f"unknown drive_type: {self.drive_type!r}")

    @property
    def num_wheels(self) -> int:
        return 2 if self.drive_type == "differential" else 3


class DriveError(ValueError):
    pass


def inverse_kinematics(cfg: DriveConfig, twist: Twist2D) -> WheelCommand:
    """Body twist -> wheel angular velocity setpoints.

    Setpoints exceeding the wheel speed limit are scaled down uniformly so
    the commanded twist direction is preserved.
    """
    if not all(math.isfinite(v) for v in (twist.vx, twist.vy, twist.wz)):
        raise DriveError("non-finite twist")
    r = cfg.wheel_radius
    b = cfg.base_radius
    if cfg.drive_type == "differential":
        if twist.vy != 0.0:
            raise DriveError("differential drive cannot actuate vy")
        w = [(twist.vx - b * twist.wz) / r, (twist.vx + b * twist.wz) / r]
    else:
        w = [(-math.sin(a) * twist.vx + math.cos(a) * twist.vy + b * twist.wz) / r
             for a in cfg.omni_angles]
    peak = max(abs(v) for v in w)
    if peak > cfg.max_wheel_speed:
        scale = cfg.max_wheel_speed / peak
        w = [v * scale for v in w]
    return WheelCommand(utime=twist.utime, velocities=tuple(w))


def _omni_forward_matrix(cfg: DriveConfig) -> np.ndarray:
    m = np.array([[-math.sin(a), math.cos(a), cfg.base_radius]
                  for a in cfg.omni_angles]) / cfg.wheel_radius
    return np.linalg.inv(m)


def forward_kinematics(cfg: DriveConfig, wheel_speeds) -> Twist2D:
    """Wheel angular velocities -> body twist. Left-inverse of the above."""
    w = tuple(float(v) for v in wheel_speeds)
    if len(w) != cfg.num_wheels:
        raise DriveError(f"expected {cfg.num_wheels} wheel speeds, got {len(w)}")
    r = cfg.wheel_radius
    b = cfg.base_radius
    if cfg.drive_type == "differential":
        wl, wr = w
        return Twist2D(vx=r * (wl + wr) / 2.0, vy=0.0, wz=r * (wr - wl) / (2.0 * b))
    v = _omni_forward_matrix(cfg) @ np.array(w)
    return Twist2D(vx=float(v[0]), vy=float(v[1]), wz=float(v[2]))


def dead_reckon(cfg: DriveConfig, prev: Pose2D, enc_delta: EncoderReading) -> Pose2D:
    """Advance a pose by one encoder delta using midpoint integration.

    ``enc_delta.ticks`` holds per-wheel tick *deltas* over
    ``enc_delta.delta_time`` microseconds.
    """
    if enc_delta.delta_time <= 0:
        raise ValueError("delta_time must be > 0")
    dt = enc_delta.delta_time * 1e-6
    speeds = [2.0 * math.pi * t / cfg.encoder_resolution / dt for t in enc_delta.ticks]
    tw = forward_kinematics(cfg, speeds)
    theta_mid = prev.theta + tw.wz * dt / 2.0
    c, s = math.cos(theta_mid), math.sin(theta_mid)
    return Pose2D(
        x=prev.x + (tw.vx * c - tw.vy * s) * dt,
        y=prev.y + (tw.vx * s + tw.vy * c) * dt,
        theta=wrap_angle(prev.theta + tw.wz * dt),
        utime=enc_delta.utime,
    )


# --- serial framing --------------------------------------------------------
#
# sync 0xFF, version 0xFE, payload length (2B LE), length checksum,
# topic id (2B LE), payload, data checksum. Checksums are
# 255 - (byte sum mod 256).

SYNC = 0xFF
VERSION = 0xFE
HEADER_LEN = 5  # sync + version + len(2) + len checksum


@dataclass(frozen=True)
class SerialFrame:
    topic_id: int
    payload: bytes


def _checksum(data: bytes) -> int:
    return 255 - (sum(data) % 256)


def encode_frame(frame: SerialFrame) -> bytes:
    if len(frame.payload) > 65535:
        raise ValueError("payload exceeds 65535 bytes")
    length = len(frame.payload).to_bytes(2, "little")
    topic = frame.topic_id.to_bytes(2, "little")
    return (bytes((SYNC, VERSION)) + length + bytes((_checksum(length),))
            + topic + frame.payload + bytes((_checksum(topic + frame.payload),)))


class FrameDecoder:
    """Incremental frame parser: feed any byte chunks, collect frames.

    Garbage and corrupted frames are skipped by resyncing on the next
    0xFF 0xFE pair; drops are counted, never fatal.
    """

    def __init__(self):
        self._buf = bytearray()
        self.dropped = 0

    def feed(self, data: bytes) -> list[SerialFrame]:
        self._buf.extend(data)
        frames = []
        while True:
            start = self._find_sync()
            if start is None:
                break
            del self._buf[:start]
            if len(self._buf) < HEADER_LEN:
                break
            length = int.from_bytes(self._buf[2:4], "little")
            if self._buf[4] != _checksum(self._buf[2:4]):
                self.dropped += 1
                del self._buf[:2]
                continue
            total = HEADER_LEN + 2 + length + 1
            if len(self._buf) < total:
                break
            body = bytes(self._buf[HEADER_LEN:HEADER_LEN + 2 + length])
            if self._buf[total - 1] != _checksum(body):
                self.dropped += 1
                del self._buf[:2]
                continue
            frames.append(SerialFrame(topic_id=int.from_bytes(body[:2], "little"),
                                      payload=body[2:]))
            del self._buf[:total]
        return frames

    def _find_sync(self) -> Optional[int]:
        buf = self._buf
        i = 0
        while True:
            i = buf.find(SYNC, i)
            if i < 0:
                # no sync byte at all; keep nothing
                del buf[:]
                return None
            if i + 1 >= len(buf):
                # sync byte at the tail: keep it, wait for more
                del buf[:i]
                return None
            if buf[i + 1] == VERSION:
                return i
            i += 1


def decode_frames(data: bytes) -> tuple[list[SerialFrame], bytes]:
    """One-shot decode: frames plus unconsumed tail bytes."""
    dec = FrameDecoder()
    frames = dec.feed(data)
    return frames, bytes(dec._buf)


# --- board emulator ---------------------------------------------------------

@dataclass
class _WheelState:
    velocity: float = 0.0      # rad/s, actual
    angle: float = 0.0         # rad, actual cumulative
    meas_angle: float = 0.0    # rad, as seen by the encoder (noise applied)
    ticks: int = 0             # cumulative reported ticks


class ControlBoard:
    """Single-threaded board model stepped by the simulation clock."""

    def __init__(self, cfg: DriveConfig, seed: int = 0,
                 encoder_noise_sigma: float = 0.0):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.encoder_noise_sigma = encoder_noise_sigma
        self.wheels = [_WheelState() for _ in range(cfg.num_wheels)]
        self.setpoints = [0.0] * cfg.num_wheels
        self.utime = 0
        self.odom = Pose2D()
        self.command_errors = 0
        self._last_ticks = tuple(0 for _ in range(cfg.num_wheels))

    # -- command side

    def set_wheel_command(self, cmd: WheelCommand) -> None:
        if len(cmd.velocities) != self.cfg.num_wheels:
            self.command_errors += 1
            return
        lim = self.cfg.max_wheel_speed
        self.setpoints = [max(-lim, min(lim, v)) for v in cmd.velocities]

    def set_twist_command(self, twist: Twist2D) -> None:
        try:
            cmd = inverse_kinematics(self.cfg, twist)
        except DriveError:
            self.command_errors += 1
            return
        self.setpoints = list(cmd.velocities)

    # -- dynamics

    def step(self, dt: float) -> EncoderReading:
        """Advance ``dt`` seconds; returns the encoder delta for this step."""
        if dt <= 0:
            raise ValueError("dt must be > 0")
        tau = self.cfg.motor_time_constant
        dt_us = max(1, round(dt * 1e6))
        self.utime += dt_us
        for w, sp in zip(self.wheels, self.setpoints):
            if tau <= 0:
                travel = sp * dt
                w.velocity = sp
            else:
                decay = math.exp(-dt / tau)
                # exact integral of the first-order response over dt
                travel = sp * dt + (w.velocity - sp) * tau * (1.0 - decay)
                w.velocity = sp + (w.velocity - sp) * decay
            w.angle += travel
            meas = travel
            if self.encoder_noise_sigma > 0:
                meas *= 1.0 + self.rng.normal(0.0, self.encoder_noise_sigma)
            w.meas_angle += meas
            w.ticks = round(w.meas_angle / (2.0 * math.pi)
                            * self.cfg.encoder_resolution)
        ticks = tuple(w.ticks for w in self.wheels)
        delta = tuple(t - p for t, p in zip(ticks, self._last_ticks))
        self._last_ticks = ticks
        reading = EncoderReading(utime=self.utime, ticks=ticks, delta_time=dt_us)
        self.odom = dead_reckon(
            self.cfg, self.odom,
            EncoderReading(utime=self.utime, ticks=delta, delta_time=dt_us))
        return reading

    def true_wheel_velocities(self) -> tuple:
        return tuple(w.velocity for w in self.wheels)

    # -- framed protocol side

    def handle_frame(self, frame: SerialFrame) -> list[SerialFrame]:
        """Process one inbound frame; returns any immediate replies."""
        if frame.topic_id == TOPIC_WHEEL_CMD:
            self.set_wheel_command(decode_payload(WheelCommand, frame.payload))
        elif frame.topic_id == TOPIC_TWIST_CMD:
            self.set_twist_command(decode_payload(Twist2D, frame.payload))
        elif frame.topic_id == TOPIC_TIMESYNC:
            return [frame]  # echo
        else:
            self.command_errors += 1
        return []

    def telemetry_frames(self) -> list[SerialFrame]:
        """Current encoder and odometry state as outbound frames."""
        enc = EncoderReading(utime=self.utime,
                             ticks=tuple(w.ticks for w in self.wheels),
                             delta_time=1)
        return [
            SerialFrame(TOPIC_ENCODERS, encode_payload(enc)),
            SerialFrame(TOPIC_ODOMETRY, encode_payload(self.odom)),
        ]


class BoardServer:
    """Exposes a ControlBoard over a local TCP stream socket.

    Clients exchange the framed protocol exactly as they would with real
    hardware behind a USB-serial port. The board is stepped by a background
    thread at ``tick_rate`` Hz while the server runs.
    """

    def __init__(self, board: ControlBoard, host: str = "127.0.0.1",
                 port: int = 0, tick_rate: float = 50.0):
        self.board = board
        self.tick_rate = tick_rate
        self._sock = socket.create_server((host, port))
        self.address = self._sock.getsockname()
        self._stop = threading.Event()
        self._lock = threading.Lock()
        self._thread = threading.Thread(target=self._serve, daemon=True)

    def start(self) -> None:
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        try:
            self._sock.close()
        except OSError:
            pass
        self._thread.join(timeout=2.0)

    def _serve(self) -> None:
        self._sock.settimeout(0.2)
        while not self._stop.is_set():
            try:
                conn, _ = self._sock.accept()
            except (socket.timeout, OSError):
                continue
            with conn:
                self._handle_client(conn)

    def _handle_client(self, conn: socket.socket) -> None:
        conn.settimeout(0.0)
        decoder = FrameDecoder()
        period = 1.0 / self.tick_rate
        while not self._stop.is_set():
            try:
                data = conn.recv(4096)
                if data == b"":
                    return
            except BlockingIOError:
                data = b""
            except OSError:
                return
            out = []
            with self._lock:
                for frame in decoder.feed(data):
                    out.extend(self.board.handle_frame(frame))
                self.board.step(period)
                out.extend(self.board.telemetry_frames())
            try:
                conn.sendall(b"".join(encode_frame(f) for f in out))
            except OSError:
                return
            self._stop.wait(period)
