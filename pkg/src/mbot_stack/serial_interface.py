"""Host-side serial interface: bus channels <-> framed board protocol.

Transport-agnostic: the same code runs over an in-memory byte link (the
deterministic sim wiring) or a TCP stream to a BoardServer, mirroring
real hardware behind a USB-serial port.
"""

from __future__ import annotations

import socket
from collections import deque

from . import channels
from .board import (
    TOPIC_ENCODERS,
    TOPIC_ODOMETRY,
    TOPIC_TWIST_CMD,
    TOPIC_WHEEL_CMD,
    FrameDecoder,
    SerialFrame,
    encode_frame,
)
from .bus import MessageBus
from .types import EncoderReading, Pose2D, decode_payload, encode_payload


class ByteLink:
    """One endpoint of an in-memory duplex byte stream."""

    def __init__(self):
        self._inbox: deque = deque()
        self.peer: "ByteLink | None" = None

    @classmethod
    def pair(cls) -> tuple["ByteLink", "ByteLink"]:
        a, b = cls(), cls()
        a.peer, b.peer = b, a
        return a, b

    def send_bytes(self, data: bytes) -> None:
        self.peer._inbox.append(data)

    def receive_bytes(self) -> bytes:
        out = b"".join(self._inbox)
        self._inbox.clear()
        return out


class TcpLink:
    """Byte link over a connected TCP socket (non-blocking reads)."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._sock.setblocking(False)

    def send_bytes(self, data: bytes) -> None:
        self._sock.sendall(data)

    def receive_bytes(self) -> bytes:
        chunks = []
        while True:
            try:
                chunk = self._sock.recv(4096)
            except BlockingIOError:
                break
            if not chunk:
                break
            chunks.append(chunk)
        return b"".join(chunks)

    def close(self) -> None:
        self._sock.close()


class SerialInterface:
    """Pumps twist/wheel commands down and telemetry up, one tick at a time."""

    def __init__(self, bus: MessageBus, link):
        self.bus = bus
        self.link = link
        self.decoder = FrameDecoder()
        self._vel_sub = bus.subscribe(channels.MBOT_VEL_CMD)
        self._wheel_sub = bus.subscribe(channels.MBOT_MOTOR_CMD)

    def pump_commands(self) -> None:
        """Forward any queued bus commands to the board as frames."""
        out = []
        for msg in self._vel_sub.drain():
            out.append(encode_frame(SerialFrame(TOPIC_TWIST_CMD, msg.payload)))
        for msg in self._wheel_sub.drain():
            out.append(encode_frame(SerialFrame(TOPIC_WHEEL_CMD, msg.payload)))
        if out:
            self.link.send_bytes(b"".join(out))

    def pump_telemetry(self) -> None:
        """Decode inbound frames and publish them on the bus."""
        data = self.link.receive_bytes()
        if not data:
            return
        for frame in self.decoder.feed(data):
            if frame.topic_id == TOPIC_ENCODERS:
                self.bus.publish(channels.MBOT_ENCODERS,
                                 decode_payload(EncoderReading, frame.payload))
            elif frame.topic_id == TOPIC_ODOMETRY:
                self.bus.publish(channels.ODOMETRY,
                                 decode_payload(Pose2D, frame.payload))

    def close(self) -> None:
        self._vel_sub.close()
        self._wheel_sub.close()
