import math
import time

import numpy as np
import pytest

from mbot_stack import channels
from mbot_stack.board import (
    TOPIC_TIMESYNC,
    BoardServer,
    ControlBoard,
    DriveConfig,
    FrameDecoder,
    SerialFrame,
    decode_frames,
    encode_frame,
)
from mbot_stack.bus import MessageBus
from mbot_stack.serial_interface import ByteLink, SerialInterface, TcpLink
from mbot_stack.types import Twist2D, decode_payload, encode_payload, Pose2D


class TestFraming:
    def test_golden_empty_frame(self):
        # topic 0, empty payload: FF FE 00 00 FF 00 00 FF
        assert encode_frame(SerialFrame(0, b"")) == bytes.fromhex(
            "fffe0000ff0000ff")

    def test_golden_checksum_arithmetic(self):
        frame = encode_frame(SerialFrame(0x0203, b"\x01"))
        assert frame[:2] == b"\xff\xfe"
        assert frame[2:4] == b"\x01\x00"          # length 1, little endian
        assert frame[4] == 255 - 1                 # length checksum
        assert frame[5:7] == b"\x03\x02"          # topic little endian
        assert frame[8] == 255 - ((3 + 2 + 1) % 256)

    def test_round_trip_random(self):
        rng = np.random.default_rng(3)
        frames = [SerialFrame(int(rng.integers(0, 2**16)),
                              rng.integers(0, 256,
                                           int(rng.integers(0, 200)))
                              .astype(np.uint8).tobytes())
                  for _ in range(10_000)]
        blob = b"".join(encode_frame(f) for f in frames)
        dec = FrameDecoder()
        # feed in uneven chunks to exercise incremental parsing
        out = []
        i = 0
        while i < len(blob):
            n = int(rng.integers(1, 97))
            out.extend(dec.feed(blob[i:i + n]))
            i += n
        assert out == frames
        assert dec.dropped == 0

    def test_bit_flip_drops_one_frame_and_resyncs(self):
        frames = [SerialFrame(7, bytes([i] * 5)) for i in range(5)]
        blob = bytearray(b"".join(encode_frame(f) for f in frames))
        one = len(encode_frame(frames[0]))
        blob[one + 8] ^= 0x40  # corrupt a payload byte of the second frame
        dec = FrameDecoder()
        out = dec.feed(bytes(blob))
        assert out == [frames[0]] + frames[2:]
        assert dec.dropped >= 1

    def test_garbage_between_frames_skipped(self):
        f1, f2 = SerialFrame(1, b"ab"), SerialFrame(2, b"cd")
        blob = (b"\x00\x13\x37" + encode_frame(f1) + b"\xff\x41junk"
                + encode_frame(f2) + b"\xff")
        frames, tail = decode_frames(blob)
        assert frames == [f1, f2]
        assert tail == b"\xff"  # lone sync byte kept for the next chunk

    def test_length_checksum_failure_recovers(self):
        good = encode_frame(SerialFrame(9, b"xyz"))
        bad = bytearray(good)
        bad[4] ^= 0xFF  # corrupt the length checksum
        dec = FrameDecoder()
        out = dec.feed(bytes(bad) + good)
        assert out == [SerialFrame(9, b"xyz")]
        assert dec.dropped == 1

    def test_oversized_payload_rejected(self):
        with pytest.raises(ValueError):
            encode_frame(SerialFrame(0, b"\x00" * 65536))


class TestSerialInterface:
    def test_command_and_telemetry_round_trip(self):
        bus = MessageBus()
        host_link, board_link = ByteLink.pair()
        iface = SerialInterface(bus, host_link)
        board = ControlBoard(DriveConfig())
        dec = FrameDecoder()
        odom_sub = bus.subscribe(channels.ODOMETRY)

        bus.publish(channels.MBOT_VEL_CMD, Twist2D(vx=0.25))
        iface.pump_commands()
        for frame in dec.feed(board_link.receive_bytes()):
            board.handle_frame(frame)
        assert board.setpoints == pytest.approx([5.0, 5.0])

        board.step(0.02)
        board_link.send_bytes(
            b"".join(encode_frame(f) for f in board.telemetry_frames()))
        iface.pump_telemetry()
        pose = odom_sub.receive(timeout=0).decoded()
        assert pose.x > 0

    def test_unknown_topic_ignored(self):
        bus = MessageBus()
        host_link, board_link = ByteLink.pair()
        iface = SerialInterface(bus, host_link)
        board_link.send_bytes(encode_frame(SerialFrame(999, b"{}")))
        iface.pump_telemetry()  # must not raise or publish


class TestBoardServer:
    def test_drive_over_tcp(self):
        """Command a twist over a real TCP socket and watch odometry move."""
        board = ControlBoard(DriveConfig(), seed=0)
        server = BoardServer(board, tick_rate=100.0)
        server.start()
        try:
            link = TcpLink(*server.address)
            dec = FrameDecoder()
            twist = Twist2D(vx=0.3)
            link.send_bytes(encode_frame(
                SerialFrame(3, encode_payload(twist))))
            poses = []
            deadline = time.monotonic() + 3.0
            while time.monotonic() < deadline and (
                    not poses or poses[-1].x < 0.05):
                for frame in dec.feed(link.receive_bytes()):
                    if frame.topic_id == 4:
                        poses.append(decode_payload(Pose2D, frame.payload))
                time.sleep(0.01)
            link.close()
            assert poses, "no odometry frames received"
            assert poses[-1].x > 0.05
            assert abs(poses[-1].y) < 1e-6
        finally:
            server.stop()

    def test_timesync_echo(self):
        board = ControlBoard(DriveConfig())
        server = BoardServer(board, tick_rate=100.0)
        server.start()
        try:
            link = TcpLink(*server.address)
            probe = SerialFrame(TOPIC_TIMESYNC, b"\x01\x02\x03")
            link.send_bytes(encode_frame(probe))
            dec = FrameDecoder()
            deadline = time.monotonic() + 3.0
            echoed = None
            while time.monotonic() < deadline and echoed is None:
                for frame in dec.feed(link.receive_bytes()):
                    if frame.topic_id == TOPIC_TIMESYNC:
                        echoed = frame
                time.sleep(0.01)
            link.close()
            assert echoed == probe
        finally:
            server.stop()
