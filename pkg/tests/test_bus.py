import threading
import time

import pytest

from mbot_stack import channels
from mbot_stack.bus import MessageBus
from mbot_stack.types import Pose2D, Twist2D


def twist(i):
    return Twist2D(vx=float(i), utime=i)


class TestPublishSubscribe:
    def test_publish_no_subscribers_is_noop(self):
        bus = MessageBus()
        bus.publish(channels.MBOT_VEL_CMD, twist(1))  # must not raise

    def test_fifo_order(self):
        bus = MessageBus()
        sub = bus.subscribe(channels.MBOT_VEL_CMD)
        for i in range(3):
            bus.publish(channels.MBOT_VEL_CMD, twist(i))
        got = [sub.receive(timeout=1).decoded().utime for _ in range(3)]
        assert got == [0, 1, 2]

    def test_drop_oldest_on_overflow(self):
        bus = MessageBus()
        sub = bus.subscribe(channels.MBOT_VEL_CMD, capacity=2)
        for i in range(1, 5):
            bus.publish(channels.MBOT_VEL_CMD, twist(i))
        got = [m.decoded().utime for m in sub.drain()]
        assert got == [3, 4]

    def test_no_replay_before_subscribe(self):
        bus = MessageBus()
        bus.publish(channels.MBOT_VEL_CMD, twist(1))
        sub = bus.subscribe(channels.MBOT_VEL_CMD)
        assert sub.receive(timeout=0) is None

    def test_fan_out(self):
        bus = MessageBus()
        subs = [bus.subscribe(channels.MBOT_VEL_CMD) for _ in range(2)]
        for i in range(5):
            bus.publish(channels.MBOT_VEL_CMD, twist(i))
        for sub in subs:
            assert [m.decoded().utime for m in sub.drain()] == list(range(5))

    def test_unknown_channel_rejected(self):
        bus = MessageBus()
        with pytest.raises(channels.UnknownChannelError):
            bus.subscribe("BOGUS")
        with pytest.raises(channels.UnknownChannelError):
            bus.publish("BOGUS", twist(0))

    def test_malformed_payload_rejected(self):
        bus = MessageBus()
        with pytest.raises(TypeError):
            bus.publish(channels.ODOMETRY, twist(0))

    def test_capacity_validation(self):
        bus = MessageBus()
        with pytest.raises(ValueError):
            bus.subscribe(channels.MBOT_VEL_CMD, capacity=0)

    def test_unsubscribe_stops_delivery(self):
        bus = MessageBus()
        sub = bus.subscribe(channels.MBOT_VEL_CMD)
        sub.close()
        bus.publish(channels.MBOT_VEL_CMD, twist(1))
        assert sub.receive(timeout=0) is None


class TestLatest:
    def test_never_published_is_none(self):
        assert MessageBus().latest(channels.ODOMETRY) is None

    def test_latest_is_most_recent(self):
        bus = MessageBus()
        bus.publish(channels.MBOT_VEL_CMD, twist(1))
        bus.publish(channels.MBOT_VEL_CMD, twist(2))
        assert bus.latest(channels.MBOT_VEL_CMD).decoded().utime == 2

    def test_concurrent_publishers_latest_valid(self):
        """Two publishers x 1000 messages: every sampled latest was actually
        published, per-publisher sequence numbers never regress, and the
        final value is some publisher's final message."""
        bus = MessageBus()
        n = 1000
        published = set()

        def worker(pid):
            for i in range(n):
                # encode publisher and sequence in the pose fields
                bus.publish(channels.ODOMETRY, Pose2D(x=float(pid), y=float(i),
                                                      utime=i))

        threads = [threading.Thread(target=worker, args=(p,)) for p in (1, 2)]
        samples = []
        stop = threading.Event()

        def sampler():
            while not stop.is_set():
                msg = bus.latest(channels.ODOMETRY)
                if msg is not None:
                    samples.append(msg.decoded())

        st = threading.Thread(target=sampler)
        st.start()
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        stop.set()
        st.join()

        last_seq = {1: -1, 2: -1}
        for pose in samples:
            pid, seq = int(pose.x), int(pose.y)
            assert pid in (1, 2) and 0 <= seq < n  # only published values
            assert seq >= last_seq[pid]  # monotone per publisher
            last_seq[pid] = seq
        final = bus.latest(channels.ODOMETRY).decoded()
        assert int(final.y) == n - 1


class TestBackpressure:
    def test_publisher_never_blocks_on_full_queue(self):
        bus = MessageBus()
        bus.subscribe(channels.MBOT_VEL_CMD, capacity=1)  # never drained
        start = time.monotonic()
        for i in range(10_000):
            bus.publish(channels.MBOT_VEL_CMD, twist(i))
        assert time.monotonic() - start < 5.0

    def test_received_is_suffix_of_published(self):
        bus = MessageBus()
        sub = bus.subscribe(channels.MBOT_VEL_CMD, capacity=7)
        total = 50
        for i in range(total):
            bus.publish(channels.MBOT_VEL_CMD, twist(i))
        got = [m.decoded().utime for m in sub.drain()]
        assert got == list(range(total - 7, total))  # drops only from the old end

    def test_exactly_once_without_overflow(self):
        bus = MessageBus()
        sub = bus.subscribe(channels.MBOT_VEL_CMD, capacity=100)
        for i in range(100):
            bus.publish(channels.MBOT_VEL_CMD, twist(i))
        assert [m.decoded().utime for m in sub.drain()] == list(range(100))
