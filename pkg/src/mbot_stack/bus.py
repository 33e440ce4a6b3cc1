"""In-process publish/subscribe bus with bounded per-subscriber queues.

Overflow policy is drop-oldest: fresh sensor data beats stale. Publishers
never block on slow subscribers. There is no replay: a subscription only
sees messages published after it was created.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Optional

from . import channels

DEFAULT_CAPACITY = 64


@dataclass(frozen=True)
class BusMessage:
    channel: str
    payload: bytes
    utime: int

    def decoded(self):
        return channels.decode(self.channel, self.payload)


class Subscription:
    """One subscriber's bounded FIFO delivery queue."""

    def __init__(self, bus: "MessageBus", channel: str, capacity: int,
                 on_deliver=None):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self._bus = bus
        self.channel = channel
        self._queue: deque = deque(maxlen=capacity)
        self._cond = threading.Condition()
        self._closed = False
        self._on_deliver = on_deliver

    def _deliver(self, msg: BusMessage) -> None:
        with self._cond:
            self._queue.append(msg)  # deque(maxlen) drops the oldest
            self._cond.notify()
        if self._on_deliver is not None:
            self._on_deliver()  # wake hint only; runs outside all bus locks

    def receive(self, timeout: Optional[float] = None) -> Optional[BusMessage]:
        """Pop the oldest queued message, blocking up to ``timeout`` seconds."""
        with self._cond:
            if not self._queue and timeout != 0:
                self._cond.wait_for(lambda: self._queue or self._closed, timeout)
            if self._queue:
                return self._queue.popleft()
            return None

    def drain(self) -> list:
        """Pop everything currently queued without blocking."""
        with self._cond:
            out = list(self._queue)
            self._queue.clear()
            return out

    def close(self) -> None:
        self._bus.unsubscribe(self)
        with self._cond:
            self._closed = True
            self._cond.notify_all()


class MessageBus:
    """Topic bus for all stack processes. Thread-safe."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subs: dict[str, list[Subscription]] = {}
        self._latest: dict[str, BusMessage] = {}

    def publish(self, channel: str, obj, utime: Optional[int] = None) -> None:
        payload = channels.encode(channel, obj)  # validates channel + type
        if utime is None:
            utime = getattr(obj, "utime", 0)
        msg = BusMessage(channel=channel, payload=payload, utime=int(utime))
        with self._lock:
            self._latest[channel] = msg
            subs = list(self._subs.get(channel, ()))
        # deliver outside the bus lock; subscription locks are per-queue
        for sub in subs:
            sub._deliver(msg)

    def publish_raw(self, channel: str, payload: bytes, utime: int = 0) -> None:
        """Publish pre-encoded bytes; still validated against the catalog."""
        obj = channels.decode(channel, payload)
        self.publish(channel, obj, utime=utime)

    def subscribe(self, channel: str, capacity: int = DEFAULT_CAPACITY,
                  on_deliver=None) -> Subscription:
        channels.channel_type(channel)
        sub = Subscription(self, channel, capacity, on_deliver=on_deliver)
        with self._lock:
            self._subs.setdefault(channel, []).append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            lst = self._subs.get(sub.channel)
            if lst and sub in lst:
                lst.remove(sub)

    def latest(self, channel: str) -> Optional[BusMessage]:
        channels.channel_type(channel)
        with self._lock:
            return self._latest.get(channel)
