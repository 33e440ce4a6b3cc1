"""Websocket bridge: relays the internal bus to network clients as JSON.

Wire schema (frozen; one JSON envelope per text frame):

  {"op": "publish",   "channel": "MBOT_VEL_CMD",
   "data": {"vx": 0.0, "vy": 0.0, "wz": 0.0, "utime": 0}}
  {"op": "subscribe", "channel": "SLAM_POSE"}
  {"op": "unsubscribe", "channel": "SLAM_POSE"}
  {"op": "request",   "channel": "SLAM_MAP", "as_bytes": true}
  {"op": "response",  "channel": ..., "data": {...}, "utime": ...}
  {"op": "error",     "channel": ..., "msg": "..."}

Map payloads carry the cell array base64-encoded ("cells_b64") when
``as_bytes`` is requested, else as a plain integer list ("cells").
Subscription traffic always uses the compact form.

The server also serves static files (the web app) for any request path
other than /ws, so one URL covers both.
"""

from __future__ import annotations

import asyncio
import json
import mimetypes
import threading
from http import HTTPStatus
from pathlib import Path
from typing import Optional

from websockets.asyncio.server import serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from . import channels
from .bus import MessageBus

DEFAULT_PORT = 8765
CLIENT_QUEUE_CAPACITY = 16

VALID_OPS = {"subscribe", "unsubscribe", "publish", "request"}


def _error(channel, msg: str) -> str:
    return json.dumps({"op": "error", "channel": channel, "msg": msg})


def _response(channel: str, data: dict, utime: int) -> str:
    return json.dumps({"op": "response", "channel": channel,
                       "data": data, "utime": utime},
                      separators=(",", ":"))


def _payload_dict(channel: str, payload: bytes, as_bytes: bool) -> dict:
    obj = channels.decode(channel, payload)
    if channel in (channels.SLAM_MAP,):
        return obj.to_dict(as_bytes=as_bytes)
    return obj.to_dict()


class LatestCache:
    """Most-recent message per channel, fed by one bus subscription each."""

    def __init__(self, bus: MessageBus):
        self._subs = {ch: bus.subscribe(ch, capacity=1)
                      for ch in channels.CHANNEL_TYPES}

    def get(self, channel: str):
        sub = self._subs.get(channel)
        if sub is None:
            raise channels.UnknownChannelError(channel)
        msgs = sub.drain()
        if msgs:
            self._latest = getattr(self, "_latest", {})
            self._latest[channel] = msgs[-1]
        return getattr(self, "_latest", {}).get(channel)

    def close(self) -> None:
        for sub in self._subs.values():
            sub.close()


class BridgeServer:
    """Runs the websocket endpoint on a background thread."""

    def __init__(self, bus: MessageBus, host: str = "0.0.0.0",
                 port: int = DEFAULT_PORT, webroot: Optional[str] = None):
        self.bus = bus
        self.host = host
        self.port = port
        self.webroot = Path(webroot) if webroot else None
        self.cache = LatestCache(bus)
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._thread: Optional[threading.Thread] = None
        self._started = threading.Event()
        self._stop_future = None

    # -- lifecycle

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, daemon=True,
                                        name="bridge-server")
        self._thread.start()
        if not self._started.wait(timeout=5.0):
            raise RuntimeError("bridge server failed to start")
        if getattr(self, "_startup_error", None):
            raise self._startup_error

    def stop(self) -> None:
        if self._loop and self._stop_future:
            self._loop.call_soon_threadsafe(self._stop_future.set_result, None)
        if self._thread:
            self._thread.join(timeout=5.0)
        self.cache.close()

    def _run(self) -> None:
        asyncio.run(self._main())

    async def _main(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._stop_future = self._loop.create_future()
        self._startup_error = None
        try:
            async with serve(self._handler, self.host, self.port,
                             process_request=self._process_request):
                self._started.set()
                await self._stop_future
        except OSError as e:
            self._startup_error = e
            self._started.set()

    # -- static file serving (non-/ws paths)

    def _process_request(self, connection, request):
        path = request.path.split("?", 1)[0]
        if path == "/ws":
            return None  # proceed with the websocket handshake
        if self.webroot is None:
            return Response(HTTPStatus.NOT_FOUND, "Not Found",
                            Headers([("Content-Type", "text/plain")]),
                            b"not found\n")
        rel = path.lstrip("/") or "index.html"
        target = (self.webroot / rel).resolve()
        if not str(target).startswith(str(self.webroot.resolve())) \
                or not target.is_file():
            return Response(HTTPStatus.NOT_FOUND, "Not Found",
                            Headers([("Content-Type", "text/plain")]),
                            b"not found\n")
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        body = target.read_bytes()
        return Response(HTTPStatus.OK, "OK",
                        Headers([("Content-Type", ctype),
                                 ("Content-Length", str(len(body)))]),
                        body)

    # -- websocket protocol

    async def _handler(self, ws) -> None:
        subs: dict[str, object] = {}  # channel -> bus Subscription
        wake = asyncio.Event()
        loop = asyncio.get_running_loop()

        def on_deliver():
            loop.call_soon_threadsafe(wake.set)

        sender = asyncio.create_task(self._sender(ws, subs, wake))
        try:
            async for raw in ws:
                reply = self._handle_envelope(raw, subs, on_deliver)
                if reply is not None:
                    await ws.send(reply)
        except ConnectionClosed:
            pass
        finally:
            sender.cancel()
            for sub in subs.values():
                sub.close()

    async def _sender(self, ws, subs, wake) -> None:
        """Forward queued bus messages to this client, in order per channel.

        A stalled client only backs up its own bounded bus queues
        (drop-oldest); the bus and other clients are unaffected.
        """
        try:
            while True:
                await wake.wait()
                wake.clear()
                for channel, sub in list(subs.items()):
                    for msg in sub.drain():
                        data = _payload_dict(channel, msg.payload, as_bytes=True)
                        await ws.send(_response(channel, data, msg.utime))
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    def _handle_envelope(self, raw, subs, on_deliver) -> Optional[str]:
        try:
            env = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error(None, "malformed JSON envelope")
        if not isinstance(env, dict):
            return _error(None, "envelope must be a JSON object")
        op = env.get("op")
        if op not in VALID_OPS:
            return _error(env.get("channel"), f"invalid op: {op!r}")
        channel = env.get("channel")
        if channel not in channels.CHANNEL_TYPES:
            return _error(channel, f"unknown channel: {channel!r}")

        if op == "publish":
            data = env.get("data")
            if not isinstance(data, dict):
                return _error(channel, "publish requires a data object")
            try:
                obj = channels.channel_type(channel).from_dict(data)
            except (KeyError, TypeError, ValueError) as e:
                return _error(channel, f"data does not match {channel} schema: {e}")
            self.bus.publish(channel, obj)
            return None

        if op == "request":
            msg = self.cache.get(channel) or self.bus.latest(channel)
            if msg is None:
                return _error(channel, "no data")
            as_bytes = bool(env.get("as_bytes", False))
            return _response(channel, _payload_dict(channel, msg.payload,
                                                    as_bytes), msg.utime)

        if op == "subscribe":
            if channel not in subs:  # duplicate subscribe is idempotent
                subs[channel] = self.bus.subscribe(
                    channel, capacity=CLIENT_QUEUE_CAPACITY,
                    on_deliver=on_deliver)
            return None

        # unsubscribe
        sub = subs.pop(channel, None)
        if sub is not None:
            sub.close()
        return None
