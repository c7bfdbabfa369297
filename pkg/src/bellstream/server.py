"""Asyncio network layer: line-delimited JSON over persistent TCP.

One server fronts the hub core for both user sessions (the game) and
labs.  Message handling per connection is sequential, which is what
makes the Oracle protocol sound: a prediction requested before a bit is
revealed is always computed from the state before that bit.
"""

from __future__ import annotations

import asyncio
import json
import time

from .hub import HubCore, SubscriptionError, UnknownSessionError

MAX_LINE = 1 << 16


def encode(message: dict) -> bytes:
    return (json.dumps(message, separators=(",", ":")) + "\n").encode("ascii")


def decode(raw: bytes) -> dict:
    message = json.loads(raw)
    if not isinstance(message, dict) or "type" not in message:
        raise ValueError("message must be an object with a 'type' field")
    return message


class HubServer:
    def __init__(
        self,
        core: HubCore,
        host: str = "127.0.0.1",
        port: int = 8765,
        tick_seconds: float = 0.5,
    ):
        self.core = core
        self.host = host
        self.port = port
        self.tick_seconds = tick_seconds
        self._server: asyncio.AbstractServer | None = None
        self._tick_task: asyncio.Task | None = None
        self._lab_writers: dict[str, asyncio.StreamWriter] = {}
        self._connections: set[asyncio.StreamWriter] = set()
        self._lock = asyncio.Lock()  # serializes core mutation across connections

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle, self.host, self.port)
        self._tick_task = asyncio.create_task(self._ticker())

    @property
    def address(self) -> tuple[str, int]:
        assert self._server is not None
        sock = self._server.sockets[0]
        return sock.getsockname()[:2]

    async def stop(self) -> None:
        if self._tick_task is not None:
            self._tick_task.cancel()
            try:
                await self._tick_task
            except asyncio.CancelledError:
                pass
        async with self._lock:
            self.core.tick()
            deliveries = self.core.flush()
            await self._push_streams(deliveries)
        if self._server is not None:
            self._server.close()
        # EOF every open connection so blocked handlers can finish
        for writer in list(self._connections):
            writer.close()
        if self._server is not None:
            await self._server.wait_closed()
        self.core.close()

    async def _ticker(self) -> None:
        ticks = 0
        while True:
            await asyncio.sleep(self.tick_seconds)
            async with self._lock:
                self.core.tick()
                ticks += 1
                if ticks % self.core.ticks_per_interval == 0:
                    deliveries = self.core.distribute()
                    await self._push_streams(deliveries)

    async def _push_streams(self, deliveries) -> None:
        for lab_id, delivery in deliveries.items():
            writer = self._lab_writers.get(lab_id)
            if writer is None or writer.is_closing():
                continue
            writer.write(encode({
                "type": "stream",
                "interval_id": delivery.interval_id,
                "payload": delivery.bits,
                "archived_from": delivery.archived_from,
            }))
            try:
                await writer.drain()
            except ConnectionError:
                pass

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        lab_ids: list[str] = []
        self._connections.add(writer)
        try:
            while True:
                try:
                    raw = await reader.readline()
                except (ConnectionError, asyncio.LimitOverrunError):
                    break
                if not raw:
                    break
                try:
                    message = decode(raw)
                except (ValueError, json.JSONDecodeError) as exc:
                    writer.write(encode({"type": "error", "error": f"bad message: {exc}"}))
                    await writer.drain()
                    continue
                reply = None
                async with self._lock:
                    reply = self._dispatch(message, writer, lab_ids)
                if reply is not None:
                    writer.write(encode(reply))
                    await writer.drain()
        finally:
            self._connections.discard(writer)
            for lab_id in lab_ids:
                self._lab_writers.pop(lab_id, None)
            writer.close()

    def _dispatch(self, message: dict, writer, lab_ids: list[str]) -> dict | None:
        mtype = message["type"]
        core = self.core
        try:
            if mtype == "hello":
                core.register(message["user"], now=time.time())
                return None
            if mtype == "bits":
                core.ingest(
                    message["user"], message["payload"],
                    origin_ts=message.get("ts"), now=time.time(),
                )
                return None  # silent: acceptance is never acknowledged
            if mtype == "predict?":
                prediction = core.predict(message["user"])
                return {"type": "prediction", "bit": prediction.bit}
            if mtype == "mission_done":
                report = core.mission_done(message["user"], int(message["n"]))
                return {"type": "feedback", "per_lab": report}
            if mtype == "subscribe":
                core.subscribe(
                    message["lab"], int(message["rate"]), bool(message.get("burst", False)))
                self._lab_writers[message["lab"]] = writer
                lab_ids.append(message["lab"])
                return {"type": "ack", "lab": message["lab"]}
            if mtype == "rate":
                core.set_rate(message["lab"], int(message["rate"]))
                return {"type": "ack", "lab": message["lab"]}
            return {"type": "error", "error": f"unknown message type {mtype!r}"}
        except UnknownSessionError as exc:
            return {"type": "error", "error": f"unknown session {exc}"}
        except (SubscriptionError, ValueError, KeyError) as exc:
            return {"type": "error", "error": str(exc)}


class LineClient:
    """Minimal line-JSON client used by synthetic users, labs, and tests."""

    def __init__(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        self.reader = reader
        self.writer = writer

    @classmethod
    async def connect(cls, host: str, port: int) -> "LineClient":
        reader, writer = await asyncio.open_connection(host, port)
        return cls(reader, writer)

    async def send(self, message: dict) -> None:
        self.writer.write(encode(message))
        await self.writer.drain()

    async def recv(self) -> dict:
        raw = await self.reader.readline()
        if not raw:
            raise ConnectionError("connection closed")
        return decode(raw)

    async def request(self, message: dict) -> dict:
        await self.send(message)
        return await self.recv()

    async def close(self) -> None:
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except ConnectionError:
            pass
