"""Operator access layer: REST reads, commands, and a live tick stream.

The service owns a running kernel.  Reads come from committed store
snapshots.  Commands never touch the store directly: each one becomes
a write request frame sent from the gateway's own network node to the
target device, and the acknowledgement is whatever the device answers.
A websocket stream pushes one message per tick with the points that
changed, so a display can follow the process and notice silence.
"""
from __future__ import annotations

import json
import queue
import threading
import time
from dataclasses import dataclass, field

import anyio
from contextlib import asynccontextmanager
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from .compile import RangeSpec
from .errors import SgcrError, Unroutable
from .export import export_topology
from .ied_runtime import decode_messages, encode_message
from .kernel import RangeKernel
from .net_emu import Frame, TCP_SEGMENT
from .scl.documents import split_attribute_path

_REPLY_WINDOW_MS = 5.0
_STREAM_DEPTH = 256


@dataclass
class _Command:
    point: str
    value: object
    operator_id: str
    reply: queue.Queue = field(default_factory=lambda: queue.Queue(1))


class GatewayService:
    """Steps the kernel on a background thread and brokers operator I/O."""

    def __init__(self, spec: RangeSpec, tick_ms: float = 100.0,
                 realtime: bool = True):
        self.spec = spec
        self.tick_ms = tick_ms
        self.realtime = realtime
        self.kernel = RangeKernel(spec, tick_ms=tick_ms, record=False)
        gateways = sorted(n for n, node in spec.topology.nodes.items()
                          if node.kind == "gateway")
        if not gateways:
            raise SgcrError("topology has no gateway node to serve from")
        self.node = gateways[0]
        self.kernel.emulator.register_handler(self.node, self._on_frame)
        self.points = {p.point_name: p for p in spec.scada_points}
        self.command_log: list[dict] = []
        self._point_sources = self._resolve_point_sources()
        self._replies: list[dict] = []
        self._commands: queue.Queue[_Command] = queue.Queue()
        self._streams: list[queue.Queue] = []
        self._streams_lock = threading.Lock()
        self._last_sent: dict[str, object] = {}
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def _resolve_point_sources(self) -> dict[str, str | None]:
        """SCADA point name -> backing store point, when one exists."""
        sources: dict[str, str | None] = {}
        for name, sp in self.points.items():
            device = split_attribute_path(sp.attribute_path)[0]
            ied = self.kernel.ieds.get(device)
            sources[name] = (ied.mapping.get(sp.attribute_path)
                             if ied is not None else None)
        return sources

    def point_bindings(self) -> dict[str, str | None]:
        """SCADA point name -> id of the power switch it tracks, if any.

        A display needs this to colour breaker symbols from live point
        values.  Point names alone cannot settle it: a station with two
        tie breakers has one "<station>.tie.pos" point, and only the
        store wiring says which device that is.
        """
        switch_ids = {s.id for s in self.spec.network.switches}
        bindings: dict[str, str | None] = {}
        for name, source in self._point_sources.items():
            sid = source[:-len(".pos")] if source and source.endswith(".pos") \
                else None
            bindings[name] = sid if sid in switch_ids else None
        return bindings

    # -- lifecycle ----------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self._loop, daemon=True,
                                        name="range-kernel")
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def _loop(self) -> None:
        while not self._stop.is_set():
            started = time.monotonic()
            self.kernel.step()
            self._drain_commands()
            self._broadcast()
            if self.realtime:
                remaining = (self.tick_ms / 1000.0
                             - (time.monotonic() - started))
                if remaining > 0:
                    self._stop.wait(remaining)

    # -- reads --------------------------------------------------------------

    def point_state(self, name: str) -> dict | None:
        sp = self.points.get(name)
        if sp is None:
            return None
        snap = self.kernel.store.snapshot()
        source = self._point_sources.get(name)
        if source is not None and source in snap.values:
            pv = snap.values[source]
            value, quality = pv.value, pv.quality
        else:
            device = split_attribute_path(sp.attribute_path)[0]
            ied = self.kernel.ieds.get(device)
            value = ied.data_model.get(sp.attribute_path) if ied else None
            quality = "good" if value is not None else "invalid"
        return {"name": name, "path": sp.attribute_path,
                "writable": sp.writable, "value": value,
                "quality": quality, "tick": snap.tick}

    def all_points(self) -> dict:
        snap_tick = self.kernel.store.snapshot().tick
        return {"tick": snap_tick,
                "points": [self.point_state(name)
                           for name in sorted(self.points)]}

    # -- commands -----------------------------------------------------------

    def submit(self, name: str, value: object, operator_id: str) -> dict:
        """Queue a command for the stepping thread; blocks for the ack."""
        cmd = _Command(point=name, value=value, operator_id=operator_id)
        self._commands.put(cmd)
        return cmd.reply.get(timeout=max(10.0, self.tick_ms / 100.0))

    def _drain_commands(self) -> None:
        while True:
            try:
                cmd = self._commands.get_nowait()
            except queue.Empty:
                return
            result = self._execute(cmd)
            self.command_log.append({
                "tick": self.kernel.tick, "point": cmd.point,
                "value": cmd.value, "operator_id": cmd.operator_id,
                "result": result})
            cmd.reply.put(result)

    def _execute(self, cmd: _Command) -> dict:
        sp = self.points[cmd.point]
        device = split_attribute_path(sp.attribute_path)[0]
        payload = encode_message({"op": "write",
                                  "path": sp.attribute_path,
                                  "value": cmd.value})
        self._replies.clear()
        try:
            self.kernel.emulator.send_frame(Frame(
                kind=TCP_SEGMENT, src=self.node, dst=device,
                payload=payload))
        except Unroutable:
            return {"ok": False, "error": "IedUnreachable"}
        self.kernel.emulator.run_until(
            self.kernel.emulator.now_ms + _REPLY_WINDOW_MS)
        if not self._replies:
            return {"ok": False, "error": "IedUnreachable"}
        resp = self._replies[0]
        if resp.get("ok"):
            return {"ok": True, "value": resp.get("value"),
                    "tick": self.kernel.tick}
        return {"ok": False, "error": resp.get("error", "RequestFailed")}

    def _on_frame(self, frame: Frame, time_ms: float) -> None:
        responses, _ = decode_messages(frame.payload)
        self._replies.extend(responses)

    # -- streaming ----------------------------------------------------------

    def open_stream(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(_STREAM_DEPTH)
        with self._streams_lock:
            self._streams.append(q)
        return q

    def close_stream(self, q: queue.Queue) -> None:
        with self._streams_lock:
            if q in self._streams:
                self._streams.remove(q)

    def _broadcast(self) -> None:
        updates = []
        snap = self.kernel.store.snapshot()
        for name in sorted(self.points):
            source = self._point_sources.get(name)
            if source is None or source not in snap.values:
                continue
            value = snap.values[source].value
            if self._last_sent.get(name, ...) != value:
                self._last_sent[name] = value
                updates.append({"point": name, "value": value})
        message = {"tick": self.kernel.tick - 1, "updates": updates}
        with self._streams_lock:
            streams = list(self._streams)
        for q in streams:
            try:
                q.put_nowait(message)
            except queue.Full:
                pass  # a stalled client loses frames, not the service


def create_app(spec: RangeSpec, tick_ms: float = 100.0,
               realtime: bool = True) -> FastAPI:
    """REST and websocket front for one running range."""
    service = GatewayService(spec, tick_ms=tick_ms, realtime=realtime)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        service.start()
        yield
        service.stop()

    app = FastAPI(title="range gateway", lifespan=lifespan)
    app.state.service = service

    @app.get("/points")
    def points() -> dict:
        return service.all_points()

    @app.get("/points/{name}")
    def point(name: str):
        state = service.point_state(name)
        if state is None:
            return JSONResponse({"error": "NoSuchPoint"}, status_code=404)
        return state

    @app.post("/points/{name}/command")
    def command(name: str, body: dict):
        sp = service.points.get(name)
        if sp is None:
            return JSONResponse({"error": "NoSuchPoint"}, status_code=404)
        if not sp.writable:
            return JSONResponse({"error": "NotWritable"}, status_code=403)
        if "value" not in body:
            return JSONResponse({"error": "MissingValue"}, status_code=422)
        result = service.submit(name, body["value"],
                                str(body.get("operator_id", "anonymous")))
        if result.get("ok"):
            return result
        status = 502 if result.get("error") == "IedUnreachable" else 409
        return JSONResponse(result, status_code=status)

    @app.get("/model")
    def model() -> dict:
        bindings = service.point_bindings()
        return {
            "power": json.loads(export_topology(spec, "power", "json")),
            "cyber": json.loads(export_topology(spec, "cyber", "json")),
            "points": [{"name": p.point_name, "path": p.attribute_path,
                        "writable": p.writable,
                        "switch": bindings.get(p.point_name)}
                       for p in sorted(spec.scada_points,
                                       key=lambda p: p.point_name)],
        }

    @app.websocket("/stream")
    async def stream(ws: WebSocket) -> None:
        await ws.accept()
        q = service.open_stream()
        try:
            while True:
                try:
                    message = await anyio.to_thread.run_sync(
                        lambda: q.get(timeout=1.0))
                except queue.Empty:
                    continue
                await ws.send_json(message)
        except WebSocketDisconnect:
            pass
        finally:
            service.close_stream(q)

    return app
