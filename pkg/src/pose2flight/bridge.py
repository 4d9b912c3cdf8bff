"""Operator-console bridge: live pipeline runner plus WebSocket endpoint.

Inbound messages are either skeleton frames in the stream line format or
control records ({"type": "emergency" | "mode" | "takeoff" | "land" |
"reset", ...}). Outbound, every connected client receives a 10 Hz
snapshot of the drone state, current view, last gesture and distance
estimate. Frames are re-stamped to the server's wall clock on arrival so
a single clock drives the whole run.

The emergency path is handled synchronously in the socket handler (the
motors are cut before the acknowledgement is sent), so the velocity-zero
guarantee does not depend on the control-tick phase.
"""

from __future__ import annotations

import dataclasses
import json
import queue
import threading
import time
from typing import Optional

from websockets.sync.server import serve as ws_serve

from .bus import Envelope
from .control import ControlEvent, ControlMode
from .pipeline import (
    TOPIC_DISTANCE,
    TOPIC_GESTURE,
    TOPIC_VIEW,
    Pipeline,
    WallClock,
)
from .skeleton import ParseError, SchemaError, parse_skeleton_frame

SNAPSHOT_PERIOD_MS = 100


class LiveRunner:
    """Wall-clock pipeline loop fed by thread-safe inbound queues."""

    def __init__(self, pipeline: Pipeline):
        self.pipeline = pipeline
        self.clock = WallClock()
        self.frames: queue.Queue = queue.Queue(maxsize=256)
        self.events: queue.Queue = queue.Queue(maxsize=64)
        self.frames_ingested = 0
        self.last_view = None
        self.last_distance = None
        self.last_gesture_info: Optional[dict] = None
        self.photos = 0
        self._last_frame_ts = -1
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        pipeline.bus.subscribe(TOPIC_VIEW, self._on_view)
        pipeline.bus.subscribe(TOPIC_DISTANCE, self._on_distance)
        pipeline.bus.subscribe(TOPIC_GESTURE, self._on_gesture)
        pipeline.control.on_photo = self._on_photo

    def _on_view(self, env: Envelope):
        self.last_view = env.message

    def _on_distance(self, env: Envelope):
        self.last_distance = env

    def _on_gesture(self, env: Envelope):
        self.last_gesture_info = {
            "name": env.message.gesture.value,
            "timestamp_ms": env.message.timestamp_ms,
            "frame_index": self.frames_ingested,
        }

    def _on_photo(self):
        self.photos += 1

    def start(self):
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def stop(self):
        self._stop.set()
        if self._thread:
            self._thread.join(timeout=2.0)

    def submit_frame(self, frame):
        try:
            self.frames.put_nowait(frame)
        except queue.Full:
            pass  # drop under backpressure; fresh frames keep coming

    def submit_event(self, event: ControlEvent):
        self.events.put(event)

    def submit_action(self, action: str):
        self.events.put(action)

    def emergency_now(self) -> dict:
        """Synchronous motor cut; returns proof of the post-cut state."""
        gw = self.pipeline.gateway
        with gw.lock:
            gw.sim.submit("emergency")
            s = gw.sim.state
            proof = {
                "velocity": [s.v_right, s.v_forward, s.v_up],
                "yaw_rate": s.yaw_rate,
                "flying": s.flying,
                "sim_time_ms": s.sim_time_ms,
            }
        self.submit_event(ControlEvent("emergency"))
        return proof

    def _loop(self):
        tick_ms = self.pipeline.cfg.control_tick_ms
        next_tick = 0
        while not self._stop.is_set():
            now = self.clock.now_ms()
            while True:
                try:
                    item = self.events.get_nowait()
                except queue.Empty:
                    break
                if isinstance(item, ControlEvent):
                    self.pipeline.control.handle_event(item, now)
                else:
                    self.pipeline.control.command(item, now)
                self.pipeline.bus.pump()
            while True:
                try:
                    frame = self.frames.get_nowait()
                except queue.Empty:
                    break
                ts = max(now, self._last_frame_ts + 1)
                self._last_frame_ts = ts
                frame = dataclasses.replace(frame, timestamp_ms=ts)
                self.frames_ingested += 1
                self.pipeline.ingest.feed([frame], ts)
                self.pipeline.bus.pump()
            self.pipeline.gateway.advance_to(float(now), now)
            self.pipeline.bus.pump()
            if now >= next_tick:
                self.pipeline.control.tick(now)
                self.pipeline.bus.pump()
                next_tick = now + tick_ms
            time.sleep(0.005)

    def snapshot(self) -> dict:
        s = self.pipeline.gateway.sim.state
        distance = None
        if self.last_distance is not None:
            est = self.last_distance.message
            distance = {
                "continuous_cm": est.continuous_cm,
                "posterior": list(est.posterior),
                "argmax_class_cm": est.argmax_class_cm,
            }
        return {
            "type": "snapshot",
            "t_ms": self.clock.now_ms(),
            "drone": {
                "x": s.x,
                "y": s.y,
                "z": s.z,
                "yaw": s.yaw,
                "velocity": [s.v_right, s.v_forward, s.v_up],
                "battery": s.battery,
                "flying": s.flying,
                "sim_time_ms": s.sim_time_ms,
            },
            "view": self.last_view.value if self.last_view else None,
            "last_gesture": self.last_gesture_info,
            "distance": distance,
            "mode": self.pipeline.control.mode.value,
            "frames_ingested": self.frames_ingested,
            "photos": self.photos,
        }


_MODE_NAMES = {m.value: m for m in ControlMode}


class BridgeServer:
    def __init__(self, runner: LiveRunner, port: int = 8765, host: str = "127.0.0.1"):
        self.runner = runner
        self._clients: set = set()
        self._clients_lock = threading.Lock()
        self._server = ws_serve(self._handler, host, port)
        self.port = self._server.socket.getsockname()[1]
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []

    def start(self):
        for fn in (self._server.serve_forever, self._broadcast_loop):
            t = threading.Thread(target=fn, daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self):
        self._stop.set()
        self._server.shutdown()

    def _handler(self, ws):
        with self._clients_lock:
            self._clients.add(ws)
        try:
            for raw in ws:
                reply = self._handle_message(raw)
                if reply is not None:
                    ws.send(json.dumps(reply))
        except Exception:
            pass
        finally:
            with self._clients_lock:
                self._clients.discard(ws)

    def _handle_message(self, raw: str) -> Optional[dict]:
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError:
            return {"type": "error", "error": "bad json"}
        if isinstance(obj, dict) and "keypoints" in obj:
            try:
                frame = parse_skeleton_frame(raw)
            except (ParseError, SchemaError) as exc:
                return {"type": "error", "error": str(exc)}
            self.runner.submit_frame(frame)
            return None
        kind = obj.get("type") if isinstance(obj, dict) else None
        if kind == "emergency":
            proof = self.runner.emergency_now()
            return {"type": "ack", "action": "emergency", **proof}
        if kind == "mode":
            mode = _MODE_NAMES.get(obj.get("mode", ""))
            if mode is None:
                return {"type": "error", "error": f"unknown mode {obj.get('mode')!r}"}
            self.runner.submit_event(ControlEvent("mode", mode=mode))
            return {"type": "ack", "action": "mode"}
        if kind == "reset":
            self.runner.submit_event(ControlEvent("reset"))
            return {"type": "ack", "action": "reset"}
        if kind in ("takeoff", "land"):
            self.runner.submit_action(kind)
            return {"type": "ack", "action": kind}
        if kind == "key":
            self.runner.submit_event(ControlEvent("key", key=obj.get("key", "")))
            return {"type": "ack", "action": "key"}
        return {"type": "error", "error": "unrecognized message"}

    def _broadcast_loop(self):
        while not self._stop.is_set():
            time.sleep(SNAPSHOT_PERIOD_MS / 1000.0)
            payload = json.dumps(self.runner.snapshot())
            with self._clients_lock:
                clients = list(self._clients)
            for ws in clients:
                try:
                    ws.send(payload)
                except Exception:
                    with self._clients_lock:
                        self._clients.discard(ws)
