import json
import time

import pytest
from websockets.sync.client import connect

from pose2flight.bridge import BridgeServer, LiveRunner
from pose2flight.config import Config
from pose2flight.gestures import Gesture
from pose2flight.pipeline import Pipeline
from pose2flight.poses import gesture_pose, build_frame
from pose2flight.skeleton import serialize_skeleton_frame


@pytest.fixture
def bridge():
    pipe = Pipeline(cfg=Config())
    runner = LiveRunner(pipe)
    runner.start()
    server = BridgeServer(runner, port=0)
    server.start()
    yield server
    server.stop()
    runner.stop()


def recv_until(ws, predicate, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            msg = json.loads(ws.recv(timeout=deadline - time.monotonic()))
        except TimeoutError:
            break
        if predicate(msg):
            return msg
    raise AssertionError("expected message never arrived")


class TestBridge:
    def test_stream_up_preset_produces_gesture(self, bridge):
        with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
            ws.send(json.dumps({"type": "mode", "mode": "gesture_control"}))
            recv_until(ws, lambda m: m.get("type") == "ack")
            frame_line = serialize_skeleton_frame(build_frame(gesture_pose(Gesture.UP), 0))
            for _ in range(8):
                ws.send(frame_line)
                time.sleep(1 / 30)
            snap = recv_until(
                ws,
                lambda m: m.get("type") == "snapshot"
                and m.get("last_gesture")
                and m["last_gesture"]["name"] == "Up",
            )
            # stability window is 3 frames; allow 2 frames of slack
            assert snap["last_gesture"]["frame_index"] <= 5
            assert snap["mode"] == "gesture_control"

    def test_emergency_ack_proves_zero_velocity(self, bridge):
        with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
            ws.send(json.dumps({"type": "takeoff"}))
            recv_until(ws, lambda m: m.get("type") == "ack")
            # wait until the climb gives nonzero vertical speed
            recv_until(
                ws,
                lambda m: m.get("type") == "snapshot" and abs(m["drone"]["velocity"][2]) > 5.0,
            )
            ws.send(json.dumps({"type": "emergency"}))
            ack = recv_until(ws, lambda m: m.get("type") == "ack" and m.get("action") == "emergency")
            assert ack["velocity"] == [0.0, 0.0, 0.0]
            assert ack["flying"] is False
            snap = recv_until(ws, lambda m: m.get("type") == "snapshot")
            assert snap["mode"] == "emergency"

    def test_malformed_frame_reports_error(self, bridge):
        with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
            ws.send(json.dumps({"keypoints": []}))
            msg = recv_until(ws, lambda m: m.get("type") == "error")
            assert "missing" in msg["error"] or "Schema" in msg["error"] or "field" in msg["error"]

    def test_snapshot_carries_view_and_distance_fields(self, bridge):
        with connect(f"ws://127.0.0.1:{bridge.port}") as ws:
            frame_line = serialize_skeleton_frame(build_frame(gesture_pose(Gesture.CHEESE), 0))
            for _ in range(3):
                ws.send(frame_line)
                time.sleep(0.03)
            snap = recv_until(ws, lambda m: m.get("type") == "snapshot" and m.get("view"))
            assert snap["view"] == "Front"
            assert "distance" in snap and "drone" in snap
