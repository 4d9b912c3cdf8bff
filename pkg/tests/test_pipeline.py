import json

import pytest

from pose2flight.config import Config
from pose2flight.control import ControlEvent, ControlMode
from pose2flight.distance import DistanceModel
from pose2flight.gestures import Gesture
from pose2flight.head import FixedIdMatcher
from pose2flight.pipeline import (
    Pipeline,
    Recorder,
    TOPIC_CMD,
    TOPIC_DISTANCE,
    TOPIC_GESTURE,
    TOPIC_SKELETON,
    read_stream,
    to_jsonable,
    write_stream,
)
from pose2flight.poses import build_frame, gesture_pose, neutral_pose, pose_stream
from pose2flight.skeleton import ParseError


def seeded_model(hidden=(16, 16), seed=0):
    model = DistanceModel(hidden_sizes=hidden)
    model.init_weights(seed)
    return model


def gesture_mode_events():
    return [(0, ControlEvent("mode", mode=ControlMode.GESTURE_CONTROL))]


def up_then_neutral(start_ts=0, n_up=15, n_neutral=40, interval=33):
    frames = pose_stream(Gesture.UP, n_up, start_ts, interval)
    t0 = start_ts + n_up * interval
    frames += pose_stream(None, n_neutral, t0, interval)
    return [(f.timestamp_ms, [f]) for f in frames]


class TestClosedLoopGesture:
    def test_up_preset_raises_altitude_by_50(self):
        pipe = Pipeline(cfg=Config())
        groups = up_then_neutral(start_ts=3000)
        pipe.run_virtual(
            groups,
            extra_ms=4000,
            events=gesture_mode_events(),
            actions=[(0, "takeoff")],
        )
        base = 80.0  # takeoff altitude
        assert pipe.gateway.sim.state.z == pytest.approx(base + 50.0, abs=2.0)

    def test_gesture_event_emitted_at_third_frame(self):
        pipe = Pipeline(cfg=Config())
        events = []
        pipe.bus.subscribe(TOPIC_GESTURE, lambda env: events.append(env.message))
        pipe.run_virtual(up_then_neutral(), events=gesture_mode_events())
        assert events
        assert events[0].gesture is Gesture.UP
        assert events[0].timestamp_ms == 66  # third frame at 33 ms cadence

    def test_no_maneuver_outside_gesture_mode(self):
        pipe = Pipeline(cfg=Config())
        cmds = []
        pipe.bus.subscribe(TOPIC_CMD, lambda env: cmds.append(env.message))
        pipe.run_virtual(up_then_neutral())  # stays in keyboard mode
        assert "up 50" not in cmds

    def test_emergency_blocks_everything(self):
        pipe = Pipeline(cfg=Config())
        groups = up_then_neutral(start_ts=1000)
        pipe.run_virtual(
            groups,
            events=gesture_mode_events() + [(500, ControlEvent("emergency"))],
            actions=[(0, "takeoff")],
        )
        s = pipe.gateway.sim.state
        assert not s.flying
        assert (s.v_right, s.v_forward, s.v_up) == (0.0, 0.0, 0.0)
        assert pipe.control.mode is ControlMode.EMERGENCY


class TestMultiPerson:
    def test_only_selected_person_feeds_pipeline(self):
        up = gesture_pose(Gesture.UP)
        neutral = {k: (x + 150.0, y) for k, (x, y) in neutral_pose().items()}
        groups = []
        for i in range(10):
            ts = i * 33
            groups.append(
                (ts, [build_frame(up, ts), build_frame(neutral, ts)])
            )
        # person 0 (up pose) wins with the first-match policy
        pipe = Pipeline(cfg=Config())
        events = []
        pipe.bus.subscribe(TOPIC_GESTURE, lambda env: events.append(env.message))
        pipe.run_virtual(groups, events=gesture_mode_events())
        assert events and events[0].gesture is Gesture.UP

    def test_fixed_matcher_picks_other_person(self):
        up = gesture_pose(Gesture.UP)
        neutral = {k: (x + 150.0, y) for k, (x, y) in neutral_pose().items()}
        groups = []
        for i in range(10):
            ts = i * 33
            groups.append((ts, [build_frame(up, ts), build_frame(neutral, ts)]))
        pipe = Pipeline(cfg=Config(), matcher=FixedIdMatcher(1))
        events = []
        pipe.bus.subscribe(TOPIC_GESTURE, lambda env: events.append(env.message))
        pipe.run_virtual(groups, events=gesture_mode_events())
        assert events == []  # the tracked person never gestures


class TestRecorder:
    def test_records_gesture_events(self, tmp_path):
        path = str(tmp_path / "log.jsonl")
        pipe = Pipeline(cfg=Config())
        rec = Recorder(path, [TOPIC_GESTURE, TOPIC_CMD])
        rec.attach(pipe.bus)
        pipe.run_virtual(up_then_neutral(), events=gesture_mode_events())
        rec.close()
        lines = open(path).read().splitlines()
        header = json.loads(lines[0])
        assert header["log_version"] == 1
        entries = [json.loads(l) for l in lines[1:]]
        gestures = [e for e in entries if e["topic"] == TOPIC_GESTURE]
        assert gestures and gestures[0]["message"]["name"] == "Up"

    def test_empty_session_has_header_only(self, tmp_path):
        path = str(tmp_path / "empty.jsonl")
        pipe = Pipeline(cfg=Config())
        rec = Recorder(path, [TOPIC_GESTURE])
        rec.attach(pipe.bus)
        rec.close()
        lines = open(path).read().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["topics"] == [TOPIC_GESTURE]

    def test_determinism_bit_identical_logs(self, tmp_path):
        def run(path):
            pipe = Pipeline(cfg=Config(), model=seeded_model())
            rec = Recorder(path, [TOPIC_GESTURE, TOPIC_CMD, TOPIC_DISTANCE])
            rec.attach(pipe.bus)
            pipe.run_virtual(
                up_then_neutral(start_ts=3000),
                extra_ms=2000,
                events=gesture_mode_events(),
                actions=[(0, "takeoff")],
            )
            rec.close()
            return open(path, "rb").read()

        a = run(str(tmp_path / "a.jsonl"))
        b = run(str(tmp_path / "b.jsonl"))
        assert a == b and len(a) > 100

    def test_record_skeleton_then_replay_matches(self, tmp_path):
        stream_path = str(tmp_path / "stream.jsonl")
        frames = [g[1][0] for g in up_then_neutral()]
        write_stream(stream_path, frames)

        def gestures_from(groups):
            pipe = Pipeline(cfg=Config())
            events = []
            pipe.bus.subscribe(TOPIC_GESTURE, lambda env: events.append(to_jsonable(env.message)))
            pipe.run_virtual(groups, events=gesture_mode_events())
            return events

        first = gestures_from(read_stream(stream_path))

        # record /skeleton, rebuild a stream from the log, replay it
        rec_path = str(tmp_path / "skeleton.jsonl")
        pipe = Pipeline(cfg=Config())
        rec = Recorder(rec_path, [TOPIC_SKELETON])
        rec.attach(pipe.bus)
        pipe.run_virtual(read_stream(stream_path), events=gesture_mode_events())
        rec.close()

        replay_path = str(tmp_path / "replayed.jsonl")
        with open(rec_path) as fh, open(replay_path, "w") as out:
            for line in fh.read().splitlines()[1:]:
                entry = json.loads(line)
                out.write(json.dumps(entry["message"]) + "\n")
        second = gestures_from(read_stream(replay_path))
        assert first == second and first


class TestStreamIO:
    def test_roundtrip(self, tmp_path):
        path = str(tmp_path / "s.jsonl")
        frames = pose_stream(Gesture.CHEESE, 5)
        write_stream(path, frames)
        groups = read_stream(path)
        assert len(groups) == 5
        assert groups[0][1][0].joints == frames[0].joints

    def test_parse_error_carries_line(self, tmp_path):
        path = str(tmp_path / "bad.jsonl")
        frames = pose_stream(Gesture.UP, 3)
        with open(path, "w") as fh:
            from pose2flight.skeleton import serialize_skeleton_frame

            fh.write(serialize_skeleton_frame(frames[0]) + "\n")
            fh.write("this is not json\n")
        with pytest.raises(ParseError, match="line 2"):
            read_stream(path)

    def test_monotone_enforced(self, tmp_path):
        path = str(tmp_path / "rev.jsonl")
        frames = pose_stream(Gesture.UP, 3)
        write_stream(path, reversed(frames))
        with pytest.raises(ParseError, match="monotone"):
            read_stream(path)


class TestKeyboardMap:
    def test_action_and_arrow_keys(self):
        pipe = Pipeline(cfg=Config())
        cmds = []
        pipe.bus.subscribe(TOPIC_CMD, lambda env: cmds.append(env.message))
        for key, t in (("t", 0), ("right", 10), ("up", 20), ("l", 30)):
            pipe.control.handle_event(ControlEvent("key", key=key), t)
            pipe.bus.pump()
        assert cmds == ["takeoff", "rc 30 0 0 0", "rc 0 30 0 0", "land"]

    def test_arrows_only_in_keyboard_mode(self):
        pipe = Pipeline(cfg=Config())
        cmds = []
        pipe.bus.subscribe(TOPIC_CMD, lambda env: cmds.append(env.message))
        pipe.control.handle_event(ControlEvent("mode", mode=ControlMode.GESTURE_CONTROL), 0)
        pipe.bus.pump()
        cmds.clear()
        pipe.control.handle_event(ControlEvent("key", key="right"), 10)
        pipe.bus.pump()
        assert cmds == []


class TestFaceTrackingLoop:
    def test_face_offset_drives_yaw(self):
        """A face parked right of center must yield clockwise rc yaw."""
        pipe = Pipeline(cfg=Config(), model=seeded_model())
        pose = {k: (x + 120.0, y) for k, (x, y) in gesture_pose(Gesture.BACKWARD).items()}
        frames = [build_frame(pose, i * 33) for i in range(30)]
        cmds = []
        pipe.bus.subscribe(TOPIC_CMD, lambda env: cmds.append(env.message))
        pipe.run_virtual(
            [(f.timestamp_ms, [f]) for f in frames],
            events=[(0, ControlEvent("mode", mode=ControlMode.FACE_TRACKING))],
            actions=[(0, "takeoff")],
        )
        rc = [c for c in cmds if c.startswith("rc") and c != "rc 0 0 0 0"]
        assert rc, "face tracking should emit rc commands"
        yaw_values = [int(c.split()[4]) for c in rc]
        assert max(yaw_values) > 0
