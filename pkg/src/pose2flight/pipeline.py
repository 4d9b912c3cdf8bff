"""Node graph wiring the classifiers to the flight controller and plant.

The stream source hands frame groups (one or more people sharing a
timestamp) to the ingest stage, which gates everything downstream to the
single tracked user and publishes /skeleton and /face_bbox. The view,
gesture and distance nodes hang off those topics; the control node turns
gesture events and face geometry into wire commands on /cmd, which the
drone gateway feeds to the simulator.

A run is driven by one clock, either virtual (manual, deterministic) or
wall. Control ticks, simulator advancement and frame arrivals interleave
on the same timeline in both modes.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Optional

from .bus import Bus, Envelope, Topic
from .config import Config
from .control import (
    ACTION_KEYS,
    ARROW_KEYS,
    ControlEvent,
    ControlMode,
    FaceTracker,
    FaceTrackingGains,
    Maneuver,
    PIDGains,
    gesture_to_maneuver,
    mode_arbiter,
)
from .distance import DistanceEstimate, DistanceModel, build_features
from .gestures import Gesture, GestureEvent, StabilityConfig, StabilityFilter, classify_frame
from .head import (
    AlwaysFirstMatcher,
    BBox,
    FaceBBoxMsg,
    IdentityMatcher,
    InsufficientJoints,
    TrackState,
    head_bbox,
    select_user,
)
from .sim import DroneSim, DroneState
from .skeleton import MissingJoint, ParseError, SkeletonFrame, parse_skeleton_frame, serialize_skeleton_frame
from .view import ViewClass, ViewConfig, classify_view

TOPIC_SKELETON = "/skeleton"
TOPIC_VIEW = "/view"
TOPIC_GESTURE = "/gesture"
TOPIC_FACE = "/face_bbox"
TOPIC_DISTANCE = "/distance"
TOPIC_CMD = "/cmd"
TOPIC_DRONE = "/drone_state"

SIM_TICK_MS = 20.0
DRONE_STATE_PERIOD_MS = 100


class VirtualClock:
    def __init__(self, start_ms: int = 0):
        self._now = start_ms

    def now_ms(self) -> int:
        return self._now

    def advance_to(self, t_ms: int):
        if t_ms < self._now:
            raise ValueError("virtual clock cannot go backwards")
        self._now = t_ms


class WallClock:
    def __init__(self):
        self._t0 = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._t0) * 1000)


def to_jsonable(message) -> object:
    """Message payloads in their recorded/serialized form."""
    if isinstance(message, SkeletonFrame):
        return json.loads(serialize_skeleton_frame(message))
    if isinstance(message, ViewClass):
        return message.value
    if isinstance(message, GestureEvent):
        return {
            "name": message.gesture.value,
            "timestamp_ms": message.timestamp_ms,
            "stable_count": message.stable_count,
        }
    if isinstance(message, FaceBBoxMsg):
        return {
            "person_id": message.person_id,
            "bbox": [message.bbox.x_min, message.bbox.y_min, message.bbox.x_max, message.bbox.y_max],
            "center_x": message.center_x,
            "center_y": message.center_y,
            "w": message.w,
            "h": message.h,
        }
    if isinstance(message, DistanceEstimate):
        return {
            "continuous_cm": message.continuous_cm,
            "posterior": list(message.posterior),
            "argmax_class_cm": message.argmax_class_cm,
        }
    if isinstance(message, DroneState):
        return asdict(message)
    if isinstance(message, str):
        return message
    raise TypeError(f"no serializer for {type(message).__name__}")


class Recorder:
    """Newline-delimited {topic, timestamp_ms, message} session log."""

    def __init__(self, path: str, topics: list[str]):
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write(json.dumps({"log_version": 1, "topics": topics}) + "\n")
        self.topics = topics

    def attach(self, bus: Bus):
        for name in self.topics:
            bus.subscribe(name, self._on_message)

    def _on_message(self, env: Envelope):
        self._fh.write(
            json.dumps(
                {"topic": env.topic, "timestamp_ms": env.timestamp_ms, "message": to_jsonable(env.message)},
                separators=(",", ":"),
            )
            + "\n"
        )

    def close(self):
        self._fh.flush()
        self._fh.close()


class IngestStage:
    """Head-tracks a frame group and forwards only the selected user."""

    def __init__(self, bus: Bus, matcher: IdentityMatcher):
        self.bus = bus
        self.matcher = matcher
        self.track = TrackState()

    def feed(self, group: list[SkeletonFrame], timestamp_ms: int):
        boxes: list[tuple[int, BBox]] = []
        frames: dict[int, SkeletonFrame] = {}
        for pid, frame in enumerate(group):
            frames[pid] = frame
            try:
                boxes.append((pid, head_bbox(frame)))
            except InsufficientJoints:
                continue
        pid = select_user(boxes, self.matcher, self.track, timestamp_ms)
        if pid is None:
            return
        box = dict(boxes)[pid]
        self.bus.publish(TOPIC_FACE, FaceBBoxMsg.from_bbox(pid, box), timestamp_ms)
        self.bus.publish(TOPIC_SKELETON, frames[pid], timestamp_ms)


class ViewNode:
    def __init__(self, bus: Bus, cfg: ViewConfig):
        self.bus = bus
        self.cfg = cfg
        bus.subscribe(TOPIC_SKELETON, self._on_frame)

    def _on_frame(self, env: Envelope):
        view = classify_view(env.message, self.cfg)
        self.bus.publish(TOPIC_VIEW, view, env.timestamp_ms)


class GestureNode:
    """Pairs each frame with its view result, then runs the stability
    filter exactly once per frame."""

    def __init__(self, bus: Bus, stability: StabilityConfig, beta: float):
        self.bus = bus
        self.filter = StabilityFilter(stability)
        self.beta = beta
        self._frame: Optional[Envelope] = None
        self._view: Optional[Envelope] = None
        self._done_ts: Optional[int] = None
        bus.subscribe(TOPIC_SKELETON, self._on_frame)
        bus.subscribe(TOPIC_VIEW, self._on_view)

    def _on_frame(self, env: Envelope):
        self._frame = env
        self._maybe_step()

    def _on_view(self, env: Envelope):
        self._view = env
        self._maybe_step()

    def _maybe_step(self):
        if self._frame is None or self._view is None:
            return
        ts = self._frame.timestamp_ms
        if self._view.timestamp_ms != ts or ts == self._done_ts:
            return
        self._done_ts = ts
        gesture = classify_frame(self._frame.message, self._view.message, self.beta)
        event = self.filter.step(gesture, ts)
        if event is not None:
            self.bus.publish(TOPIC_GESTURE, event, ts)


class DistanceNode:
    """Pairs frame, head box and view by timestamp into /distance."""

    def __init__(self, bus: Bus, model: Optional[DistanceModel]):
        self.bus = bus
        self.model = model
        self._frame: Optional[Envelope] = None
        self._bbox: Optional[Envelope] = None
        self._view: Optional[Envelope] = None
        self._done_ts: Optional[int] = None
        bus.subscribe(TOPIC_SKELETON, self._on_frame)
        bus.subscribe(TOPIC_FACE, self._on_bbox)
        bus.subscribe(TOPIC_VIEW, self._on_view)

    def _on_frame(self, env: Envelope):
        self._frame = env
        self._maybe_emit()

    def _on_bbox(self, env: Envelope):
        self._bbox = env
        self._maybe_emit()

    def _on_view(self, env: Envelope):
        self._view = env
        self._maybe_emit()

    def _maybe_emit(self):
        if self.model is None:
            return
        if self._frame is None or self._bbox is None or self._view is None:
            return
        ts = self._frame.timestamp_ms
        if self._bbox.timestamp_ms != ts or self._view.timestamp_ms != ts or ts == self._done_ts:
            return
        self._done_ts = ts
        try:
            feats = build_features(self._bbox.message.bbox, self._frame.message, self._view.message)
        except MissingJoint:
            return
        self.bus.publish(TOPIC_DISTANCE, self.model.estimate(feats), ts)


class ControlNode:
    """Mode arbitration plus the 20 Hz control loop."""

    def __init__(self, bus: Bus, cfg: Config):
        self.bus = bus
        self.cfg = cfg
        self.mode = ControlMode.KEYBOARD
        self.tracker = FaceTracker(
            FaceTrackingGains(
                yaw=PIDGains(cfg.pid_yaw_kp, cfg.pid_yaw_ki, cfg.pid_yaw_kd),
                vertical=PIDGains(cfg.pid_vertical_kp, cfg.pid_vertical_ki, cfg.pid_vertical_kd),
                longitudinal=PIDGains(
                    cfg.pid_longitudinal_kp, cfg.pid_longitudinal_ki, cfg.pid_longitudinal_kd
                ),
            ),
            target_distance_cm=cfg.pid_target_distance_cm,
        )
        self._face: Optional[Envelope] = None
        self._distance: Optional[Envelope] = None
        self._drone: Optional[DroneState] = None
        self._frame_dims = (640, 480)
        self.snapshots = 0
        self.last_gesture: Optional[GestureEvent] = None
        self.on_photo: Optional[Callable[[], None]] = None
        bus.subscribe(TOPIC_GESTURE, self._on_gesture)
        bus.subscribe(TOPIC_FACE, self._on_face)
        bus.subscribe(TOPIC_DISTANCE, self._on_distance)
        bus.subscribe(TOPIC_DRONE, self._on_drone)
        bus.subscribe(TOPIC_SKELETON, self._on_frame)

    def _on_frame(self, env: Envelope):
        self._frame_dims = (env.message.image_width, env.message.image_height)

    def _on_face(self, env: Envelope):
        self._face = env

    def _on_distance(self, env: Envelope):
        self._distance = env

    def _on_drone(self, env: Envelope):
        self._drone = env.message

    def _on_gesture(self, env: Envelope):
        self.last_gesture = env.message
        if self.mode is not ControlMode.GESTURE_CONTROL:
            return
        distance = self.cfg.pid_target_distance_cm
        if self._distance is not None:
            distance = self._distance.message.continuous_cm
        maneuver = gesture_to_maneuver(env.message, self._drone or DroneState(), distance)
        self._execute(maneuver, env.timestamp_ms)

    def _execute(self, maneuver: Maneuver, timestamp_ms: int):
        if maneuver.snapshot:
            self.snapshots += 1
            if self.on_photo is not None:
                self.on_photo()
        for cmd in maneuver.commands:
            self.bus.publish(TOPIC_CMD, cmd, timestamp_ms)

    def handle_event(self, event: ControlEvent, timestamp_ms: int):
        new_mode = mode_arbiter(self.mode, event)
        if new_mode is not self.mode:
            self.tracker.reset()
            if new_mode is ControlMode.EMERGENCY:
                self.bus.publish(TOPIC_CMD, "emergency", timestamp_ms)
            else:
                self.bus.publish(TOPIC_CMD, "rc 0 0 0 0", timestamp_ms)
            self.mode = new_mode
            return
        self.mode = new_mode
        if event.kind != "key" or self.mode is ControlMode.EMERGENCY:
            return
        if event.key in ACTION_KEYS:
            self.command(ACTION_KEYS[event.key], timestamp_ms)
        elif event.key in ARROW_KEYS and self.mode is ControlMode.KEYBOARD:
            self.bus.publish(TOPIC_CMD, ARROW_KEYS[event.key].to_rc(), timestamp_ms)

    def command(self, action: str, timestamp_ms: int):
        """Direct console actions outside mode arbitration."""
        if self.mode is ControlMode.EMERGENCY:
            return
        if action == "takeoff":
            self.bus.publish(TOPIC_CMD, "takeoff", timestamp_ms)
        elif action == "land":
            self.bus.publish(TOPIC_CMD, "land", timestamp_ms)

    def tick(self, now_ms: int):
        if self.mode is not ControlMode.FACE_TRACKING:
            return
        if self._face is None or self._distance is None:
            return
        cmd = self.tracker.update(
            (self._face.message.center_x, self._face.message.center_y),
            self._face.timestamp_ms,
            self._frame_dims,
            self._distance.message.continuous_cm,
            self._distance.timestamp_ms,
            now_ms,
        )
        self.bus.publish(TOPIC_CMD, cmd.to_rc(), now_ms)


class DroneGateway:
    """Feeds /cmd into the simulator, serializing motion commands."""

    def __init__(self, bus: Bus, sim: DroneSim, lock: Optional[threading.Lock] = None):
        self.bus = bus
        self.sim = sim
        self.lock = lock or threading.Lock()
        self._queue: list[str] = []
        self._pending_cmd: Optional[str] = None
        self._last_advance_ms = 0.0
        self._last_state_pub = -10**9
        self.replies: list[tuple[str, str]] = []  # (command, reply) log
        with self.lock:
            self.sim.submit("command")  # open the SDK session
        bus.subscribe(TOPIC_CMD, self._on_cmd)

    def _on_cmd(self, env: Envelope):
        if env.message.strip() == "emergency":
            with self.lock:
                self._queue.clear()
                reply = self.sim.submit("emergency")
            self.replies.append(("emergency", reply or ""))
            return
        self._queue.append(env.message)
        self._drain()

    def _drain(self):
        while self._queue:
            with self.lock:
                if self.sim.busy:
                    return
                cmd = self._queue.pop(0)
                reply = self.sim.submit(cmd)
            if reply is not None:
                self.replies.append((cmd, reply))
            else:
                # deferred: keep the head of the queue blocked until tick()
                self._pending_cmd = cmd
                return

    def advance_to(self, t_ms: float, timestamp_ms: int):
        """Advance simulated time in protocol-legal chunks."""
        while self._last_advance_ms < t_ms - 1e-9:
            dt = min(100.0, t_ms - self._last_advance_ms)
            with self.lock:
                done = self.sim.tick(dt)
            self._last_advance_ms += dt
            for reply in done:
                self.replies.append((self._pending_cmd or "", reply))
                self._pending_cmd = None
            if done:
                self._drain()
        if timestamp_ms - self._last_state_pub >= DRONE_STATE_PERIOD_MS:
            self._last_state_pub = timestamp_ms
            with self.lock:
                snapshot = DroneState(**asdict(self.sim.state))
            self.bus.publish(TOPIC_DRONE, snapshot, timestamp_ms)

    @property
    def idle(self) -> bool:
        with self.lock:
            return not self.sim.busy and not self._queue


def build_bus(queue_cap: int) -> Bus:
    # registration order is the pump's drain order: boxes before the
    # view-triggered nodes so same-timestamp joins resolve in one pass
    bus = Bus(queue_cap)
    bus.register(Topic(TOPIC_SKELETON, SkeletonFrame))
    bus.register(Topic(TOPIC_FACE, FaceBBoxMsg))
    bus.register(Topic(TOPIC_VIEW, ViewClass))
    bus.register(Topic(TOPIC_GESTURE, GestureEvent))
    bus.register(Topic(TOPIC_DISTANCE, DistanceEstimate))
    bus.register(Topic(TOPIC_CMD, str))
    bus.register(Topic(TOPIC_DRONE, DroneState))
    return bus


@dataclass
class Pipeline:
    """Assembled node graph around one bus, one sim, one clock."""

    cfg: Config = field(default_factory=Config)
    model: Optional[DistanceModel] = None
    matcher: Optional[IdentityMatcher] = None
    sim: Optional[DroneSim] = None

    def __post_init__(self):
        self.bus = build_bus(self.cfg.bus_queue_cap)
        self.sim = self.sim or DroneSim()
        self.ingest = IngestStage(self.bus, self.matcher or AlwaysFirstMatcher())
        self.view_node = ViewNode(self.bus, ViewConfig(self.cfg.view_gamma))
        self.gesture_node = GestureNode(
            self.bus,
            StabilityConfig(self.cfg.gestures_n_frames, self.cfg.gestures_cooldown_ms),
            self.cfg.gestures_beta,
        )
        self.distance_node = DistanceNode(self.bus, self.model)
        self.control = ControlNode(self.bus, self.cfg)
        self.gateway = DroneGateway(self.bus, self.sim)

    def run_virtual(
        self,
        groups: Iterable[tuple[int, list[SkeletonFrame]]],
        extra_ms: int = 0,
        events: Optional[list[tuple[int, ControlEvent]]] = None,
        actions: Optional[list[tuple[int, str]]] = None,
    ):
        """Deterministic replay: frame groups plus scheduled control
        events, interleaved with control ticks on the virtual timeline."""
        events = sorted(events or [], key=lambda e: e[0])
        actions = sorted(actions or [], key=lambda a: a[0])
        tick_ms = self.cfg.control_tick_ms
        groups = list(groups)
        end_ms = (groups[-1][0] if groups else 0) + extra_ms
        next_tick = 0
        gi = 0
        while next_tick <= end_ms or gi < len(groups):
            frame_t = groups[gi][0] if gi < len(groups) else None
            if frame_t is not None and frame_t <= next_tick:
                t = frame_t
            else:
                t = next_tick
            while events and events[0][0] <= t:
                _, ev = events.pop(0)
                self.control.handle_event(ev, t)
                self.bus.pump()
            while actions and actions[0][0] <= t:
                _, act = actions.pop(0)
                self.control.command(act, t)
                self.bus.pump()
            self.gateway.advance_to(float(t), t)
            self.bus.pump()
            if frame_t is not None and t == frame_t:
                self.ingest.feed(groups[gi][1], frame_t)
                self.bus.pump()
                gi += 1
            if t == next_tick:
                self.control.tick(t)
                self.bus.pump()
                next_tick += tick_ms

    def settle(self, from_ms: int, duration_ms: int):
        """Run control/sim ticks with no new frames (virtual clock)."""
        t = from_ms
        end = from_ms + duration_ms
        tick = self.cfg.control_tick_ms
        while t <= end:
            self.gateway.advance_to(float(t), t)
            self.bus.pump()
            self.control.tick(t)
            self.bus.pump()
            t += tick


def read_stream(path: str) -> list[tuple[int, list[SkeletonFrame]]]:
    """Load a skeleton log, grouping consecutive equal timestamps into
    multi-person frame groups."""
    groups: list[tuple[int, list[SkeletonFrame]]] = []
    with open(path, "rb") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                frame = parse_skeleton_frame(line)
            except ParseError as exc:
                raise ParseError(f"line {lineno}: {exc}", offset=exc.offset) from exc
            if groups and groups[-1][0] == frame.timestamp_ms:
                groups[-1][1].append(frame)
            else:
                if groups and frame.timestamp_ms < groups[-1][0]:
                    raise ParseError(f"line {lineno}: timestamps not monotone")
                groups.append((frame.timestamp_ms, [frame]))
    return groups


def write_stream(path: str, frames: Iterable[SkeletonFrame]):
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(serialize_skeleton_frame(frame) + "\n")
