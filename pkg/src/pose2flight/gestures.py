"""Arm-gesture recognition from per-arm states plus the view class.

Each arm reduces to an (angle state, position state) tuple: the inner
elbow angle buckets into Perpendicular / Straight / None, the wrist
height relative to the shoulder into Over / Under / Middle (with a
dead-band proportional to the shoulder width to absorb keypoint jitter).
A lookup table maps the two tuples and the view class to one of 11
gestures; a stability filter then requires N consecutive identical
classifications and enforces a cooldown against repeat emissions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from .skeleton import (
    L_SHOULDER,
    R_SHOULDER,
    DegenerateLimb,
    MissingJoint,
    SkeletonFrame,
    arm_joints,
    elbow_angle,
    joint_distance,
)
from .view import ViewClass

# wrist dead-band halfwidth as a fraction of the shoulder width
POSITION_BETA = 0.2


class AngleState(enum.Enum):
    PERPENDICULAR = "Perpendicular"
    STRAIGHT = "Straight"
    NONE = "None"


class PositionState(enum.Enum):
    OVER = "Over"
    UNDER = "Under"
    MIDDLE = "Middle"


@dataclass(frozen=True)
class ArmState:
    angle: AngleState
    position: PositionState


class Gesture(enum.Enum):
    UP = "Up"
    DOWN = "Down"
    LEFT = "Left"
    RIGHT = "Right"
    FORWARD = "Forward"
    BACKWARD = "Backward"
    CW = "Cw"
    CCW = "Ccw"
    CHEESE = "Cheese"
    SIDE_LEFT = "SideLeft"
    SIDE_RIGHT = "SideRight"


@dataclass(frozen=True)
class StabilityConfig:
    n_frames: int = 3
    cooldown_ms: int = 625

    def __post_init__(self):
        if self.n_frames < 1:
            raise ValueError("n_frames must be >= 1")
        if self.cooldown_ms < 0:
            raise ValueError("cooldown_ms must be >= 0")


@dataclass(frozen=True)
class GestureEvent:
    gesture: Gesture
    timestamp_ms: int
    stable_count: int


class ClockSkew(Exception):
    """Timestamps fed to the stability filter went backwards."""


def arm_angle_state(alpha: float) -> AngleState:
    """Bucket an inner elbow angle (degrees, 0-180) into an angle state."""
    if 60.0 < alpha < 120.0:
        return AngleState.PERPENDICULAR
    if 140.0 < alpha <= 180.0:
        return AngleState.STRAIGHT
    return AngleState.NONE


def arm_position_state(frame: SkeletonFrame, side: str, beta: float = POSITION_BETA) -> PositionState:
    """Wrist height relative to the shoulder, with a jitter dead-band.

    Over when the wrist sits more than beta * shoulder-width above the
    shoulder (image y grows downward), Under when equally far below,
    Middle inside the band.
    """
    s_id, _, w_id = arm_joints(side)
    if not (frame.present(s_id) and frame.present(w_id)):
        raise MissingJoint(f"{side} shoulder/wrist missing")
    band = beta * joint_distance(frame, R_SHOULDER, L_SHOULDER)
    shoulder_y = frame.joint(s_id).y
    wrist_y = frame.joint(w_id).y
    if wrist_y < shoulder_y - band:
        return PositionState.OVER
    if wrist_y > shoulder_y + band:
        return PositionState.UNDER
    return PositionState.MIDDLE


def _arm(angle: AngleState, position: PositionState) -> ArmState:
    return ArmState(angle, position)


_P, _S = AngleState.PERPENDICULAR, AngleState.STRAIGHT
_O, _U, _M = PositionState.OVER, PositionState.UNDER, PositionState.MIDDLE

# frontal gestures keyed by ((left angle, left position), (right angle, right position));
# tuples are in the user's anatomical frame
FRONTAL_TABLE: dict[tuple[ArmState, ArmState], Gesture] = {
    (_arm(_P, _O), _arm(_P, _O)): Gesture.UP,
    (_arm(_P, _U), _arm(_P, _U)): Gesture.DOWN,
    (_arm(_S, _M), _arm(_S, _U)): Gesture.LEFT,
    (_arm(_S, _U), _arm(_S, _M)): Gesture.RIGHT,
    (_arm(_S, _O), _arm(_S, _O)): Gesture.FORWARD,
    (_arm(_S, _M), _arm(_S, _M)): Gesture.BACKWARD,
    (_arm(_P, _O), _arm(_P, _U)): Gesture.CW,
    (_arm(_P, _U), _arm(_P, _O)): Gesture.CCW,
    (_arm(_P, _M), _arm(_P, _M)): Gesture.CHEESE,
}

_SIDE_EXTENDED = _arm(_S, _M)


def classify_gesture(left: ArmState, right: ArmState, view: ViewClass) -> Optional[Gesture]:
    """Map per-arm states and the view class to a gesture, or None.

    Requires both angle states to be recognized. Frontal gestures need
    the Front view; side gestures need the Side view with exactly one
    arm extended straight at shoulder height (that arm names the side
    the user turned toward the camera). Back and Ambiguous views admit
    no gestures.
    """
    if left.angle is AngleState.NONE or right.angle is AngleState.NONE:
        return None
    if view is ViewClass.FRONT:
        return FRONTAL_TABLE.get((left, right))
    if view is ViewClass.SIDE:
        left_ext = left == _SIDE_EXTENDED
        right_ext = right == _SIDE_EXTENDED
        if left_ext and not right_ext:
            return Gesture.SIDE_LEFT
        if right_ext and not left_ext:
            return Gesture.SIDE_RIGHT
        return None
    return None


def arm_state_from_frame(frame: SkeletonFrame, side: str, beta: float = POSITION_BETA) -> ArmState:
    """Compute one arm's state tuple; unusable joints yield angle None."""
    try:
        angle = arm_angle_state(elbow_angle(frame, side))
        position = arm_position_state(frame, side, beta)
    except (MissingJoint, DegenerateLimb):
        return ArmState(AngleState.NONE, PositionState.MIDDLE)
    return ArmState(angle, position)


def classify_frame(frame: SkeletonFrame, view: ViewClass, beta: float = POSITION_BETA) -> Optional[Gesture]:
    """Per-frame gesture classification straight from a skeleton."""
    left = arm_state_from_frame(frame, "left", beta)
    right = arm_state_from_frame(frame, "right", beta)
    return classify_gesture(left, right, view)


@dataclass
class StabilityFilter:
    """Temporal gate: emit after N consecutive frames, then hold off.

    A gesture is emitted once it has been observed in ``n_frames``
    consecutive steps. Re-emitting the same gesture additionally waits
    out the cooldown since its previous emission; a different gesture
    may be emitted as soon as its own streak completes. A None input
    resets the streak but not the emission history.
    """

    cfg: StabilityConfig = field(default_factory=StabilityConfig)
    _streak_gesture: Optional[Gesture] = None
    _streak_count: int = 0
    _last_emitted: Optional[Gesture] = None
    _last_emit_ms: int = 0
    _last_ts: Optional[int] = None

    def step(self, gesture: Optional[Gesture], timestamp_ms: int) -> Optional[GestureEvent]:
        if self._last_ts is not None and timestamp_ms < self._last_ts:
            raise ClockSkew(f"timestamp went back: {self._last_ts} -> {timestamp_ms}")
        self._last_ts = timestamp_ms

        if gesture is None:
            self._streak_gesture = None
            self._streak_count = 0
            return None

        if gesture is self._streak_gesture:
            self._streak_count += 1
        else:
            self._streak_gesture = gesture
            self._streak_count = 1

        if self._streak_count < self.cfg.n_frames:
            return None
        if gesture is self._last_emitted and timestamp_ms - self._last_emit_ms < self.cfg.cooldown_ms:
            return None
        self._last_emitted = gesture
        self._last_emit_ms = timestamp_ms
        return GestureEvent(gesture, timestamp_ms, self._streak_count)

    def reset(self):
        self._streak_gesture = None
        self._streak_count = 0
        self._last_emitted = None
        self._last_emit_ms = 0
        self._last_ts = None
