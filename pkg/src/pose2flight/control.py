"""PID loops, gesture maneuvers and control-mode arbitration.

Sign conventions (fixed here because the drone camera defines the image
frame): positive yaw_rate is clockwise from above, so a face appearing
right of the image center yields a positive yaw command; positive
vertical is up; positive longitudinal approaches the user. Velocity
channels are always clamped to the protocol range [-100, 100].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .gestures import ClockSkew, Gesture, GestureEvent
from .sim import DroneState

INTEGRAL_MAX = 100.0  # anti-windup clamp, error*seconds
CHANNEL_LIMIT = 100.0
GESTURE_STEP_CM = 50.0
GESTURE_TURN_DEG = 90.0
STALE_INPUT_MS = 500
MAX_ARC_CHORDS = 8
MIN_MOVE_CM = 20.0


@dataclass(frozen=True)
class PIDGains:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0

    def __post_init__(self):
        for g in (self.kp, self.ki, self.kd):
            if not math.isfinite(g) or g < 0.0:
                raise ValueError("gains must be finite and non-negative")


@dataclass
class PIDState:
    integral: float = 0.0
    prev_error: float = 0.0
    prev_ts_ms: Optional[int] = None

    def reset(self):
        self.integral = 0.0
        self.prev_error = 0.0
        self.prev_ts_ms = None


def pid_step(gains: PIDGains, state: PIDState, setpoint: float, measured: float, timestamp_ms: int) -> float:
    """One controller update: u = kp*e + ki*integral + kd*de/dt.

    The integral accumulates trapezoidally and is clamped against
    windup. The first step after a reset has no time base yet, so it
    contributes neither integral growth nor a derivative term.
    """
    error = setpoint - measured
    if state.prev_ts_ms is None:
        u = gains.kp * error + gains.ki * state.integral
    else:
        if timestamp_ms <= state.prev_ts_ms:
            raise ClockSkew(f"pid timestamp went back: {state.prev_ts_ms} -> {timestamp_ms}")
        dt_s = (timestamp_ms - state.prev_ts_ms) / 1000.0
        state.integral += (error + state.prev_error) / 2.0 * dt_s
        state.integral = max(-INTEGRAL_MAX, min(INTEGRAL_MAX, state.integral))
        derivative = (error - state.prev_error) / dt_s
        u = gains.kp * error + gains.ki * state.integral + gains.kd * derivative
    state.prev_error = error
    state.prev_ts_ms = timestamp_ms
    return u


def _clamp(v: float) -> float:
    return max(-CHANNEL_LIMIT, min(CHANNEL_LIMIT, v))


@dataclass(frozen=True)
class VelocityCommand:
    lateral: float = 0.0  # cm/s, +right
    vertical: float = 0.0  # cm/s, +up
    longitudinal: float = 0.0  # cm/s, +forward
    yaw_rate: float = 0.0  # deg/s, +clockwise

    def __post_init__(self):
        for name in ("lateral", "vertical", "longitudinal", "yaw_rate"):
            object.__setattr__(self, name, _clamp(getattr(self, name)))

    def to_rc(self) -> str:
        return (
            f"rc {int(round(self.lateral))} {int(round(self.longitudinal))} "
            f"{int(round(self.vertical))} {int(round(self.yaw_rate))}"
        )


HOVER = VelocityCommand()


class ControlMode(enum.Enum):
    KEYBOARD = "keyboard"
    FACE_TRACKING = "face_tracking"
    GESTURE_CONTROL = "gesture_control"
    EMERGENCY = "emergency"


@dataclass(frozen=True)
class ControlEvent:
    """Arbiter input: a keyboard key, an explicit mode switch, the
    emergency signal, or the post-emergency reset."""

    kind: str  # key | mode | emergency | reset
    key: str = ""
    mode: Optional[ControlMode] = None


MODE_KEYS = {
    "1": ControlMode.KEYBOARD,
    "2": ControlMode.FACE_TRACKING,
    "3": ControlMode.GESTURE_CONTROL,
}
EMERGENCY_KEY = " "
RESET_KEY = "r"
ACTION_KEYS = {"t": "takeoff", "l": "land"}
# arrow keys nudge the drone manually in keyboard mode
ARROW_SPEED = 30.0
ARROW_KEYS = {
    "up": VelocityCommand(longitudinal=ARROW_SPEED),
    "down": VelocityCommand(longitudinal=-ARROW_SPEED),
    "left": VelocityCommand(lateral=-ARROW_SPEED),
    "right": VelocityCommand(lateral=ARROW_SPEED),
}


def mode_arbiter(current: ControlMode, event: ControlEvent) -> ControlMode:
    """Next control mode. Emergency preempts everything and absorbs all
    inputs until an explicit reset (which drops back to keyboard)."""
    if event.kind == "emergency" or (event.kind == "key" and event.key == EMERGENCY_KEY):
        return ControlMode.EMERGENCY
    if event.kind == "reset" or (event.kind == "key" and event.key == RESET_KEY):
        return ControlMode.KEYBOARD if current is ControlMode.EMERGENCY else current
    if current is ControlMode.EMERGENCY:
        return ControlMode.EMERGENCY
    if event.kind == "mode" and event.mode is not None:
        return event.mode
    if event.kind == "key" and event.key in MODE_KEYS:
        return MODE_KEYS[event.key]
    return current


@dataclass(frozen=True)
class FaceTrackingGains:
    yaw: PIDGains = PIDGains(kp=0.30, ki=0.01, kd=0.08)
    vertical: PIDGains = PIDGains(kp=0.35, ki=0.01, kd=0.10)
    longitudinal: PIDGains = PIDGains(kp=1.0, ki=0.05, kd=0.30)


class FaceTracker:
    """Keeps the face centered and the user at the target distance.

    Owns one PID state per axis; the states reset on mode changes and on
    stale inputs (anything older than 500 ms hovers instead of acting on
    outdated measurements).
    """

    def __init__(self, gains: FaceTrackingGains = FaceTrackingGains(), target_distance_cm: float = 150.0):
        self.gains = gains
        self.target_distance_cm = target_distance_cm
        self._yaw = PIDState()
        self._vertical = PIDState()
        self._longitudinal = PIDState()

    def reset(self):
        self._yaw.reset()
        self._vertical.reset()
        self._longitudinal.reset()

    def update(
        self,
        face_center: tuple[float, float],
        face_ts_ms: int,
        frame_dims: tuple[int, int],
        distance_cm: float,
        distance_ts_ms: int,
        now_ms: int,
    ) -> VelocityCommand:
        if now_ms - face_ts_ms >= STALE_INPUT_MS or now_ms - distance_ts_ms >= STALE_INPUT_MS:
            self.reset()
            return HOVER
        center_x = frame_dims[0] / 2.0
        center_y = frame_dims[1] / 2.0
        # face right of center -> positive error -> clockwise yaw
        yaw = pid_step(self.gains.yaw, self._yaw, face_center[0], center_x, now_ms)
        # face below center (larger y) -> negative -> descend
        vertical = pid_step(self.gains.vertical, self._vertical, center_y, face_center[1], now_ms)
        # too far (distance above target) -> positive -> approach
        longitudinal = pid_step(
            self.gains.longitudinal, self._longitudinal, distance_cm, self.target_distance_cm, now_ms
        )
        return VelocityCommand(lateral=0.0, vertical=vertical, longitudinal=longitudinal, yaw_rate=yaw)


@dataclass(frozen=True)
class Maneuver:
    """Executable wire-command script for one gesture."""

    gesture: Gesture
    commands: tuple[str, ...]
    snapshot: bool = False
    arc_radius_cm: float = 0.0

    @property
    def arc_length_cm(self) -> float:
        """Ideal arc length of the circle-around path (0 for others)."""
        return math.pi / 2.0 * self.arc_radius_cm


_STEP_COMMANDS = {
    Gesture.UP: "up",
    Gesture.DOWN: "down",
    Gesture.LEFT: "left",
    Gesture.RIGHT: "right",
    Gesture.FORWARD: "forward",
    Gesture.BACKWARD: "back",
}


def _fmt(v: float) -> str:
    return f"{v:.4f}".rstrip("0").rstrip(".")


def _yaw_of(hx: float, hy: float) -> float:
    """Yaw (deg, clockwise from +y) of a world-frame heading vector."""
    return math.degrees(math.atan2(hx, hy))


def _turn_commands(from_yaw: float, to_yaw: float) -> list[str]:
    d = (to_yaw - from_yaw + 180.0) % 360.0 - 180.0
    if abs(d) < 1.0:
        return []
    return [f"cw {_fmt(d)}"] if d > 0 else [f"ccw {_fmt(-d)}"]


def circle_around(state: DroneState, radius_cm: float, side: Gesture) -> list[str]:
    """Quarter-circle around the user (assumed straight ahead at
    radius_cm), ending in front of them and facing them.

    The arc is flown as up to 8 chords, each a rotation plus a forward
    move; chord counts adapt so every move clears the 20 cm protocol
    minimum. The net heading change is 90 degrees toward the side the
    user presented.
    """
    if radius_cm < MIN_MOVE_CM:
        return []
    chords = 1
    for k in range(MAX_ARC_CHORDS, 0, -1):
        if 2.0 * radius_cm * math.sin(math.radians(45.0 / k)) >= MIN_MOVE_CM:
            chords = k
            break
    phi = 90.0 / chords
    # SideLeft: the user's left faces the drone, their front lies 90
    # degrees clockwise around the circle; SideRight mirrors it.
    sweep_sign = -1.0 if side is Gesture.SIDE_LEFT else 1.0

    psi0 = state.yaw
    hx, hy = math.sin(math.radians(psi0)), math.cos(math.radians(psi0))
    ux, uy = state.x + radius_cm * hx, state.y + radius_cm * hy  # user position
    rx, ry = -hx, -hy  # unit radial from user toward the drone

    def point(theta_deg: float) -> tuple[float, float]:
        t = math.radians(sweep_sign * theta_deg)
        # ccw rotation of the radial by t (sweep_sign folds in direction)
        px = rx * math.cos(t) - ry * math.sin(t)
        py = rx * math.sin(t) + ry * math.cos(t)
        return ux + radius_cm * px, uy + radius_cm * py

    cmds: list[str] = []
    cur_yaw = psi0
    prev = point(0.0)
    for i in range(1, chords + 1):
        nxt = point(i * phi)
        cx, cy = nxt[0] - prev[0], nxt[1] - prev[1]
        target_yaw = _yaw_of(cx, cy)
        cmds += _turn_commands(cur_yaw, target_yaw)
        cur_yaw = target_yaw
        cmds.append(f"forward {_fmt(math.hypot(cx, cy))}")
        prev = nxt
    face_user = _yaw_of(ux - prev[0], uy - prev[1])
    cmds += _turn_commands(cur_yaw, face_user)
    return cmds


def gesture_to_maneuver(event: GestureEvent, current: DroneState, distance_cm: float) -> Maneuver:
    """Translate a stable gesture into a wire-command script."""
    g = event.gesture
    if g in _STEP_COMMANDS:
        return Maneuver(g, (f"{_STEP_COMMANDS[g]} {_fmt(GESTURE_STEP_CM)}",))
    if g is Gesture.CW:
        return Maneuver(g, (f"cw {_fmt(GESTURE_TURN_DEG)}",))
    if g is Gesture.CCW:
        return Maneuver(g, (f"ccw {_fmt(GESTURE_TURN_DEG)}",))
    if g is Gesture.CHEESE:
        return Maneuver(g, (), snapshot=True)
    if g in (Gesture.SIDE_LEFT, Gesture.SIDE_RIGHT):
        return Maneuver(g, tuple(circle_around(current, distance_cm, g)), arc_radius_cm=distance_cm)
    raise ValueError(f"unhandled gesture {g}")


# altitude position loop used by the closed-loop tuning scenario; values
# tuned against the simulator plant: kp raised until the loop oscillated,
# then ki/kd adjusted (small ki keeps the slew-phase windup bias inside
# the 2 cm band while still draining the residual)
DEFAULT_ALTITUDE_GAINS = PIDGains(kp=2.5, ki=0.02, kd=0.6)
