"""Simulated quadrotor speaking the Tello-style text command protocol.

The plant is a per-axis first-order velocity lag (time constant 300 ms)
with exact per-tick integration, so step responses match the continuous
closed form at tick boundaries. Relative moves run an internal velocity
profile along one body axis and finish by snapping the last fraction of
a centimeter, which makes command sequences exactly reproducible.

Replies follow the SDK convention: immediate "ok"/"error" for stateless
commands, deferred "ok" once a motion command completes. The "emergency"
verb cuts the motors instantly (velocity zero within the same call).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

VELOCITY_TAU_MS = 300.0
MOVE_SPEED = 50.0  # cm/s during relative moves
YAW_SPEED = 90.0  # deg/s during relative rotations
TAKEOFF_ALT_CM = 80.0
BATTERY_DRAIN_PER_S = 0.1  # percent per simulated second while flying

MOVE_VERBS = {"up", "down", "left", "right", "forward", "back"}
TURN_VERBS = {"cw", "ccw"}


class UnknownCommand(Exception):
    pass


class OutOfRange(Exception):
    pass


@dataclass(frozen=True)
class TelloCommand:
    kind: str  # control | move | turn | rc | read
    verb: str
    magnitude: float = 0.0
    channels: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)


def parse_command(text: str) -> TelloCommand:
    """Parse one ASCII datagram into a command variant."""
    parts = text.strip().split()
    if not parts:
        raise UnknownCommand("empty command")
    verb = parts[0]
    if verb in ("command", "takeoff", "land", "emergency"):
        if len(parts) != 1:
            raise UnknownCommand(f"{verb} takes no arguments")
        return TelloCommand("control", verb)
    if verb == "battery?":
        if len(parts) != 1:
            raise UnknownCommand("battery? takes no arguments")
        return TelloCommand("read", verb)
    if verb in MOVE_VERBS:
        if len(parts) != 2:
            raise UnknownCommand(f"{verb} takes one argument")
        mag = _number(parts[1])
        if not 20.0 <= mag <= 500.0:
            raise OutOfRange(f"{verb} magnitude {mag} outside [20, 500] cm")
        return TelloCommand("move", verb, magnitude=mag)
    if verb in TURN_VERBS:
        if len(parts) != 2:
            raise UnknownCommand(f"{verb} takes one argument")
        mag = _number(parts[1])
        if not 1.0 <= mag <= 360.0:
            raise OutOfRange(f"{verb} angle {mag} outside [1, 360] deg")
        return TelloCommand("turn", verb, magnitude=mag)
    if verb == "rc":
        if len(parts) != 5:
            raise UnknownCommand("rc takes four channels")
        ch = tuple(_number(p) for p in parts[1:])
        if any(not -100.0 <= c <= 100.0 for c in ch):
            raise OutOfRange(f"rc channels {ch} outside [-100, 100]")
        return TelloCommand("rc", verb, channels=ch)
    raise UnknownCommand(f"unsupported verb {verb!r}")


def _number(token: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise UnknownCommand(f"not a number: {token!r}") from None


@dataclass
class DroneState:
    x: float = 0.0  # cm, world frame, z up
    y: float = 0.0
    z: float = 0.0
    yaw: float = 0.0  # degrees, clockwise positive, 0 = +y axis
    v_right: float = 0.0  # body-frame actual velocity, cm/s
    v_forward: float = 0.0
    v_up: float = 0.0
    yaw_rate: float = 0.0  # deg/s, clockwise positive
    battery: float = 100.0
    flying: bool = False
    sim_time_ms: float = 0.0
    flight_time_ms: float = 0.0


@dataclass
class _ActiveMove:
    kind: str  # move | turn | takeoff | land
    axis: tuple[float, float, float] = (0.0, 0.0, 0.0)  # body (right, fwd, up)
    remaining: float = 0.0  # cm or degrees
    turn_sign: float = 0.0


_MOVE_AXES = {
    "up": (0.0, 0.0, 1.0),
    "down": (0.0, 0.0, -1.0),
    "left": (-1.0, 0.0, 0.0),
    "right": (1.0, 0.0, 0.0),
    "forward": (0.0, 1.0, 0.0),
    "back": (0.0, -1.0, 0.0),
}


def _lag_step(v0: float, v_cmd: float, dt_ms: float) -> tuple[float, float]:
    """(new velocity, exact displacement) for one first-order-lag tick."""
    dt_s = dt_ms / 1000.0
    tau_s = VELOCITY_TAU_MS / 1000.0
    decay = math.exp(-dt_s / tau_s)
    v_new = v_cmd + (v0 - v_cmd) * decay
    disp = v_cmd * dt_s + (v0 - v_cmd) * tau_s * (1.0 - decay)
    return v_new, disp


class DroneSim:
    """Virtual-clock plant; the UDP endpoint drives it from a thread."""

    def __init__(self, state: Optional[DroneState] = None):
        self.state = state or DroneState()
        self.sdk_mode = False
        self._active: Optional[_ActiveMove] = None
        self._rc = (0.0, 0.0, 0.0, 0.0)
        self._pending_reply = False

    # -- command intake ------------------------------------------------

    def submit(self, text: str) -> Optional[str]:
        """Handle one datagram. Returns the reply, or None when the
        reply is deferred until the motion completes (collect it from
        tick())."""
        try:
            cmd = parse_command(text)
        except (UnknownCommand, OutOfRange):
            return "error"
        if cmd.verb == "command":
            self.sdk_mode = True
            return "ok"
        if not self.sdk_mode:
            return "error"
        if cmd.verb == "emergency":
            self._cut_motors()
            return "ok"
        if cmd.verb == "battery?":
            return str(int(self.state.battery))
        if cmd.verb == "takeoff":
            if self.state.flying or self._active is not None:
                return "error"
            self.state.flying = True
            self._active = _ActiveMove("takeoff", axis=(0.0, 0.0, 1.0), remaining=TAKEOFF_ALT_CM)
            self._pending_reply = True
            return None
        if not self.state.flying:
            return "error"
        if cmd.verb == "land":
            self._active = _ActiveMove("land", axis=(0.0, 0.0, -1.0), remaining=self.state.z)
            self._rc = (0.0, 0.0, 0.0, 0.0)
            self._pending_reply = True
            return None
        if self._active is not None:
            return "error"  # busy with a move
        if cmd.kind == "move":
            self._active = _ActiveMove("move", axis=_MOVE_AXES[cmd.verb], remaining=cmd.magnitude)
            self._pending_reply = True
            return None
        if cmd.kind == "turn":
            sign = 1.0 if cmd.verb == "cw" else -1.0
            self._active = _ActiveMove("turn", remaining=cmd.magnitude, turn_sign=sign)
            self._pending_reply = True
            return None
        if cmd.kind == "rc":
            self._rc = cmd.channels
            return "ok"
        return "error"

    def _cut_motors(self):
        s = self.state
        s.v_right = s.v_forward = s.v_up = 0.0
        s.yaw_rate = 0.0
        s.flying = False
        self._rc = (0.0, 0.0, 0.0, 0.0)
        self._active = None
        self._pending_reply = False

    # -- plant ----------------------------------------------------------

    def tick(self, dt_ms: float) -> list[str]:
        """Advance simulated time; returns replies completed this tick."""
        if not 0.0 < dt_ms <= 100.0:
            raise ValueError("dt must be in (0, 100] ms")
        s = self.state
        s.sim_time_ms += dt_ms
        replies: list[str] = []
        if not s.flying:
            return replies

        s.flight_time_ms += dt_ms
        s.battery = max(0.0, s.battery - BATTERY_DRAIN_PER_S * dt_ms / 1000.0)

        move_done = False
        if self._active is not None and self._active.kind == "turn":
            mv = self._active
            cmd_rate = YAW_SPEED * mv.turn_sign
            rate_new, dpsi = _lag_step(s.yaw_rate, cmd_rate, dt_ms)
            if abs(dpsi) >= mv.remaining:
                s.yaw += mv.turn_sign * mv.remaining
                s.yaw_rate = 0.0
                move_done = True
            else:
                s.yaw += dpsi
                mv.remaining -= abs(dpsi)
                s.yaw_rate = rate_new
            self._integrate_translation((0.0, 0.0, 0.0), dt_ms)
        elif self._active is not None:
            mv = self._active
            # displacement along the move axis uses the exact lag integral;
            # cross-axis velocity is braked away at move start
            v_along = (
                s.v_right * mv.axis[0] + s.v_forward * mv.axis[1] + s.v_up * mv.axis[2]
            )
            v_new, disp = _lag_step(v_along, MOVE_SPEED, dt_ms)
            if disp >= mv.remaining:
                self._displace_body(mv.axis, mv.remaining)
                s.v_right = s.v_forward = s.v_up = 0.0
                move_done = True
            else:
                self._displace_body(mv.axis, disp)
                mv.remaining -= disp
                s.v_right = mv.axis[0] * v_new
                s.v_forward = mv.axis[1] * v_new
                s.v_up = mv.axis[2] * v_new
            # yaw holds during translation moves
            s.yaw_rate = 0.0
        else:
            self._integrate_rc(dt_ms)

        if move_done:
            finished = self._active
            self._active = None
            if finished.kind == "land":
                s.z = 0.0
                s.flying = False
            if self._pending_reply:
                replies.append("ok")
                self._pending_reply = False
        s.z = max(s.z, 0.0)
        return replies

    def _integrate_rc(self, dt_ms: float):
        s = self.state
        a, b, c, d = self._rc
        s.v_right, dx_r = _lag_step(s.v_right, a, dt_ms)
        s.v_forward, dx_f = _lag_step(s.v_forward, b, dt_ms)
        s.v_up, dz = _lag_step(s.v_up, c, dt_ms)
        yaw0 = s.yaw
        s.yaw_rate, dpsi = _lag_step(s.yaw_rate, d, dt_ms)
        self._displace_world(dx_r, dx_f, dz, yaw0)
        s.yaw += dpsi

    def _integrate_translation(self, _axis, dt_ms: float):
        # translation standstill while turning: velocities decay to zero
        s = self.state
        s.v_right, dx_r = _lag_step(s.v_right, 0.0, dt_ms)
        s.v_forward, dx_f = _lag_step(s.v_forward, 0.0, dt_ms)
        s.v_up, dz = _lag_step(s.v_up, 0.0, dt_ms)
        self._displace_world(dx_r, dx_f, dz, s.yaw)

    def _displace_body(self, axis: tuple[float, float, float], dist: float):
        self._displace_world(axis[0] * dist, axis[1] * dist, axis[2] * dist, self.state.yaw)

    def _displace_world(self, d_right: float, d_fwd: float, d_up: float, yaw_deg: float):
        s = self.state
        psi = math.radians(yaw_deg)
        hx, hy = math.sin(psi), math.cos(psi)  # heading
        rx, ry = hy, -hx  # body right
        s.x += d_fwd * hx + d_right * rx
        s.y += d_fwd * hy + d_right * ry
        s.z += d_up

    # -- telemetry -------------------------------------------------------

    def telemetry(self) -> str:
        """State string in the pinned push format."""
        s = self.state
        psi = math.radians(s.yaw)
        hx, hy = math.sin(psi), math.cos(psi)
        rx, ry = hy, -hx
        vgx = s.v_forward * hx + s.v_right * rx
        vgy = s.v_forward * hy + s.v_right * ry
        yaw_disp = ((s.yaw + 180.0) % 360.0) - 180.0
        return (
            f"pitch:0;roll:0;yaw:{int(round(yaw_disp))};"
            f"vgx:{int(round(vgx))};vgy:{int(round(vgy))};vgz:{int(round(s.v_up))};"
            f"h:{int(round(s.z))};bat:{int(s.battery)};time:{int(s.flight_time_ms / 1000.0)};\r\n"
        )

    @property
    def busy(self) -> bool:
        return self._active is not None
