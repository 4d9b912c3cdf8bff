import math

import pytest

from pose2flight.control import (
    CHANNEL_LIMIT,
    ControlEvent,
    ControlMode,
    DEFAULT_ALTITUDE_GAINS,
    FaceTracker,
    FaceTrackingGains,
    HOVER,
    Maneuver,
    PIDGains,
    PIDState,
    VelocityCommand,
    circle_around,
    gesture_to_maneuver,
    mode_arbiter,
    pid_step,
)
from pose2flight.gestures import ClockSkew, Gesture, GestureEvent
from pose2flight.sim import DroneSim, DroneState


class TestPidStep:
    def test_pure_proportional(self):
        state = PIDState()
        assert pid_step(PIDGains(kp=1.0), state, 5.0, 0.0, 0) == pytest.approx(5.0)

    def test_trapezoidal_integral(self):
        gains = PIDGains(ki=0.5)
        state = PIDState()
        assert pid_step(gains, state, 1.0, 0.0, 0) == 0.0  # no time base yet
        pid_step(gains, state, 1.0, 0.0, 1000)
        u = pid_step(gains, state, 1.0, 0.0, 2000)
        # integral of constant e=1 over 2 s is 2.0; term = 0.5 * 2.0
        assert u == pytest.approx(1.0)
        assert state.integral == pytest.approx(2.0)

    def test_zero_derivative_for_constant_error(self):
        gains = PIDGains(kd=3.0)
        state = PIDState()
        pid_step(gains, state, 2.0, 0.0, 0)
        assert pid_step(gains, state, 2.0, 0.0, 100) == pytest.approx(0.0)

    def test_derivative_term(self):
        gains = PIDGains(kd=2.0)
        state = PIDState()
        pid_step(gains, state, 0.0, 0.0, 0)
        # error goes 0 -> 1 over 0.5 s: de/dt = 2
        assert pid_step(gains, state, 1.0, 0.0, 500) == pytest.approx(4.0)

    def test_clock_skew(self):
        state = PIDState()
        pid_step(PIDGains(kp=1.0), state, 0.0, 0.0, 100)
        with pytest.raises(ClockSkew):
            pid_step(PIDGains(kp=1.0), state, 0.0, 0.0, 100)

    def test_linearity_in_gains(self):
        errors = [(1.0, 0), (2.5, 200), (-0.5, 450), (0.75, 700)]
        for scale in (2.0, 7.5, 0.3):
            s1, s2 = PIDState(), PIDState()
            g1 = PIDGains(kp=1.1, ki=0.4, kd=0.2)
            g2 = PIDGains(kp=scale * 1.1, ki=scale * 0.4, kd=scale * 0.2)
            for e, t in errors:
                u1 = pid_step(g1, s1, e, 0.0, t)
                u2 = pid_step(g2, s2, e, 0.0, t)
                assert u2 == pytest.approx(scale * u1, rel=1e-9)

    def test_integral_clamp(self):
        gains = PIDGains(ki=1.0)
        state = PIDState()
        pid_step(gains, state, 1000.0, 0.0, 0)
        pid_step(gains, state, 1000.0, 0.0, 1_000_000)
        assert state.integral == 100.0

    def test_gain_validation(self):
        with pytest.raises(ValueError):
            PIDGains(kp=-1.0)
        with pytest.raises(ValueError):
            PIDGains(kp=float("nan"))


class TestVelocityCommand:
    def test_clamping(self):
        cmd = VelocityCommand(lateral=500, vertical=-500, longitudinal=99, yaw_rate=101)
        assert cmd.lateral == CHANNEL_LIMIT
        assert cmd.vertical == -CHANNEL_LIMIT
        assert cmd.longitudinal == 99
        assert cmd.yaw_rate == CHANNEL_LIMIT

    def test_to_rc(self):
        assert VelocityCommand(1.2, 3.6, -2.4, 0).to_rc() == "rc 1 -2 4 0"


class TestModeArbiter:
    def test_emergency_absorbs(self):
        for mode in ControlMode:
            assert mode_arbiter(mode, ControlEvent("emergency")) is ControlMode.EMERGENCY

    def test_emergency_ignores_mode_switch(self):
        got = mode_arbiter(ControlMode.EMERGENCY, ControlEvent("mode", mode=ControlMode.KEYBOARD))
        assert got is ControlMode.EMERGENCY

    def test_reset_leaves_emergency(self):
        assert mode_arbiter(ControlMode.EMERGENCY, ControlEvent("reset")) is ControlMode.KEYBOARD

    def test_key_switches(self):
        assert mode_arbiter(ControlMode.KEYBOARD, ControlEvent("key", key="2")) is ControlMode.FACE_TRACKING
        assert mode_arbiter(ControlMode.KEYBOARD, ControlEvent("key", key="3")) is ControlMode.GESTURE_CONTROL
        assert mode_arbiter(ControlMode.GESTURE_CONTROL, ControlEvent("key", key="1")) is ControlMode.KEYBOARD

    def test_space_is_emergency(self):
        assert mode_arbiter(ControlMode.FACE_TRACKING, ControlEvent("key", key=" ")) is ControlMode.EMERGENCY

    def test_other_keys_keep_mode(self):
        assert mode_arbiter(ControlMode.FACE_TRACKING, ControlEvent("key", key="t")) is ControlMode.FACE_TRACKING


class TestFaceTracker:
    def make(self):
        return FaceTracker(target_distance_cm=150.0)

    def test_centered_at_target_is_zero(self):
        tracker = self.make()
        cmd = tracker.update((320.0, 240.0), 100, (640, 480), 150.0, 100, 100)
        assert cmd == HOVER

    def test_face_right_of_center_yaws_clockwise(self):
        tracker = self.make()
        cmd = tracker.update((480.0, 240.0), 100, (640, 480), 150.0, 100, 100)
        assert cmd.yaw_rate > 0

    def test_face_left_of_center_yaws_counterclockwise(self):
        tracker = self.make()
        cmd = tracker.update((160.0, 240.0), 100, (640, 480), 150.0, 100, 100)
        assert cmd.yaw_rate < 0

    def test_face_below_center_descends(self):
        tracker = self.make()
        cmd = tracker.update((320.0, 400.0), 100, (640, 480), 150.0, 100, 100)
        assert cmd.vertical < 0

    def test_too_far_approaches(self):
        tracker = self.make()
        cmd = tracker.update((320.0, 240.0), 100, (640, 480), 250.0, 100, 100)
        assert cmd.longitudinal > 0

    def test_too_close_backs_off(self):
        tracker = self.make()
        cmd = tracker.update((320.0, 240.0), 100, (640, 480), 100.0, 100, 100)
        assert cmd.longitudinal < 0

    def test_stale_inputs_hover(self):
        tracker = self.make()
        cmd = tracker.update((480.0, 240.0), 100, (640, 480), 250.0, 100, 700)
        assert cmd == HOVER


class TestGestureManeuvers:
    def event(self, g):
        return GestureEvent(g, 0, 3)

    def test_up_is_fifty_cm(self):
        m = gesture_to_maneuver(self.event(Gesture.UP), DroneState(), 150.0)
        assert m.commands == ("up 50",)

    def test_all_translations(self):
        expect = {
            Gesture.UP: "up 50",
            Gesture.DOWN: "down 50",
            Gesture.LEFT: "left 50",
            Gesture.RIGHT: "right 50",
            Gesture.FORWARD: "forward 50",
            Gesture.BACKWARD: "back 50",
        }
        for g, cmd in expect.items():
            assert gesture_to_maneuver(self.event(g), DroneState(), 150.0).commands == (cmd,)

    def test_cw_ccw(self):
        assert gesture_to_maneuver(self.event(Gesture.CW), DroneState(), 150.0).commands == ("cw 90",)
        assert gesture_to_maneuver(self.event(Gesture.CCW), DroneState(), 150.0).commands == ("ccw 90",)

    def test_cheese_is_snapshot_only(self):
        m = gesture_to_maneuver(self.event(Gesture.CHEESE), DroneState(), 150.0)
        assert m.snapshot and m.commands == ()

    def test_side_arc_length(self):
        m = gesture_to_maneuver(self.event(Gesture.SIDE_LEFT), DroneState(), 200.0)
        assert m.arc_length_cm == pytest.approx(math.pi / 2 * 200.0)
        assert any(c.startswith("forward") for c in m.commands)

    def test_side_moves_respect_protocol_minimum(self):
        for radius in (100.0, 150.0, 200.0, 300.0):
            cmds = circle_around(DroneState(yaw=30.0), radius, Gesture.SIDE_RIGHT)
            for c in cmds:
                verb, mag = c.split()
                if verb == "forward":
                    assert 20.0 <= float(mag) <= 500.0


def fly_script(state, cmds, tick_ms=20.0, max_ticks=100_000):
    sim = DroneSim(state)
    sim.sdk_mode = True
    sim.state.flying = True
    for cmd in cmds:
        reply = sim.submit(cmd)
        if reply is None:
            for _ in range(max_ticks):
                if sim.tick(tick_ms):
                    break
        else:
            assert reply == "ok", f"{cmd} -> {reply}"
    return sim.state


class TestCircleAroundGeometry:
    @pytest.mark.parametrize("side", [Gesture.SIDE_LEFT, Gesture.SIDE_RIGHT])
    @pytest.mark.parametrize("radius", [100.0, 200.0, 300.0])
    def test_endpoint_within_tolerance(self, side, radius):
        start = DroneState(x=50.0, y=-20.0, z=100.0, yaw=37.0, flying=True)
        psi = math.radians(start.yaw)
        ux = start.x + radius * math.sin(psi)
        uy = start.y + radius * math.cos(psi)
        cmds = circle_around(start, radius, side)
        end = fly_script(DroneState(**vars(start)), cmds)

        sweep = -90.0 if side is Gesture.SIDE_LEFT else 90.0
        t = math.radians(sweep)
        rx, ry = (start.x - ux) / radius, (start.y - uy) / radius
        ex = ux + radius * (rx * math.cos(t) - ry * math.sin(t))
        ey = uy + radius * (rx * math.sin(t) + ry * math.cos(t))
        assert math.hypot(end.x - ex, end.y - ey) < 5.0

        yaw_to_user = math.degrees(math.atan2(ux - end.x, uy - end.y))
        yaw_err = abs((end.yaw - yaw_to_user + 180.0) % 360.0 - 180.0)
        assert yaw_err < 5.0

    def test_net_heading_change_is_ninety(self):
        start = DroneState(yaw=0.0, flying=True)
        end = fly_script(
            DroneState(**vars(start)), circle_around(start, 200.0, Gesture.SIDE_LEFT)
        )
        assert (end.yaw - start.yaw) % 360.0 == pytest.approx(90.0, abs=0.01)


def altitude_closed_loop(gains, setpoint=100.0, duration_s=10.0, tick_ms=50.0):
    """1-D altitude plant under PID position control."""
    sim = DroneSim(DroneState(z=0.0, flying=True))
    sim.sdk_mode = True
    state = PIDState()
    t = 0.0
    history = []
    while t < duration_s * 1000.0:
        u = pid_step(gains, state, setpoint, sim.state.z, int(t))
        u = max(-100.0, min(100.0, u))
        sim.submit(f"rc 0 0 {u} 0")
        sim.tick(tick_ms)
        t += tick_ms
        history.append((t / 1000.0, sim.state.z))
    return history


class TestClosedLoop:
    def test_tuned_gains_settle(self):
        hist = altitude_closed_loop(DEFAULT_ALTITUDE_GAINS)
        settle = None
        for i, (t, z) in enumerate(hist):
            if all(abs(z2 - 100.0) <= 2.0 for _, z2 in hist[i:]):
                settle = t
                break
        assert settle is not None and settle <= 5.0
        assert abs(hist[-1][1] - 100.0) < 1.0  # integral drains the residual

    def test_kp_only_high_gain_oscillates(self):
        hist = altitude_closed_loop(PIDGains(kp=40.0), duration_s=6.0)
        errors = [100.0 - z for _, z in hist]
        sign_changes = sum(
            1
            for a, b in zip(errors, errors[1:])
            if a != 0 and b != 0 and (a > 0) != (b > 0)
        )
        assert sign_changes >= 3
