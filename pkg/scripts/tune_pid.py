#!/usr/bin/env python3
"""Manual PID tuning sweep against the simulated 1-D altitude plant.

Reproduces the trial-and-error recipe: raise kp alone until the loop
oscillates, then add ki to remove the residual and kd to speed up the
response. Prints settle time, overshoot and final error per candidate so
the chosen defaults can be read off the table.

Usage: python scripts/tune_pid.py [--setpoint 100] [--plot]
"""

import argparse

from pose2flight.control import PIDGains, PIDState, pid_step
from pose2flight.sim import DroneSim, DroneState


def run(gains, setpoint, duration_s=10.0, tick_ms=50.0):
    sim = DroneSim(DroneState(z=0.0, flying=True))
    sim.sdk_mode = True
    state = PIDState()
    t = 0.0
    hist = []
    while t < duration_s * 1000.0:
        u = pid_step(gains, state, setpoint, sim.state.z, int(t))
        u = max(-100.0, min(100.0, u))
        sim.submit(f"rc 0 0 {u} 0")
        sim.tick(tick_ms)
        t += tick_ms
        hist.append((t / 1000.0, sim.state.z))
    return hist


def metrics(hist, setpoint):
    band = 0.02 * setpoint
    settle = None
    for i, (t, z) in enumerate(hist):
        if all(abs(z2 - setpoint) <= band for _, z2 in hist[i:]):
            settle = t
            break
    overshoot = max(z for _, z in hist) - setpoint
    errors = [setpoint - z for _, z in hist]
    sign_changes = sum(
        1 for a, b in zip(errors, errors[1:]) if a != 0 and b != 0 and (a > 0) != (b > 0)
    )
    return settle, overshoot, abs(errors[-1]), sign_changes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--setpoint", type=float, default=100.0)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    print("step 1: kp sweep (ki = kd = 0) until oscillation")
    for kp in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0):
        h = run(PIDGains(kp=kp), args.setpoint)
        s, o, f, sc = metrics(h, args.setpoint)
        print(f"  kp={kp:5.1f}  settle={s}  overshoot={o:6.2f}  final_err={f:6.3f}  sign_changes={sc}")

    print("step 2: ki/kd around the chosen kp")
    candidates = [
        (2.0, 0.02, 0.5),
        (2.5, 0.02, 0.6),
        (2.5, 0.04, 0.8),
        (3.0, 0.03, 0.7),
    ]
    best = None
    for kp, ki, kd in candidates:
        h = run(PIDGains(kp, ki, kd), args.setpoint)
        s, o, f, _ = metrics(h, args.setpoint)
        print(f"  kp={kp} ki={ki} kd={kd}  settle={s}s  overshoot={o:.2f}  final_err={f:.3f}")
        if s is not None and (best is None or s < best[0]):
            best = (s, (kp, ki, kd), h)
    if best:
        print(f"chosen: kp/ki/kd = {best[1]} (settles in {best[0]}s)")
        if args.plot:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt

            ts, zs = zip(*best[2])
            plt.plot(ts, zs)
            plt.axhline(args.setpoint, ls="--", c="gray")
            plt.xlabel("t [s]")
            plt.ylabel("altitude [cm]")
            plt.savefig("pid_step_response.png", dpi=120)
            print("wrote pid_step_response.png")


if __name__ == "__main__":
    main()
