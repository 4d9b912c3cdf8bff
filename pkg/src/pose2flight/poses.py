"""Synthetic skeleton poses: canonical gesture rigs, jittered corpora
and random skeletons.

The rig places a person in a 640x480 frame. Frontal poses carry a 120 px
shoulder span; side poses collapse it to 12 px so the view test reads
Side. Arm positions are authored per gesture so each pose hits its
target (angle state, position state) pair with a comfortable margin.

Corpus generation perturbs the elbow angles by up to 10 degrees and adds
Gaussian joint jitter with sigma proportional to the pose's shoulder
width. A side gesture's extended arm varies its elbow angle by sagging
the elbow while the pointing wrist stays at shoulder height (how people
actually hold a point); other arms swing the forearm about the elbow.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

from .gestures import Gesture
from .skeleton import (
    L_EAR,
    L_ELBOW,
    L_SHOULDER,
    L_WRIST,
    NUM_JOINTS,
    R_EAR,
    R_ELBOW,
    R_SHOULDER,
    R_WRIST,
    Joint,
    MISSING_JOINT,
    SkeletonFrame,
)

IMAGE_W, IMAGE_H = 640, 480
DEFAULT_CONFIDENCE = 0.9

# torso/head joints shared by every frontal pose
_FRONT_BASE = {
    0: (320.0, 160.0),  # nose
    1: (320.0, 200.0),  # neck
    2: (260.0, 200.0),  # R shoulder
    5: (380.0, 200.0),  # L shoulder
    8: (290.0, 340.0),  # R hip
    11: (350.0, 340.0),  # L hip
    9: (288.0, 420.0),
    10: (286.0, 475.0),
    12: (352.0, 420.0),
    13: (354.0, 475.0),
    14: (308.0, 152.0),  # R eye
    15: (332.0, 152.0),  # L eye
    16: (298.0, 155.0),  # R ear
    17: (342.0, 155.0),  # L ear
}

_SIDE_BASE = {
    0: (330.0, 162.0),
    1: (320.0, 200.0),
    2: (314.0, 200.0),
    5: (326.0, 200.0),
    8: (316.0, 340.0),
    11: (324.0, 340.0),
    9: (315.0, 420.0),
    10: (314.0, 475.0),
    12: (325.0, 420.0),
    13: (326.0, 475.0),
    14: (324.0, 154.0),
    15: (328.0, 154.0),
    16: (317.0, 153.0),
    17: (319.0, 153.0),
}

# ((elbow dx, dy), (wrist dx, dy rel. elbow)) per arm, keyed left/right
_ArmSpec = tuple[tuple[float, float], tuple[float, float]]

_HANG_LEFT: _ArmSpec = ((0.0, 70.0), (0.0, 65.0))
_HANG_RIGHT: _ArmSpec = ((0.0, 70.0), (0.0, 65.0))

_ARM_SPECS: dict[Gesture, dict[str, _ArmSpec]] = {
    Gesture.UP: {
        "left": ((70.0, 0.0), (0.0, -65.0)),
        "right": ((-70.0, 0.0), (0.0, -65.0)),
    },
    Gesture.DOWN: {
        "left": ((70.0, 0.0), (0.0, 65.0)),
        "right": ((-70.0, 0.0), (0.0, 65.0)),
    },
    Gesture.FORWARD: {
        "left": ((49.5, -49.5), (46.0, -46.0)),
        "right": ((-49.5, -49.5), (-46.0, -46.0)),
    },
    Gesture.BACKWARD: {
        "left": ((70.0, 0.0), (65.0, 0.0)),
        "right": ((-70.0, 0.0), (-65.0, 0.0)),
    },
    Gesture.LEFT: {
        "left": ((70.0, 0.0), (65.0, 0.0)),
        "right": _HANG_RIGHT,
    },
    Gesture.RIGHT: {
        "left": _HANG_LEFT,
        "right": ((-70.0, 0.0), (-65.0, 0.0)),
    },
    Gesture.CW: {
        "left": ((70.0, 0.0), (0.0, -65.0)),
        "right": ((-70.0, 0.0), (0.0, 65.0)),
    },
    Gesture.CCW: {
        "left": ((70.0, 0.0), (0.0, 65.0)),
        "right": ((-70.0, 0.0), (0.0, -65.0)),
    },
    Gesture.CHEESE: {
        "left": ((49.5, 49.5), (46.0, -46.0)),
        "right": ((-49.5, 49.5), (-46.0, -46.0)),
    },
    Gesture.SIDE_LEFT: {
        "left": ((-70.0, 0.0), (-65.0, 0.0)),  # extended toward image-left
        "right": _HANG_RIGHT,
    },
    Gesture.SIDE_RIGHT: {
        "left": _HANG_LEFT,
        "right": ((70.0, 0.0), (65.0, 0.0)),
    },
}

SIDE_GESTURES = (Gesture.SIDE_LEFT, Gesture.SIDE_RIGHT)

# neutral stance (both arms hanging) classifies as no gesture
NEUTRAL = "neutral"

_ARM_IDS = {"left": (L_SHOULDER, L_ELBOW, L_WRIST), "right": (R_SHOULDER, R_ELBOW, R_WRIST)}


def gesture_pose(gesture: Gesture) -> dict[int, tuple[float, float]]:
    """Joint coordinate table (id -> (x, y)) for a canonical gesture."""
    base = _SIDE_BASE if gesture in SIDE_GESTURES else _FRONT_BASE
    joints = dict(base)
    for side, (e_off, w_off) in _ARM_SPECS[gesture].items():
        s_id, e_id, w_id = _ARM_IDS[side]
        sx, sy = joints[s_id]
        ex, ey = sx + e_off[0], sy + e_off[1]
        joints[e_id] = (ex, ey)
        joints[w_id] = (ex + w_off[0], ey + w_off[1])
    return joints


def neutral_pose() -> dict[int, tuple[float, float]]:
    joints = dict(_FRONT_BASE)
    for side in ("left", "right"):
        s_id, e_id, w_id = _ARM_IDS[side]
        sx, sy = joints[s_id]
        joints[e_id] = (sx, sy + 70.0)
        joints[w_id] = (sx, sy + 135.0)
    return joints


def build_frame(
    joints: dict[int, tuple[float, float]],
    timestamp_ms: int,
    missing: Iterable[int] = (),
    confidence: float = DEFAULT_CONFIDENCE,
    image_w: int = IMAGE_W,
    image_h: int = IMAGE_H,
) -> SkeletonFrame:
    missing = set(missing)
    slots = []
    for i in range(NUM_JOINTS):
        if i in joints and i not in missing:
            x, y = joints[i]
            slots.append(Joint(float(x), float(y), confidence))
        else:
            slots.append(MISSING_JOINT)
    return SkeletonFrame(timestamp_ms=timestamp_ms, joints=tuple(slots), image_width=image_w, image_height=image_h)


def _rotate(vx: float, vy: float, deg: float) -> tuple[float, float]:
    r = math.radians(deg)
    c, s = math.cos(r), math.sin(r)
    return vx * c - vy * s, vx * s + vy * c


def perturb_pose(
    joints: dict[int, tuple[float, float]],
    gesture: Gesture,
    rng: np.random.Generator,
    angle_max_deg: float = 10.0,
    jitter_frac: float = 0.03,
) -> dict[int, tuple[float, float]]:
    """One corpus sample: elbow-angle perturbation plus joint jitter."""
    out = dict(joints)
    extended = None
    if gesture is Gesture.SIDE_LEFT:
        extended = "left"
    elif gesture is Gesture.SIDE_RIGHT:
        extended = "right"
    for side in ("left", "right"):
        s_id, e_id, w_id = _ARM_IDS[side]
        if side == extended:
            # point holds: wrist stays put, the elbow sags off the line
            sx, sy = out[s_id]
            wx, wy = out[w_id]
            delta = rng.uniform(0.0, angle_max_deg)
            length = math.hypot(wx - sx, wy - sy)
            sag = (length / 2.0) * math.tan(math.radians(delta) / 2.0)
            sag *= 1.0 if rng.random() < 0.5 else -1.0
            mx, my = (sx + wx) / 2.0, (sy + wy) / 2.0
            nx, ny = -(wy - sy) / length, (wx - sx) / length
            out[e_id] = (mx + sag * nx, my + sag * ny)
        else:
            ex, ey = out[e_id]
            wx, wy = out[w_id]
            delta = rng.uniform(-angle_max_deg, angle_max_deg)
            fx, fy = _rotate(wx - ex, wy - ey, delta)
            out[w_id] = (ex + fx, ey + fy)

    # jitter scaled by this pose's shoulder width
    (r_sx, r_sy), (l_sx, l_sy) = out[R_SHOULDER], out[L_SHOULDER]
    sigma = jitter_frac * math.hypot(l_sx - r_sx, l_sy - r_sy)
    jittered = {}
    for jid, (x, y) in out.items():
        jittered[jid] = (x + sigma * rng.standard_normal(), y + sigma * rng.standard_normal())
    return jittered


def gesture_corpus(
    n_per_gesture: int,
    seed: int,
    angle_max_deg: float = 10.0,
    jitter_frac: float = 0.03,
) -> list[tuple[Gesture, SkeletonFrame]]:
    """Labeled jittered frames covering all 11 gestures."""
    rng = np.random.default_rng(seed)
    samples = []
    ts = 0
    for gesture in Gesture:
        canonical = gesture_pose(gesture)
        for _ in range(n_per_gesture):
            joints = perturb_pose(canonical, gesture, rng, angle_max_deg, jitter_frac)
            samples.append((gesture, build_frame(joints, ts)))
            ts += 33
    return samples


def pose_stream(
    gesture: Optional[Gesture],
    n_frames: int,
    start_ts_ms: int = 0,
    interval_ms: int = 33,
) -> list[SkeletonFrame]:
    """Noise-free frames repeating one gesture pose (None = neutral)."""
    joints = neutral_pose() if gesture is None else gesture_pose(gesture)
    return [
        build_frame(joints, start_ts_ms + i * interval_ms)
        for i in range(n_frames)
    ]


def random_skeleton(rng: np.random.Generator, present_prob: float = 0.85) -> SkeletonFrame:
    """Uniformly random joints with random dropouts, for oracle sweeps."""
    slots = []
    for _ in range(NUM_JOINTS):
        if rng.random() < present_prob:
            slots.append(
                Joint(float(rng.uniform(0, IMAGE_W)), float(rng.uniform(0, IMAGE_H)), float(rng.uniform(0.05, 1.0)))
            )
        else:
            slots.append(MISSING_JOINT)
    return SkeletonFrame(
        timestamp_ms=0, joints=tuple(slots), image_width=IMAGE_W, image_height=IMAGE_H
    )


def mirror_frame(frame: SkeletonFrame) -> SkeletonFrame:
    """Horizontal flip: x -> image_width - x on every present joint."""
    slots = [
        Joint(frame.image_width - j.x, j.y, j.confidence) if j.present else MISSING_JOINT
        for j in frame.joints
    ]
    return SkeletonFrame(
        timestamp_ms=frame.timestamp_ms,
        joints=tuple(slots),
        image_width=frame.image_width,
        image_height=frame.image_height,
    )


def scale_frame(frame: SkeletonFrame, s: float) -> SkeletonFrame:
    """Uniform coordinate scaling (dims kept; geometry tests only)."""
    slots = [
        Joint(j.x * s, j.y * s, j.confidence) if j.present else MISSING_JOINT
        for j in frame.joints
    ]
    return SkeletonFrame(
        timestamp_ms=frame.timestamp_ms,
        joints=tuple(slots),
        image_width=frame.image_width,
        image_height=frame.image_height,
    )
