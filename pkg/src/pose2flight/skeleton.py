"""Canonical 2D skeleton data model and geometry primitives.

Joints follow the OpenPose COCO 18-keypoint indexing. Image coordinates
have the origin at the top-left corner, +x right, +y down. A joint with
confidence 0 is treated as missing and its coordinates carry no meaning.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

# COCO keypoint ids used by the classifiers
NOSE = 0
NECK = 1
R_SHOULDER = 2
R_ELBOW = 3
R_WRIST = 4
L_SHOULDER = 5
L_ELBOW = 6
L_WRIST = 7
R_HIP = 8
L_HIP = 11
R_EYE = 14
L_EYE = 15
R_EAR = 16
L_EAR = 17

NUM_JOINTS = 18

HEAD_JOINTS = (NOSE, NECK, R_EYE, L_EYE, R_EAR, L_EAR)

# below this segment length (px) a limb is considered degenerate
DEGENERATE_EPS = 1e-6


class SkeletonError(Exception):
    """Base class for skeleton-domain errors."""


class MissingJoint(SkeletonError):
    """A required joint has confidence 0."""


class DegenerateLimb(SkeletonError):
    """A limb segment is too short to define a direction."""


class ParseError(SkeletonError):
    """Malformed stream record; carries the byte offset of the failure."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset


class SchemaError(SkeletonError):
    """Structurally valid record that violates the frame schema."""


@dataclass(frozen=True)
class Joint:
    x: float
    y: float
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def present(self) -> bool:
        return self.confidence > 0.0


MISSING_JOINT = Joint(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class SkeletonFrame:
    """One person's pose at one instant: exactly 18 joint slots."""

    timestamp_ms: int
    joints: tuple[Joint, ...]
    image_width: int
    image_height: int

    def __post_init__(self):
        if len(self.joints) != NUM_JOINTS:
            raise ValueError(f"expected {NUM_JOINTS} joints, got {len(self.joints)}")
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")

    def joint(self, i: int) -> Joint:
        return self.joints[i]

    def present(self, i: int) -> bool:
        return self.joints[i].present


def joint_distance(frame: SkeletonFrame, i: int, k: int) -> float:
    """2D Euclidean distance between joints i and k, in pixels."""
    ji, jk = frame.joints[i], frame.joints[k]
    if not ji.present:
        raise MissingJoint(f"joint {i} missing")
    if not jk.present:
        raise MissingJoint(f"joint {k} missing")
    return math.hypot(ji.x - jk.x, ji.y - jk.y)


_SIDE_JOINTS = {"left": (L_SHOULDER, L_ELBOW, L_WRIST), "right": (R_SHOULDER, R_ELBOW, R_WRIST)}


def arm_joints(side: str) -> tuple[int, int, int]:
    """(shoulder, elbow, wrist) ids for an anatomical side."""
    try:
        return _SIDE_JOINTS[side]
    except KeyError:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}") from None


def elbow_angle(frame: SkeletonFrame, side: str) -> float:
    """Inner elbow angle in degrees, in [0, 180].

    Measured between the (shoulder - elbow) and (wrist - elbow) vectors,
    so a fully extended arm reads 180 and a folded one reads 0.
    """
    s_id, e_id, w_id = arm_joints(side)
    for jid in (s_id, e_id, w_id):
        if not frame.present(jid):
            raise MissingJoint(f"joint {jid} missing for {side} elbow angle")
    s, e, w = frame.joints[s_id], frame.joints[e_id], frame.joints[w_id]
    ux, uy = s.x - e.x, s.y - e.y
    vx, vy = w.x - e.x, w.y - e.y
    nu = math.hypot(ux, uy)
    nv = math.hypot(vx, vy)
    if nu <= DEGENERATE_EPS or nv <= DEGENERATE_EPS:
        raise DegenerateLimb(f"{side} arm segment shorter than {DEGENERATE_EPS} px")
    cos_a = (ux * vx + uy * vy) / (nu * nv)
    cos_a = max(-1.0, min(1.0, cos_a))
    return math.degrees(math.acos(cos_a))


def parse_skeleton_frame(record: bytes | str) -> SkeletonFrame:
    """Parse one line of the skeleton stream format.

    The record is a JSON object with integer ``timestamp_ms``,
    ``image_width`` and ``image_height`` fields plus a ``keypoints`` list.
    Keypoint entries normally carry an ``id`` in 0-17; ids not listed
    become confidence-0 joints. Entries without ids are read positionally
    and must then cover all 18 slots.
    """
    if isinstance(record, bytes):
        try:
            text = record.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid utf-8: {exc}", offset=exc.start) from exc
    else:
        text = record
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(obj, dict):
        raise SchemaError("record is not a JSON object")
    for field in ("timestamp_ms", "image_width", "image_height", "keypoints"):
        if field not in obj:
            raise SchemaError(f"missing field {field!r}")
    keypoints = obj["keypoints"]
    if not isinstance(keypoints, list):
        raise SchemaError("keypoints must be a list")

    tagged = all(isinstance(kp, dict) and "id" in kp for kp in keypoints)
    joints: list[Joint] = [MISSING_JOINT] * NUM_JOINTS
    if tagged:
        seen = set()
        for kp in keypoints:
            jid = kp["id"]
            if not isinstance(jid, int) or not 0 <= jid < NUM_JOINTS:
                raise SchemaError(f"keypoint id {jid!r} outside 0-{NUM_JOINTS - 1}")
            if jid in seen:
                raise SchemaError(f"duplicate keypoint id {jid}")
            seen.add(jid)
            joints[jid] = _read_joint(kp)
    else:
        # positional form: no padding allowed, all 18 slots required
        if len(keypoints) != NUM_JOINTS:
            raise SchemaError(
                f"positional keypoint list has {len(keypoints)} entries, expected {NUM_JOINTS}"
            )
        for jid, kp in enumerate(keypoints):
            if not isinstance(kp, dict):
                raise SchemaError("keypoint entries must be objects")
            joints[jid] = _read_joint(kp)

    try:
        return SkeletonFrame(
            timestamp_ms=int(obj["timestamp_ms"]),
            joints=tuple(joints),
            image_width=int(obj["image_width"]),
            image_height=int(obj["image_height"]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(str(exc)) from exc


def _read_joint(kp: dict) -> Joint:
    try:
        c = float(kp.get("c", 0.0))
        if c <= 0.0:
            return MISSING_JOINT
        return Joint(float(kp["x"]), float(kp["y"]), c)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad keypoint entry {kp!r}") from exc


def serialize_skeleton_frame(frame: SkeletonFrame) -> str:
    """Inverse of parse_skeleton_frame; missing joints are omitted."""
    keypoints = [
        {"id": i, "x": j.x, "y": j.y, "c": j.confidence}
        for i, j in enumerate(frame.joints)
        if j.present
    ]
    return json.dumps(
        {
            "timestamp_ms": frame.timestamp_ms,
            "image_width": frame.image_width,
            "image_height": frame.image_height,
            "keypoints": keypoints,
        },
        separators=(",", ":"),
    )
