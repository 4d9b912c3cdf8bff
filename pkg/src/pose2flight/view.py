"""Body-orientation classification from shoulder/nose/ear geometry.

The classifier compares the shoulder width against the weighted
nose-to-neck distance (both scale with the person's image size, so the
ratio is distance-invariant) and falls back to the relative ear order to
split front from back.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .skeleton import L_EAR, L_SHOULDER, NECK, NOSE, R_EAR, R_SHOULDER, SkeletonFrame, joint_distance


class ViewClass(enum.Enum):
    FRONT = "Front"
    SIDE = "Side"
    BACK = "Back"
    AMBIGUOUS = "Ambiguous"


@dataclass(frozen=True)
class ViewConfig:
    gamma: float = 0.5

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


def classify_view(frame: SkeletonFrame, cfg: ViewConfig = ViewConfig()) -> ViewClass:
    """Classify the user's orientation.

    Side when the shoulder width collapses below gamma times the
    nose-to-neck distance; otherwise the horizontal ear order decides
    front versus back (right ear at or left of the left ear reads as
    facing the camera). Any missing joint required by the test being
    evaluated yields Ambiguous.
    """
    ratio_joints = (NOSE, NECK, R_SHOULDER, L_SHOULDER)
    if not all(frame.present(i) for i in ratio_joints):
        return ViewClass.AMBIGUOUS
    shoulder_width = joint_distance(frame, R_SHOULDER, L_SHOULDER)
    nose_neck = joint_distance(frame, NOSE, NECK)
    if shoulder_width <= cfg.gamma * nose_neck:
        return ViewClass.SIDE
    if not (frame.present(R_EAR) and frame.present(L_EAR)):
        return ViewClass.AMBIGUOUS
    if frame.joint(R_EAR).x <= frame.joint(L_EAR).x:
        return ViewClass.FRONT
    return ViewClass.BACK
