"""7-dimensional geometric feature vector for distance estimation.

Head-box width, height and their product plus the neck-to-hip span all
shrink with 1/distance; a 3-flag view encoding (back and ambiguous
merged) disambiguates the narrower side-view silhouettes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..head import BBox
from ..skeleton import L_HIP, NECK, MissingJoint, SkeletonFrame, joint_distance
from ..view import ViewClass

FEATURE_DIM = 7

# class labels in centimeters, index order fixed everywhere
CLASS_LABELS_CM = (100.0, 150.0, 200.0, 250.0, 300.0)


@dataclass(frozen=True)
class DistanceFeatures:
    w: float
    h: float
    wh: float
    torso: float
    view_front: int
    view_side: int
    view_other: int

    def __post_init__(self):
        if self.wh != self.w * self.h:
            raise ValueError("wh must equal w*h exactly")
        if self.view_front + self.view_side + self.view_other != 1:
            raise ValueError("exactly one view flag must be set")
        if min(self.w, self.h, self.torso) <= 0:
            raise ValueError("geometric features must be positive")

    def to_vector(self) -> np.ndarray:
        return np.array(
            [self.w, self.h, self.wh, self.torso, self.view_front, self.view_side, self.view_other],
            dtype=np.float64,
        )


def view_onehot(view: ViewClass) -> tuple[int, int, int]:
    """(front, side, back-or-ambiguous) flags."""
    if view is ViewClass.FRONT:
        return (1, 0, 0)
    if view is ViewClass.SIDE:
        return (0, 1, 0)
    return (0, 0, 1)


def build_features(bbox: BBox, frame: SkeletonFrame, view: ViewClass) -> DistanceFeatures:
    """Assemble the feature vector from a head box, skeleton and view."""
    if not (frame.present(NECK) and frame.present(L_HIP)):
        raise MissingJoint("neck and left hip required for the torso span")
    torso = joint_distance(frame, NECK, L_HIP)
    front, side, other = view_onehot(view)
    return DistanceFeatures(
        w=bbox.width,
        h=bbox.height,
        wh=bbox.width * bbox.height,
        torso=torso,
        view_front=front,
        view_side=side,
        view_other=other,
    )
