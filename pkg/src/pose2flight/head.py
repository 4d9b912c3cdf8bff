"""Head bounding box from skeleton joints and single-user gating.

The head box is the axis-aligned hull of the visible head joints (nose,
neck, eyes, ears) grown by a fixed relative margin, which works from any
view including the back where no face is visible. A pluggable identity
matcher picks the registered user among candidate boxes; when it fails,
the box nearest to the last match is tracked instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from .skeleton import HEAD_JOINTS, SkeletonFrame

# box growth per side, as a fraction of the hull width/height
HEAD_MARGIN = 0.25

# a track with no identity match for longer than this is dropped
TRACK_STALE_MS = 2000


class InsufficientJoints(Exception):
    """Too few head joints to form a non-degenerate hull."""


@dataclass(frozen=True)
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("degenerate bbox")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> tuple[float, float]:
        return (self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0


def head_bbox(frame: SkeletonFrame, margin: float = HEAD_MARGIN) -> BBox:
    """Expanded hull box over the present head joints, clamped to the image."""
    pts = [(frame.joint(i).x, frame.joint(i).y) for i in HEAD_JOINTS if frame.present(i)]
    if len(pts) < 2:
        raise InsufficientJoints(f"only {len(pts)} head joints present")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x_min, x_max = min(xs), max(xs)
    y_min, y_max = min(ys), max(ys)
    w = x_max - x_min
    h = y_max - y_min
    if w <= 0.0 or h <= 0.0:
        raise InsufficientJoints("head joints are collinear, hull box is degenerate")
    return BBox(
        x_min=max(0.0, x_min - margin * w),
        y_min=max(0.0, y_min - margin * h),
        x_max=min(float(frame.image_width), x_max + margin * w),
        y_max=min(float(frame.image_height), y_max + margin * h),
    )


class IdentityMatcher(Protocol):
    """Decides which candidate box belongs to the registered user."""

    def match(self, boxes: Sequence[tuple[int, BBox]]) -> Optional[int]: ...


class AlwaysFirstMatcher:
    """Single-user desk mode: whoever shows up first in the frame wins."""

    def match(self, boxes: Sequence[tuple[int, BBox]]) -> Optional[int]:
        return boxes[0][0] if boxes else None


class FixedIdMatcher:
    """Matches one known person id; everything else is a stranger."""

    def __init__(self, person_id: int):
        self.person_id = person_id

    def match(self, boxes: Sequence[tuple[int, BBox]]) -> Optional[int]:
        for pid, _ in boxes:
            if pid == self.person_id:
                return pid
        return None


@dataclass(frozen=True)
class FaceBBoxMsg:
    """Payload published on /face_bbox for the selected user."""

    person_id: int
    bbox: BBox
    center_x: float
    center_y: float
    w: float
    h: float

    @classmethod
    def from_bbox(cls, person_id: int, box: BBox) -> "FaceBBoxMsg":
        cx, cy = box.center
        return cls(person_id, box, cx, cy, box.width, box.height)


@dataclass
class TrackState:
    last_matched_box: Optional[BBox] = None
    last_match_ms: int = 0


def select_user(
    boxes: Sequence[tuple[int, BBox]],
    matcher: IdentityMatcher,
    state: TrackState,
    timestamp_ms: int,
) -> Optional[int]:
    """Pick the user's person id among candidates, updating the track.

    A matcher hit always wins and refreshes the track. Otherwise the box
    whose center is nearest to the last matched box is tracked (ties
    break toward the lowest person id), unless the track has gone stale,
    in which case the state resets to cold start.
    """
    matched = matcher.match(boxes)
    if matched is not None:
        for pid, box in boxes:
            if pid == matched:
                state.last_matched_box = box
                state.last_match_ms = timestamp_ms
                return pid
        return None

    if state.last_matched_box is None:
        return None
    if timestamp_ms - state.last_match_ms > TRACK_STALE_MS:
        state.last_matched_box = None
        return None
    if not boxes:
        return None

    cx, cy = state.last_matched_box.center
    best_pid, best_box, best_d2 = None, None, None
    for pid, box in sorted(boxes, key=lambda pb: pb[0]):
        bx, by = box.center
        d2 = (bx - cx) ** 2 + (by - cy) ** 2
        if best_d2 is None or d2 < best_d2:
            best_pid, best_box, best_d2 = pid, box, d2
    state.last_matched_box = best_box
    return best_pid
