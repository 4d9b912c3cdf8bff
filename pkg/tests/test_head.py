import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pose2flight.head import (
    AlwaysFirstMatcher,
    BBox,
    FixedIdMatcher,
    InsufficientJoints,
    TRACK_STALE_MS,
    TrackState,
    head_bbox,
    select_user,
)
from pose2flight.skeleton import L_EAR, L_EYE, NECK, NOSE, R_EAR, R_EYE

from test_skeleton import frame_with


class TestHeadBBox:
    def test_worked_example(self):
        f = frame_with({NOSE: (100, 100), R_EAR: (90, 95), L_EAR: (110, 95), NECK: (100, 120)})
        box = head_bbox(f)
        # hull [90,110]x[95,120], +25% margins: 5 px horizontal, 6.25 vertical
        assert box.x_min == pytest.approx(85.0)
        assert box.x_max == pytest.approx(115.0)
        assert box.y_min == pytest.approx(88.75)
        assert box.y_max == pytest.approx(126.25)

    def test_single_joint_insufficient(self):
        with pytest.raises(InsufficientJoints):
            head_bbox(frame_with({NOSE: (100, 100)}))

    def test_collinear_joints_insufficient(self):
        with pytest.raises(InsufficientJoints):
            head_bbox(frame_with({NOSE: (100, 100), NECK: (100, 140)}))

    def test_clamped_to_image(self):
        f = frame_with({NOSE: (5, 5), R_EAR: (0, 0), L_EAR: (30, 2), NECK: (10, 40)})
        box = head_bbox(f)
        assert box.x_min == 0.0 and box.y_min == 0.0
        assert box.x_max <= 640 and box.y_max <= 480

    def test_non_head_joints_ignored(self):
        f = frame_with(
            {NOSE: (100, 100), R_EAR: (90, 95), L_EAR: (110, 95), NECK: (100, 120), 8: (500, 400)}
        )
        assert head_bbox(f).x_max < 200

    @given(
        st.lists(
            st.tuples(st.floats(50, 590), st.floats(50, 430)),
            min_size=3,
            max_size=6,
        )
    )
    @settings(max_examples=200)
    def test_joints_strictly_inside(self, pts):
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        if max(xs) - min(xs) < 0.5 or max(ys) - min(ys) < 0.5:
            return  # sub-pixel hulls are degenerate in practice
        ids = [NOSE, NECK, R_EYE, L_EYE, R_EAR, L_EAR]
        f = frame_with(dict(zip(ids, pts)))
        box = head_bbox(f)
        for x, y in pts:
            assert box.x_min < x < box.x_max
            assert box.y_min < y < box.y_max

    def test_box_scales_linearly(self):
        coords = {NOSE: (100, 100), R_EAR: (90, 95), L_EAR: (110, 95), NECK: (100, 120)}
        b1 = head_bbox(frame_with(coords))
        b2 = head_bbox(frame_with({k: (2 * x, 2 * y) for k, (x, y) in coords.items()}))
        assert b2.width == pytest.approx(2 * b1.width, rel=1e-6)
        assert b2.height == pytest.approx(2 * b1.height, rel=1e-6)

    def test_bbox_invariants(self):
        with pytest.raises(ValueError):
            BBox(10, 10, 10, 20)


def box_at(cx, cy, half=10.0):
    return BBox(cx - half, cy - half, cx + half, cy + half)


class TestSelectUser:
    def test_matcher_match_updates_state(self):
        state = TrackState()
        boxes = [(7, box_at(100, 100)), (9, box_at(300, 50))]
        pid = select_user(boxes, FixedIdMatcher(9), state, timestamp_ms=1000)
        assert pid == 9
        assert state.last_matched_box.center == (300.0, 50.0)
        assert state.last_match_ms == 1000

    def test_nearest_center_fallback(self):
        state = TrackState(last_matched_box=box_at(100, 100), last_match_ms=900)
        boxes = [(1, box_at(105, 102)), (2, box_at(300, 50))]
        assert select_user(boxes, FixedIdMatcher(42), state, 1000) == 1

    def test_cold_start_none(self):
        assert select_user([], FixedIdMatcher(42), TrackState(), 0) is None

    def test_no_boxes_with_history(self):
        state = TrackState(last_matched_box=box_at(100, 100), last_match_ms=900)
        assert select_user([], FixedIdMatcher(42), state, 1000) is None

    def test_tie_breaks_lowest_id(self):
        state = TrackState(last_matched_box=box_at(100, 100), last_match_ms=900)
        boxes = [(5, box_at(110, 100)), (2, box_at(90, 100))]
        assert select_user(boxes, FixedIdMatcher(42), state, 1000) == 2

    def test_stale_track_resets(self):
        state = TrackState(last_matched_box=box_at(100, 100), last_match_ms=0)
        boxes = [(1, box_at(100, 100))]
        assert select_user(boxes, FixedIdMatcher(42), state, TRACK_STALE_MS + 1) is None
        assert state.last_matched_box is None

    def test_always_first_matcher(self):
        state = TrackState()
        assert select_user([(3, box_at(10, 10))], AlwaysFirstMatcher(), state, 0) == 3

    def test_deterministic(self):
        boxes = [(1, box_at(105, 102)), (2, box_at(300, 50))]
        results = set()
        for _ in range(10):
            state = TrackState(last_matched_box=box_at(100, 100), last_match_ms=900)
            results.add(select_user(boxes, FixedIdMatcher(42), state, 1000))
        assert results == {1}

    def test_fallback_tracks_moving_box(self):
        # the tracked box drifts; the fallback must follow it
        state = TrackState(last_matched_box=box_at(100, 100), last_match_ms=1000)
        for i, cx in enumerate((120, 140, 160)):
            pid = select_user([(1, box_at(cx, 100)), (2, box_at(400, 300))], FixedIdMatcher(42), state, 1100 + i)
            assert pid == 1
        assert state.last_matched_box.center[0] == pytest.approx(160)
