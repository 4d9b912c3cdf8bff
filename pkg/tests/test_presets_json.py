"""The frontend ships a frozen copy of the gesture presets; this keeps
that file classification-faithful to the Python rig."""

import json
import os

import pytest

from pose2flight.gestures import Gesture, classify_frame
from pose2flight.poses import build_frame
from pose2flight.view import classify_view

PRESETS_PATH = os.path.join(os.path.dirname(__file__), "..", "frontend", "src", "presets.json")


@pytest.fixture(scope="module")
def presets():
    if not os.path.exists(PRESETS_PATH):
        pytest.skip("frontend presets not exported")
    with open(PRESETS_PATH) as fh:
        return json.load(fh)


def to_frame(entry, ts=0):
    joints = {int(k): (x, y) for k, (x, y) in entry.items()}
    return build_frame(joints, ts)


def test_every_gesture_preset_classifies_as_named(presets):
    for gesture in Gesture:
        entry = presets["presets"][gesture.value]
        frame = to_frame(entry)
        view = classify_view(frame)
        assert classify_frame(frame, view) is gesture, gesture

def test_neutral_preset_is_no_gesture(presets):
    frame = to_frame(presets["presets"]["neutral"])
    assert classify_frame(frame, classify_view(frame)) is None


def test_presets_cover_all_18_joints(presets):
    for name, entry in presets["presets"].items():
        assert set(int(k) for k in entry) == set(range(18)), name
